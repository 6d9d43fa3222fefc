// phase_analysis.hpp — eigenstate diagnostics: Bloch projections, Husimi
// distributions at fixed spin projection, parity expectation, and the
// orbit-tube concentration measure

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinboson/adiabatic.hpp"
#include "spinboson/detail/parallel.hpp"
#include "spinboson/io.hpp"
#include "spinboson/model.hpp"
#include "spinboson/spectrum.hpp"

namespace spinboson {

// x_lambda = sum_m 2 c_up,m c_down,m  (real coefficients)
inline double bloch_projection(const EigenSystem& es, int lambda) {
    es.require_state(lambda);
    double x = 0.0;
    for (int m = 0; m < es.n_osc(); ++m)
        x += 2.0 * es.coeff(Spin::up, m, lambda) * es.coeff(Spin::down, m, lambda);
    return x;
}

struct BlochPoint {
    int lambda{0};
    double energy{0.0};
    double x{0.0};
};

// Energy-ascending (E_lambda, x_lambda) pairs for all kept states.
inline std::vector<BlochPoint> bloch_scan(const EigenSystem& es) {
    std::vector<BlochPoint> points(es.keep());
    for (int l = 0; l < es.keep(); ++l) points[l] = {l, es.energies[l], bloch_projection(es, l)};
    return points;
}

// <lambda| sigma_x (x) (-1)^m |lambda>
inline double parity_expectation(const EigenSystem& es, int lambda) {
    es.require_state(lambda);
    double value = 0.0;
    double sign = 1.0;
    for (int m = 0; m < es.n_osc(); ++m, sign = -sign)
        value += sign * 2.0 * es.coeff(Spin::up, m, lambda) * es.coeff(Spin::down, m, lambda);
    return value;
}

// alpha(Q,P) = sqrt(r/2) Q + i P / sqrt(2r)
inline std::complex<double> coherent_alpha(const ModelParams& m, const PhasePoint& pt) {
    return {std::sqrt(0.5 * m.r) * pt.q, pt.p_mom / std::sqrt(2.0 * m.r)};
}

// Evaluates h = |sum_m g_m <m|alpha>|^2 with g_m the eigenstate coefficients
// contracted against the fixed spin projection. The overlap
// <m|alpha> = alpha^m / sqrt(m!) exp(-|alpha|^2/2) is formed in
// log-magnitude/phase form: |alpha|^2 reaches several hundred inside the
// scanned windows, far beyond the naive factorial range.
class HusimiEvaluator {
public:
    HusimiEvaluator(const EigenSystem& es, int lambda, const SpinProjection& s)
        : r_(es.params.r), g_(es.n_osc()), half_log_factorial_(es.n_osc()) {
        es.require_state(lambda);
        for (int m = 0; m < es.n_osc(); ++m) {
            g_[m] = es.coeff(Spin::up, m, lambda) * s.c_up +
                    es.coeff(Spin::down, m, lambda) * s.c_down;
            half_log_factorial_[m] = 0.5 * std::lgamma(double(m) + 1.0);
        }
    }

    double value(const PhasePoint& pt) const {
        const double a2 = 0.5 * r_ * pt.q * pt.q + 0.5 * pt.p_mom * pt.p_mom / r_;
        if (a2 == 0.0) return g_[0] * g_[0];
        const double log_a = 0.5 * std::log(a2);
        const double theta = std::atan2(pt.p_mom / std::sqrt(2.0 * r_), std::sqrt(0.5 * r_) * pt.q);
        constexpr double log_tiny = -745.0;  // below exp() underflow
        double re = 0.0, im = 0.0;
        for (int m = 0; m < int(g_.size()); ++m) {
            const double log_mag = double(m) * log_a - half_log_factorial_[m] - 0.5 * a2;
            if (log_mag < log_tiny) {
                if (double(m) > a2) break;  // past the peak, terms only shrink
                continue;
            }
            if (g_[m] == 0.0) continue;
            const double w = g_[m] * std::exp(log_mag);
            const double phase = double(m) * theta;
            re += w * std::cos(phase);
            im += w * std::sin(phase);
        }
        return re * re + im * im;
    }

private:
    double r_;
    std::vector<double> g_;
    std::vector<double> half_log_factorial_;
};

inline double husimi_value(const EigenSystem& es, int lambda, const PhasePoint& pt,
                           const SpinProjection& s) {
    return HusimiEvaluator(es, lambda, s).value(pt);
}

struct HusimiWindow {
    double q_min{0.0}, q_max{0.0};
    double p_min{0.0}, p_max{0.0};

    void validate() const {
        if (!(q_max > q_min) || !(p_max > p_min))
            throw std::invalid_argument("HusimiWindow: degenerate window");
    }
};

// Husimi values on a uniform grid whose cell centers span the window
// inclusively. values(ip, iq): P ascending by row, Q ascending by column.
struct HusimiGrid {
    HusimiWindow window;
    int nq{0}, np{0};
    Eigen::MatrixXd values;
    int lambda{0};
    SpinProjection spin;

    double dq() const { return (window.q_max - window.q_min) / (nq - 1); }
    double dp() const { return (window.p_max - window.p_min) / (np - 1); }
    double q_at(int iq) const { return window.q_min + dq() * iq; }
    double p_at(int ip) const { return window.p_min + dp() * ip; }
};

inline HusimiGrid husimi_grid(const EigenSystem& es, int lambda, const HusimiWindow& window,
                              int nq, int np, const SpinProjection& s) {
    window.validate();
    if (nq < 2 || np < 2) throw std::invalid_argument("husimi_grid: nq, np must be >= 2");
    HusimiGrid grid;
    grid.window = window;
    grid.nq = nq;
    grid.np = np;
    grid.lambda = lambda;
    grid.spin = s;
    grid.values.resize(np, nq);
    const HusimiEvaluator eval(es, lambda, s);
    detail::parallel_for(nq * np, [&](int idx) {
        const int iq = idx / np;
        const int ip = idx % np;
        grid.values(ip, iq) = eval.value({grid.q_at(iq), grid.p_at(ip)});
    });
    return grid;
}

// Fraction of total grid mass within a Chebyshev tube of `tube_cells`
// cells around the union of the orbit polylines.
inline double tube_mass_fraction(const HusimiGrid& grid, const std::vector<Orbit>& orbits,
                                 int tube_cells = 3) {
    if (tube_cells < 0) throw std::invalid_argument("tube_mass_fraction: negative tube width");
    std::vector<char> mask(std::size_t(grid.nq) * std::size_t(grid.np), 0);
    const double dq = grid.dq();
    const double dp = grid.dp();
    const auto mark = [&](double q, double p) {
        const int iq = int(std::lround((q - grid.window.q_min) / dq));
        const int ip = int(std::lround((p - grid.window.p_min) / dp));
        for (int a = std::max(0, iq - tube_cells); a <= std::min(grid.nq - 1, iq + tube_cells); ++a)
            for (int b = std::max(0, ip - tube_cells); b <= std::min(grid.np - 1, ip + tube_cells);
                 ++b)
                mask[std::size_t(a) * std::size_t(grid.np) + std::size_t(b)] = 1;
    };
    const double step = 0.5 * std::min(dq, dp);
    for (const Orbit& orbit : orbits)
        for (const auto& loop : orbit.components)
            for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
                const double len = std::hypot(loop[k + 1].q - loop[k].q,
                                              loop[k + 1].p_mom - loop[k].p_mom);
                const int n_sub = std::max(1, int(std::ceil(len / step)));
                for (int j = 0; j <= n_sub; ++j) {
                    const double t = double(j) / n_sub;
                    mark(loop[k].q + t * (loop[k + 1].q - loop[k].q),
                         loop[k].p_mom + t * (loop[k + 1].p_mom - loop[k].p_mom));
                }
            }
    const double total = grid.values.sum();
    if (total <= 0.0) return 0.0;
    double inside = 0.0;
    for (int iq = 0; iq < grid.nq; ++iq)
        for (int ip = 0; ip < grid.np; ++ip)
            if (mask[std::size_t(iq) * std::size_t(grid.np) + std::size_t(ip)])
                inside += grid.values(ip, iq);
    return inside / total;
}

// Window that covers the classical orbits of both branches at `energy`,
// padded by a few coherent-state widths.
inline HusimiWindow auto_husimi_window(const ModelParams& m, double energy) {
    double q_lo = 0.0, q_hi = 0.0, p_hi = 0.0;
    bool found = false;
    for (Branch b : {Branch::lower, Branch::upper}) {
        try {
            const Orbit orbit = classical_orbit(m, b, energy, 256);
            for (const auto& loop : orbit.components)
                for (const PhasePoint& pt : loop) {
                    if (!found) {
                        q_lo = q_hi = pt.q;
                        found = true;
                    }
                    q_lo = std::min(q_lo, pt.q);
                    q_hi = std::max(q_hi, pt.q);
                    p_hi = std::max(p_hi, std::abs(pt.p_mom));
                }
        } catch (const EmptyOrbitError&) {
            // branch not reached at this energy
        }
    }
    if (!found) throw EmptyOrbitError("auto_husimi_window: no orbit at this energy");
    const double q_pad = 3.0 / std::sqrt(m.r);
    const double p_pad = 3.0 * std::sqrt(m.r);
    return {q_lo - q_pad, q_hi + q_pad, -(p_hi + p_pad), p_hi + p_pad};
}

// ----------------------------- serialization --------------------------------

inline std::string grid_to_csv(const HusimiGrid& grid, const std::string& provenance) {
    std::string out;
    out += "# husimi grid lambda=" + std::to_string(grid.lambda) + "\n";
    out += "# params " + provenance + "\n";
    out += "# spin c_up=" + format_double(grid.spin.c_up) +
           " c_down=" + format_double(grid.spin.c_down) + "\n";
    out += "# window q_min=" + format_double(grid.window.q_min) +
           " q_max=" + format_double(grid.window.q_max) +
           " p_min=" + format_double(grid.window.p_min) +
           " p_max=" + format_double(grid.window.p_max) + " nq=" + std::to_string(grid.nq) +
           " np=" + std::to_string(grid.np) + "\n";
    out += "# rows: P ascending, columns: Q ascending\n";
    for (int ip = 0; ip < grid.np; ++ip) {
        for (int iq = 0; iq < grid.nq; ++iq) {
            if (iq) out += ',';
            out += format_double(grid.values(ip, iq));
        }
        out += '\n';
    }
    return out;
}

// Plain (P2) 16-bit portable graymap scaled to the grid maximum; top image
// row corresponds to p_max.
inline std::string grid_to_pgm16(const HusimiGrid& grid) {
    const double peak = grid.values.maxCoeff();
    std::string out = "P2\n# husimi lambda=" + std::to_string(grid.lambda) + "\n" +
                      std::to_string(grid.nq) + " " + std::to_string(grid.np) + "\n65535\n";
    for (int ip = grid.np - 1; ip >= 0; --ip) {
        for (int iq = 0; iq < grid.nq; ++iq) {
            if (iq) out += ' ';
            const long v =
                peak > 0.0 ? std::lround(65535.0 * grid.values(ip, iq) / peak) : 0L;
            out += std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace spinboson
