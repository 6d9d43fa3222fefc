// adiabatic.hpp — adiabatic reference systems: potentials, mixing
// coefficient, branch Bloch values, Franck-Condon energies, and classical
// energy-contour orbits in the (Q,P) plane

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinboson/model.hpp"

namespace spinboson {

enum class Branch { lower, upper };

inline const char* branch_name(Branch b) { return b == Branch::lower ? "lower" : "upper"; }

// Dimensionless phase-space coordinates of the oscillator.
struct PhasePoint {
    double q{0.0};
    double p_mom{0.0};
};

struct AdiabaticPotentials {
    double u_minus{0.0};
    double u_plus{0.0};
};

// U^±(Q) = r^2 Q^2 / 2 ± sqrt(1/4 + (eps_- + sqrt(p/2) r Q)^2)
inline AdiabaticPotentials adiabatic_potentials(const ModelParams& m, double q) {
    const double harmonic = 0.5 * m.r * m.r * q * q;
    const double tilt = m.eps_minus + std::sqrt(0.5 * m.p) * m.r * q;
    const double gap = std::sqrt(0.25 + tilt * tilt);
    return {harmonic - gap, harmonic + gap};
}

inline double branch_potential(const ModelParams& m, double q, Branch b) {
    const AdiabaticPotentials u = adiabatic_potentials(m, q);
    return b == Branch::lower ? u.u_minus : u.u_plus;
}

// Mixing coefficient A(Q); |A| < 1 for all Q.
inline double adiabatic_mixing(const ModelParams& m, double q) {
    const double t = 2.0 * m.eps_minus + std::sqrt(2.0 * m.p) * m.r * q;
    return t / std::sqrt(1.0 + t * t);
}

// <sigma_x> of the adiabatic state: negative on the upper branch,
// positive on the lower branch.
inline double adiabatic_bloch(const ModelParams& m, double q, Branch b) {
    const double t = 2.0 * m.eps_minus + std::sqrt(2.0 * m.p) * m.r * q;
    const double mag = 1.0 / std::sqrt(1.0 + t * t);
    return b == Branch::upper ? -mag : mag;
}

struct AdiabaticStates {
    SpinProjection upper;
    SpinProjection lower;
};

// phi^+ = (sqrt(1+A), -sqrt(1-A))/sqrt(2), phi^- = (sqrt(1-A), sqrt(1+A))/sqrt(2)
inline AdiabaticStates adiabatic_states(const ModelParams& m, double q) {
    const double a = adiabatic_mixing(m, q);
    const double plus = std::sqrt(0.5 * (1.0 + a));
    const double minus = std::sqrt(0.5 * (1.0 - a));
    return {SpinProjection{plus, -minus}, SpinProjection{minus, plus}};
}

struct FranckCondonEnergies {
    double e_lower{0.0};
    double e_upper{0.0};
};

// Vertical-transition target energies U^-(0), U^+(0) from the ground-state
// region Q = P = 0.
inline FranckCondonEnergies franck_condon_energies(const ModelParams& m) {
    const AdiabaticPotentials u = adiabatic_potentials(m, 0.0);
    return {u.u_minus, u.u_plus};
}

// Stationary points of both branches satisfy |Q| <= sqrt(p/2)/r, since the
// slope of the gap term is bounded by sqrt(p/2) r.
inline double branch_minimum(const ModelParams& m, Branch b) {
    const double q_bound = std::sqrt(0.5 * m.p) / m.r + 1.0;
    constexpr int n_scan = 4096;
    double best_q = 0.0;
    double best_u = branch_potential(m, 0.0, b);
    for (int i = 0; i <= n_scan; ++i) {
        const double q = -q_bound + 2.0 * q_bound * double(i) / n_scan;
        const double u = branch_potential(m, q, b);
        if (u < best_u) {
            best_u = u;
            best_q = q;
        }
    }
    // golden-section refinement around the best scan cell
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_q - 2.0 * q_bound / n_scan;
    double hi = best_q + 2.0 * q_bound / n_scan;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = branch_potential(m, x1, b);
    double f2 = branch_potential(m, x2, b);
    while (hi - lo > 1e-12 * (1.0 + std::abs(lo))) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = branch_potential(m, x1, b);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = branch_potential(m, x2, b);
        }
    }
    return std::min(std::min(f1, f2), best_u);
}

// Closed energy contour 1/2 P^2 + U_b(Q) = E. A double-welled lower branch
// below the barrier yields one component per well.
struct Orbit {
    Branch branch{Branch::lower};
    double energy{0.0};
    std::vector<std::vector<PhasePoint>> components;  // each polyline is closed
};

struct EmptyOrbitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double orbit_contour_tolerance = 1e-9;

namespace detail {

// Outside |Q| > bound the potential certainly exceeds E:
// U(Q) >= r^2 Q^2/2 - sqrt(p/2) r |Q| - |eps_-| - 1/2.
inline double orbit_q_bound(const ModelParams& m, double energy) {
    const double slack = energy + std::abs(m.eps_minus) + 0.5;
    const double disc = 0.5 * m.p + 2.0 * slack;
    if (disc < 0.0) return -1.0;  // the allowed set is empty
    return (std::sqrt(0.5 * m.p) + std::sqrt(disc)) / m.r + 1.0;
}

inline double bisect_turning_point(const ModelParams& m, Branch b, double energy, double q_in,
                                   double q_out) {
    // U(q_in) < E < U(q_out); shrink toward the crossing to 1e-10 in Q
    while (std::abs(q_out - q_in) > 1e-10) {
        const double mid = 0.5 * (q_in + q_out);
        if (branch_potential(m, mid, b) < energy)
            q_in = mid;
        else
            q_out = mid;
    }
    return q_in;
}

}  // namespace detail

inline Orbit classical_orbit(const ModelParams& m, Branch b, double energy, int n_points) {
    m.validate();
    if (!std::isfinite(energy)) throw std::invalid_argument("classical_orbit: energy not finite");
    if (n_points < 8) throw std::invalid_argument("classical_orbit: n_points must be >= 8");

    const double q_bound = detail::orbit_q_bound(m, energy);
    if (q_bound < 0.0)
        throw EmptyOrbitError("classical_orbit: energy below the " + std::string(branch_name(b)) +
                              " branch minimum");

    constexpr int n_scan = 4096;
    std::vector<double> qs(n_scan + 1), f(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        qs[i] = -q_bound + 2.0 * q_bound * double(i) / n_scan;
        f[i] = branch_potential(m, qs[i], b) - energy;
    }

    // classically allowed intervals, refined by bisection
    std::vector<std::pair<double, double>> intervals;
    int i = 0;
    while (i <= n_scan) {
        if (f[i] < 0.0) {
            const int first = i;
            while (i + 1 <= n_scan && f[i + 1] < 0.0) ++i;
            const int last = i;
            const double left =
                first == 0 ? qs[0]
                           : detail::bisect_turning_point(m, b, energy, qs[first], qs[first - 1]);
            const double right =
                last == n_scan
                    ? qs[n_scan]
                    : detail::bisect_turning_point(m, b, energy, qs[last], qs[last + 1]);
            intervals.emplace_back(left, right);
        }
        ++i;
    }
    if (intervals.empty())
        throw EmptyOrbitError("classical_orbit: energy below the " + std::string(branch_name(b)) +
                              " branch minimum");

    Orbit orbit;
    orbit.branch = b;
    orbit.energy = energy;
    const int n_half = std::max(4, n_points / 2);
    for (const auto& [ql, qr] : intervals) {
        std::vector<PhasePoint> loop;
        loop.reserve(2 * n_half + 1);
        std::vector<double> momenta(n_half + 1);
        for (int j = 0; j <= n_half; ++j) {
            const double q = ql + (qr - ql) * double(j) / n_half;
            const double kinetic = 2.0 * (energy - branch_potential(m, q, b));
            momenta[j] = std::sqrt(std::max(0.0, kinetic));
            loop.push_back({q, momenta[j]});
        }
        for (int j = n_half - 1; j >= 1; --j)
            loop.push_back({ql + (qr - ql) * double(j) / n_half, -momenta[j]});
        loop.push_back(loop.front());  // close the contour
        orbit.components.push_back(std::move(loop));
    }
    return orbit;
}

}  // namespace spinboson
