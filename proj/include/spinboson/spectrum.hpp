// spectrum.hpp — eigendecomposition of the spin-boson Hamiltonian,
// truncation-convergence checks, eigensystem text serialization

#pragma once

#include <lapacke.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinboson/io.hpp"
#include "spinboson/model.hpp"

namespace spinboson {

// Lowest `keep` eigenpairs of the Hamiltonian. Column lambda of `coeffs`
// holds the expansion coefficients c_{z,m} at row basis_index(z,m);
// energies ascending, coefficient signs fixed by fix_eigenvector_signs.
struct EigenSystem {
    ModelParams params;
    BasisSpec basis;
    Eigen::VectorXd energies;  // size keep
    Eigen::MatrixXd coeffs;    // dim x keep

    int keep() const { return basis.keep; }
    int n_osc() const { return basis.n_osc; }

    double coeff(Spin z, int m, int lambda) const { return coeffs(basis_index(z, m), lambda); }

    void require_state(int lambda) const {
        if (lambda < 0 || lambda >= basis.keep)
            throw std::out_of_range("eigenstate index " + std::to_string(lambda) +
                                    " out of range (keep=" + std::to_string(basis.keep) + ")");
    }
};

// Deterministic phase: the coefficient of largest magnitude is made
// positive, ties resolved toward the lowest index.
inline void fix_eigenvector_signs(Eigen::MatrixXd& coeffs) {
    for (Eigen::Index col = 0; col < coeffs.cols(); ++col) {
        auto c = coeffs.col(col);
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            const double a = std::abs(c[i]);
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (c[imax] < 0.0) c = -c;
    }
}

// Full symmetric eigendecomposition (divide and conquer), keeping the
// lowest `keep` pairs. The band matrix is expanded to dense storage.
inline EigenSystem diagonalize(const SymmetricBandMatrix& h, int keep, const ModelParams& params) {
    const int n = h.dim();
    if (keep < 1 || keep > n)
        throw std::invalid_argument("diagonalize: keep must satisfy 0 < keep <= dim");
    if (n % 2 != 0) throw std::invalid_argument("diagonalize: dimension must be even");
    Eigen::MatrixXd a;
    Eigen::VectorXd w;
    try {
        a = h.dense();
        w.resize(n);
    } catch (const std::bad_alloc&) {
        throw std::runtime_error("diagonalize: allocation failed for dim=" + std::to_string(n));
    }
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0)
        throw std::runtime_error("diagonalize: dsyevd failed, info=" + std::to_string(info));
    EigenSystem es;
    es.params = params;
    es.basis = BasisSpec{n / 2, keep};
    es.energies = w.head(keep);
    es.coeffs = a.leftCols(keep);
    fix_eigenvector_signs(es.coeffs);
    return es;
}

// All eigenvalues of the band matrix without eigenvectors. Much cheaper
// than diagonalize; used by the convergence check.
inline Eigen::VectorXd eigenvalues_only(const SymmetricBandMatrix& h) {
    const int n = h.dim();
    const int kd = h.bandwidth();
    std::vector<double> ab = h.band_storage();  // dsbevd overwrites the band
    Eigen::VectorXd w(n);
    const lapack_int info = LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'N', 'L', n, kd, ab.data(), kd + 1,
                                           w.data(), nullptr, n);
    if (info != 0)
        throw std::runtime_error("eigenvalues_only: dsbevd failed, info=" + std::to_string(info));
    return w;
}

inline EigenSystem solve_eigensystem(const ModelParams& m, const BasisSpec& b) {
    return diagonalize(build_hamiltonian(m, b), b.keep, m);
}

struct ConvergenceReport {
    int n_osc_small{0};
    int n_osc_large{0};
    double max_abs_shift{0.0};
    bool converged{false};
};

// Compares the kept eigenvalues at n_osc against a basis enlarged by 1.25x.
inline ConvergenceReport convergence_check(const ModelParams& m, const BasisSpec& b,
                                           double tolerance) {
    m.validate();
    b.validate();
    const int n_large = int(std::ceil(1.25 * double(b.n_osc)));
    const Eigen::VectorXd w_small = eigenvalues_only(build_hamiltonian(m, b));
    const Eigen::VectorXd w_large =
        eigenvalues_only(build_hamiltonian(m, BasisSpec{n_large, b.keep}));
    ConvergenceReport rep;
    rep.n_osc_small = b.n_osc;
    rep.n_osc_large = n_large;
    rep.max_abs_shift = (w_small.head(b.keep) - w_large.head(b.keep)).cwiseAbs().maxCoeff();
    rep.converged = rep.max_abs_shift <= tolerance;
    return rep;
}

// ------------------------------ diagnostics ---------------------------------

inline double max_normalization_error(const EigenSystem& es) {
    double worst = 0.0;
    for (int l = 0; l < es.keep(); ++l)
        worst = std::max(worst, std::abs(es.coeffs.col(l).squaredNorm() - 1.0));
    return worst;
}

inline double max_orthogonality_error(const EigenSystem& es) {
    const Eigen::MatrixXd gram = es.coeffs.transpose() * es.coeffs;
    double worst = 0.0;
    for (int i = 0; i < gram.rows(); ++i)
        for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(gram(i, j)));
    return worst;
}

// max over kept states of ||H v - E v|| / max(1, |E|).
inline double max_relative_residual(const EigenSystem& es, const SymmetricBandMatrix& h) {
    if (h.dim() != es.basis.dim())
        throw std::invalid_argument("max_relative_residual: dimension mismatch");
    double worst = 0.0;
    for (int l = 0; l < es.keep(); ++l) {
        const Eigen::VectorXd v = es.coeffs.col(l);
        const double res = (h.multiply(v) - es.energies[l] * v).norm();
        worst = std::max(worst, res / std::max(1.0, std::abs(es.energies[l])));
    }
    return worst;
}

// ----------------------------- serialization --------------------------------

inline std::string canonical_params(const ModelParams& m, const BasisSpec& b) {
    return "p=" + format_double(m.p) + " r=" + format_double(m.r) +
           " eps_plus=" + format_double(m.eps_plus) + " eps_minus=" + format_double(m.eps_minus) +
           " n_osc=" + std::to_string(b.n_osc) + " keep=" + std::to_string(b.keep);
}

namespace detail {

inline void parse_params_line(std::string_view line, ModelParams& m, BasisSpec& b) {
    // expects "# params p=... r=... eps_plus=... eps_minus=... n_osc=... keep=..."
    const auto field = [&](std::string_view key) -> std::string_view {
        const std::string token = " " + std::string(key) + "=";
        const auto pos = line.find(token);
        if (pos == std::string_view::npos)
            throw std::runtime_error("eigensystem file: missing field " + std::string(key));
        const auto start = pos + token.size();
        auto stop = line.find(' ', start);
        if (stop == std::string_view::npos) stop = line.size();
        return line.substr(start, stop - start);
    };
    m.p = parse_double(field("p"));
    m.r = parse_double(field("r"));
    m.eps_plus = parse_double(field("eps_plus"));
    m.eps_minus = parse_double(field("eps_minus"));
    b.n_osc = int(parse_int(field("n_osc")));
    b.keep = int(parse_int(field("keep")));
}

}  // namespace detail

// Writes energies.csv and coefficients.csv under dir. Numbers use the
// shortest round-trip form, so a reload reproduces the eigensystem exactly.
inline void save_eigensystem(const EigenSystem& es, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::string params = "# params " + canonical_params(es.params, es.basis) + "\n";
    {
        std::string out = "# eigensystem energies\n" + params + "lambda,energy\n";
        for (int l = 0; l < es.keep(); ++l)
            out += std::to_string(l) + "," + format_double(es.energies[l]) + "\n";
        write_text_file(dir / "energies.csv", out);
    }
    {
        std::string out = "# eigensystem coefficients\n" + params + "lambda,z,m,c\n";
        out.reserve(out.size() + std::size_t(es.keep()) * std::size_t(es.basis.dim()) * 24);
        for (int l = 0; l < es.keep(); ++l) {
            const std::string prefix = std::to_string(l) + ",";
            for (int m = 0; m < es.n_osc(); ++m) {
                const std::string mid = "," + std::to_string(m) + ",";
                out += prefix + "up" + mid + format_double(es.coeff(Spin::up, m, l)) + "\n";
                out += prefix + "down" + mid + format_double(es.coeff(Spin::down, m, l)) + "\n";
            }
        }
        write_text_file(dir / "coefficients.csv", out);
    }
}

inline EigenSystem load_eigensystem(const std::filesystem::path& dir) {
    EigenSystem es;
    bool have_params = false;
    const auto next_line = [](std::string_view text, std::size_t& pos) -> std::string_view {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        return line;
    };

    {
        const std::string text = read_text_file(dir / "energies.csv");
        std::size_t pos = 0;
        std::vector<double> energies;
        while (pos < text.size()) {
            const auto line = next_line(text, pos);
            if (line.empty()) continue;
            if (line[0] == '#') {
                if (line.rfind("# params ", 0) == 0) {
                    detail::parse_params_line(line, es.params, es.basis);
                    have_params = true;
                }
                continue;
            }
            if (line == "lambda,energy") continue;
            const auto comma = line.find(',');
            if (comma == std::string_view::npos)
                throw std::runtime_error("energies.csv: malformed line");
            energies.push_back(parse_double(line.substr(comma + 1)));
        }
        if (!have_params) throw std::runtime_error("energies.csv: missing params header");
        es.basis.validate();
        es.params.validate();
        if (int(energies.size()) != es.basis.keep)
            throw std::runtime_error("energies.csv: wrong number of rows");
        es.energies = Eigen::Map<Eigen::VectorXd>(energies.data(), Eigen::Index(energies.size()));
        for (int l = 1; l < es.basis.keep; ++l)
            if (es.energies[l] < es.energies[l - 1])
                throw std::runtime_error("energies.csv: energies not ascending");
    }

    {
        const std::string text = read_text_file(dir / "coefficients.csv");
        es.coeffs.setConstant(es.basis.dim(), es.basis.keep,
                              std::numeric_limits<double>::quiet_NaN());
        std::size_t pos = 0;
        std::size_t rows = 0;
        while (pos < text.size()) {
            const auto line = next_line(text, pos);
            if (line.empty() || line[0] == '#' || line == "lambda,z,m,c") continue;
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            const auto c3 = line.find(',', c2 + 1);
            if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
                c3 == std::string_view::npos)
                throw std::runtime_error("coefficients.csv: malformed line");
            const int lambda = int(parse_int(line.substr(0, c1)));
            const auto ztag = line.substr(c1 + 1, c2 - c1 - 1);
            const int m = int(parse_int(line.substr(c2 + 1, c3 - c2 - 1)));
            const double c = parse_double(line.substr(c3 + 1));
            Spin z;
            if (ztag == "up")
                z = Spin::up;
            else if (ztag == "down")
                z = Spin::down;
            else
                throw std::runtime_error("coefficients.csv: bad spin tag");
            if (lambda < 0 || lambda >= es.basis.keep || m < 0 || m >= es.basis.n_osc)
                throw std::runtime_error("coefficients.csv: index out of range");
            es.coeffs(basis_index(z, m), lambda) = c;
            ++rows;
        }
        if (rows != std::size_t(es.basis.dim()) * std::size_t(es.basis.keep))
            throw std::runtime_error("coefficients.csv: incomplete table");
        if (!es.coeffs.allFinite())
            throw std::runtime_error("coefficients.csv: missing or non-finite entries");
    }
    return es;
}

// Cache lookup: returns the stored eigensystem only when the parameters
// match exactly; any malformed or missing cache entry reads as a miss.
inline std::optional<EigenSystem> try_load_eigensystem(const std::filesystem::path& dir,
                                                       const ModelParams& m, const BasisSpec& b) {
    try {
        EigenSystem es = load_eigensystem(dir);
        if (canonical_params(es.params, es.basis) != canonical_params(m, b)) return std::nullopt;
        return es;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace spinboson
