// absorption.hpp — optical transition matrix elements, dimensionless
// absorption strengths, stick spectra, spin-ratio curve, and exact band
// interpolation between optical asymmetries

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinboson/adiabatic.hpp"
#include "spinboson/model.hpp"
#include "spinboson/spectrum.hpp"

namespace spinboson {

// Projected monomer transition dipoles; only the direction matters for the
// dimensionless strengths.
struct OpticalParams {
    double mu1{1.0};
    double mu2{1.0};

    void validate() const {
        if (!std::isfinite(mu1) || !std::isfinite(mu2))
            throw std::invalid_argument("OpticalParams: dipoles must be finite");
        if (mu1 * mu1 + mu2 * mu2 == 0.0)
            throw std::invalid_argument("OpticalParams: mu1 and mu2 cannot both be zero");
    }
};

// (cos a, sin a) with cos a = mu1/sqrt(mu1^2+mu2^2), sin a = mu2/sqrt(...).
inline SpinProjection spin_direction(const OpticalParams& o) {
    o.validate();
    const double n = std::hypot(o.mu1, o.mu2);
    return {o.mu1 / n, o.mu2 / n};
}

// M_{lambda,g} = mu1 c_up,0 + mu2 c_down,0; the ground state is the
// excitonic vacuum with the oscillator in m = 0.
inline double transition_element(const EigenSystem& es, int lambda, const OpticalParams& o) {
    es.require_state(lambda);
    o.validate();
    return o.mu1 * es.coeff(Spin::up, 0, lambda) + o.mu2 * es.coeff(Spin::down, 0, lambda);
}

// Q_{lambda,g} = M^2 / (mu1^2 + mu2^2); invariant under rescaling of mu.
inline double absorption_strength(const EigenSystem& es, int lambda, const OpticalParams& o) {
    const double m = transition_element(es, lambda, o);
    return m * m / (o.mu1 * o.mu1 + o.mu2 * o.mu2);
}

struct SpectralLine {
    int lambda{0};
    double energy{0.0};
    double strength{0.0};
};

struct StickSpectrum {
    std::vector<SpectralLine> lines;
    double e_min{0.0};
    double e_max{0.0};
    OpticalParams optical;
    std::string provenance;  // canonical parameters of the source eigensystem
};

// All kept states with E_lambda inside [e_min, e_max]; no broadening.
inline StickSpectrum stick_spectrum(const EigenSystem& es, const OpticalParams& o, double e_min,
                                    double e_max) {
    o.validate();
    StickSpectrum s;
    s.e_min = e_min;
    s.e_max = e_max;
    s.optical = o;
    s.provenance = canonical_params(es.params, es.basis);
    for (int l = 0; l < es.keep(); ++l) {
        const double e = es.energies[l];
        if (e >= e_min && e <= e_max) s.lines.push_back({l, e, absorption_strength(es, l, o)});
    }
    return s;
}

// r^(lambda) = c_down,0 / c_up,0; undefined below the eigensolver noise
// floor on |c_up,0|.
inline constexpr double spin_ratio_floor = 1e-14;

inline std::optional<double> spin_ratio(const EigenSystem& es, int lambda) {
    es.require_state(lambda);
    const double up = es.coeff(Spin::up, 0, lambda);
    if (std::abs(up) < spin_ratio_floor) return std::nullopt;
    return es.coeff(Spin::down, 0, lambda) / up;
}

struct RatioPoint {
    int lambda{0};
    double energy{0.0};
    std::optional<double> ratio;
};

struct RatioCurve {
    std::vector<RatioPoint> points;  // one per kept state, lambda ascending
    std::string provenance;
};

inline RatioCurve spin_ratio_curve(const EigenSystem& es) {
    RatioCurve curve;
    curve.provenance = canonical_params(es.params, es.basis);
    curve.points.resize(es.keep());
    for (int l = 0; l < es.keep(); ++l) curve.points[l] = {l, es.energies[l], spin_ratio(es, l)};
    return curve;
}

// Reconstructs the band at a target optical asymmetry from the band at
// (mu1 != 0, mu2 = 0) and the spin-ratio curve:
//   Q(target) = (mu1 + mu2 r)^2 / (mu1^2 + mu2^2) * Q^+,  Q^+ = c_up,0^2.
// Exact identity wherever the ratio is defined; undefined-ratio lines are
// recomputed directly from the coefficients.
inline StickSpectrum interpolate_band(const EigenSystem& es, const StickSpectrum& base,
                                      const RatioCurve& ratios, const OpticalParams& target) {
    target.validate();
    if (base.optical.mu2 != 0.0 || base.optical.mu1 == 0.0)
        throw std::invalid_argument("interpolate_band: base must be computed at mu1 != 0, mu2 = 0");
    const std::string provenance = canonical_params(es.params, es.basis);
    if (base.provenance != provenance || ratios.provenance != provenance)
        throw std::invalid_argument("interpolate_band: inputs from a different eigensystem");
    const double norm = target.mu1 * target.mu1 + target.mu2 * target.mu2;
    StickSpectrum out;
    out.e_min = base.e_min;
    out.e_max = base.e_max;
    out.optical = target;
    out.provenance = provenance;
    out.lines.reserve(base.lines.size());
    for (const SpectralLine& line : base.lines) {
        if (line.lambda < 0 || line.lambda >= int(ratios.points.size()) ||
            ratios.points[line.lambda].lambda != line.lambda)
            throw std::invalid_argument("interpolate_band: ratio curve does not cover the band");
        const auto& ratio = ratios.points[line.lambda].ratio;
        double strength = 0.0;
        if (ratio.has_value()) {
            const double f = target.mu1 + target.mu2 * (*ratio);
            strength = f * f / norm * line.strength;
        } else {
            strength = absorption_strength(es, line.lambda, target);
        }
        out.lines.push_back({line.lambda, line.energy, strength});
    }
    return out;
}

// Default band windows: Franck-Condon energies widened by a few oscillator
// quanta on each side.
struct BandWindows {
    double lower_min{0.0}, lower_max{0.0};
    double upper_min{0.0}, upper_max{0.0};
};

inline BandWindows default_band_windows(const ModelParams& m, double halfwidth_quanta = 5.0) {
    const FranckCondonEnergies fc = franck_condon_energies(m);
    const double w = halfwidth_quanta * m.r;
    return {fc.e_lower - w, fc.e_lower + w, fc.e_upper - w, fc.e_upper + w};
}

}  // namespace spinboson
