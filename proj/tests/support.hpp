// support.hpp — shared test fixtures

#pragma once

#include <stdexcept>
#include <tuple>
#include <vector>

#include "spinboson/spectrum.hpp"

namespace support {

using spinboson::BasisSpec;
using spinboson::EigenSystem;
using spinboson::ModelParams;
using spinboson::Spin;

// Eigensystem with hand-placed coefficient columns (normalized here) and
// evenly spaced placeholder energies.
inline EigenSystem artificial_eigensystem(
    const ModelParams& params, int n_osc,
    const std::vector<std::vector<std::tuple<Spin, int, double>>>& states) {
    EigenSystem es;
    es.params = params;
    es.basis = BasisSpec{n_osc, int(states.size())};
    es.energies.resize(states.size());
    es.coeffs = Eigen::MatrixXd::Zero(2 * n_osc, states.size());
    for (int l = 0; l < int(states.size()); ++l) {
        es.energies[l] = l;
        for (const auto& [z, m, c] : states[l]) es.coeffs(spinboson::basis_index(z, m), l) = c;
        const double norm = es.coeffs.col(l).norm();
        if (norm == 0.0) throw std::invalid_argument("artificial_eigensystem: zero column");
        es.coeffs.col(l) /= norm;
    }
    return es;
}

}  // namespace support
