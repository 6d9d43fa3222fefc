// config.hpp — flat key=value run configuration: one assignment per line,
// '#' comments, unknown keys rejected, line-numbered errors

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinboson/absorption.hpp"
#include "spinboson/io.hpp"
#include "spinboson/model.hpp"
#include "spinboson/phase_analysis.hpp"

namespace spinboson {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepAxis { p, r, eps_minus, mu_ratio };

inline const char* sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::p: return "p";
        case SweepAxis::r: return "r";
        case SweepAxis::eps_minus: return "eps_minus";
        case SweepAxis::mu_ratio: return "mu_ratio";
    }
    return "?";
}

struct RunConfig {
    ModelParams model;                            // p=0, r=1, eps_plus=0, eps_minus=0
    BasisSpec basis;                              // n_osc=2000, keep=1100
    OpticalParams optical;                        // mu1=1, mu2=1
    std::vector<OpticalParams> optical_settings;  // defaults to {optical}

    std::vector<int> husimi_states;
    int husimi_nq{480};
    int husimi_np{200};
    std::optional<HusimiWindow> husimi_window;          // auto when absent
    std::map<int, HusimiWindow> husimi_window_by_state;  // per-state overrides
    SpinProjection husimi_spin{};                        // normalized; default (1,1)/sqrt(2)

    int orbit_points{2048};
    int potential_points{1024};
    std::optional<std::pair<double, double>> potential_window;  // auto when absent

    double band_halfwidth_quanta{5.0};
    double convergence_tolerance{1e-3};

    std::optional<SweepAxis> sweep_axis;
    std::vector<double> sweep_values;

    RunConfig() { husimi_spin = SpinProjection::normalized(1.0, 1.0); }

    void validate() const {
        model.validate();
        basis.validate();
        optical.validate();
        for (const OpticalParams& o : optical_settings) o.validate();
        for (int l : husimi_states)
            if (l < 0 || l >= basis.keep)
                throw ConfigError("husimi_states: index " + std::to_string(l) +
                                  " not below keep=" + std::to_string(basis.keep));
        for (const auto& [l, w] : husimi_window_by_state) {
            if (l < 0 || l >= basis.keep)
                throw ConfigError("husimi_window_" + std::to_string(l) +
                                  ": index not below keep");
            w.validate();
        }
        if (husimi_window) husimi_window->validate();
        if (husimi_nq < 2 || husimi_np < 2)
            throw ConfigError("husimi_nq/husimi_np: resolution must be >= 2");
        if (orbit_points < 8) throw ConfigError("orbit_points: must be >= 8");
        if (potential_points < 2) throw ConfigError("potential_points: must be >= 2");
        if (potential_window && !(potential_window->second > potential_window->first))
            throw ConfigError("potential_window: degenerate interval");
        if (!(band_halfwidth_quanta > 0.0))
            throw ConfigError("band_halfwidth_quanta: must be > 0");
        if (!(convergence_tolerance > 0.0))
            throw ConfigError("convergence_tolerance: must be > 0");
        if (sweep_axis && sweep_values.empty())
            throw ConfigError("sweep_values: required when sweep_axis is set");
        if (!sweep_axis && !sweep_values.empty())
            throw ConfigError("sweep_axis: required when sweep_values is set");
        for (double v : sweep_values) {
            if (std::isnan(v)) throw ConfigError("sweep_values: nan not allowed");
            if (std::isinf(v) && sweep_axis && *sweep_axis != SweepAxis::mu_ratio)
                throw ConfigError("sweep_values: inf only allowed for mu_ratio");
        }
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

inline double config_double(std::string_view value, int line_no, std::string_view key) {
    try {
        return parse_double(value);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": " + std::string(key) +
                          ": invalid number '" + std::string(value) + "'");
    }
}

inline int config_int(std::string_view value, int line_no, std::string_view key) {
    try {
        const long long v = parse_int(value);
        if (v < int(-2e9) || v > int(2e9)) throw std::out_of_range("range");
        return int(v);
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": " + std::string(key) +
                          ": invalid integer '" + std::string(value) + "'");
    }
}

inline HusimiWindow config_window(std::string_view value, int line_no, std::string_view key) {
    const auto parts = split(value, ',');
    if (parts.size() != 4)
        throw ConfigError("line " + std::to_string(line_no) + ": " + std::string(key) +
                          ": expected q_min,q_max,p_min,p_max");
    return {config_double(parts[0], line_no, key), config_double(parts[1], line_no, key),
            config_double(parts[2], line_no, key), config_double(parts[3], line_no, key)};
}

inline OpticalParams config_optical_pair(std::string_view value, int line_no,
                                         std::string_view key) {
    const auto parts = split(value, ':');
    if (parts.size() != 2)
        throw ConfigError("line " + std::to_string(line_no) + ": " + std::string(key) +
                          ": expected mu1:mu2");
    return {config_double(parts[0], line_no, key), config_double(parts[1], line_no, key)};
}

}  // namespace detail

// Parses the documented flat key=value format. Omitted keys take the
// documented defaults; unknown and duplicate keys are rejected with their
// line number.
inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    bool optical_settings_given = false;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

        if (key == "p")
            cfg.model.p = detail::config_double(value, line_no, key);
        else if (key == "r")
            cfg.model.r = detail::config_double(value, line_no, key);
        else if (key == "eps_plus")
            cfg.model.eps_plus = detail::config_double(value, line_no, key);
        else if (key == "eps_minus")
            cfg.model.eps_minus = detail::config_double(value, line_no, key);
        else if (key == "n_osc")
            cfg.basis.n_osc = detail::config_int(value, line_no, key);
        else if (key == "keep")
            cfg.basis.keep = detail::config_int(value, line_no, key);
        else if (key == "mu1")
            cfg.optical.mu1 = detail::config_double(value, line_no, key);
        else if (key == "mu2")
            cfg.optical.mu2 = detail::config_double(value, line_no, key);
        else if (key == "optical_settings") {
            optical_settings_given = true;
            cfg.optical_settings.clear();
            for (const auto part : detail::split(value, ';'))
                cfg.optical_settings.push_back(detail::config_optical_pair(part, line_no, key));
            if (cfg.optical_settings.empty())
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": optical_settings: empty list");
        } else if (key == "husimi_states") {
            for (const auto part : detail::split(value, ','))
                if (!part.empty()) cfg.husimi_states.push_back(detail::config_int(part, line_no, key));
        } else if (key == "husimi_nq")
            cfg.husimi_nq = detail::config_int(value, line_no, key);
        else if (key == "husimi_np")
            cfg.husimi_np = detail::config_int(value, line_no, key);
        else if (key == "husimi_window")
            cfg.husimi_window = detail::config_window(value, line_no, key);
        else if (key.rfind("husimi_window_", 0) == 0) {
            const int state = detail::config_int(key.substr(14), line_no, key);
            cfg.husimi_window_by_state[state] = detail::config_window(value, line_no, key);
        } else if (key == "husimi_spin") {
            const OpticalParams pair = detail::config_optical_pair(value, line_no, key);
            try {
                cfg.husimi_spin = SpinProjection::normalized(pair.mu1, pair.mu2);
            } catch (const std::exception&) {
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": husimi_spin: zero norm");
            }
        } else if (key == "orbit_points")
            cfg.orbit_points = detail::config_int(value, line_no, key);
        else if (key == "potential_points")
            cfg.potential_points = detail::config_int(value, line_no, key);
        else if (key == "potential_window") {
            const auto parts = detail::split(value, ',');
            if (parts.size() != 2)
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": potential_window: expected q_min,q_max");
            cfg.potential_window = {detail::config_double(parts[0], line_no, key),
                                    detail::config_double(parts[1], line_no, key)};
        } else if (key == "band_halfwidth_quanta")
            cfg.band_halfwidth_quanta = detail::config_double(value, line_no, key);
        else if (key == "convergence_tolerance")
            cfg.convergence_tolerance = detail::config_double(value, line_no, key);
        else if (key == "sweep_axis") {
            if (value == "p")
                cfg.sweep_axis = SweepAxis::p;
            else if (value == "r")
                cfg.sweep_axis = SweepAxis::r;
            else if (value == "eps_minus")
                cfg.sweep_axis = SweepAxis::eps_minus;
            else if (value == "mu_ratio")
                cfg.sweep_axis = SweepAxis::mu_ratio;
            else
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": sweep_axis: must be one of p, r, eps_minus, mu_ratio");
        } else if (key == "sweep_values") {
            for (const auto part : detail::split(value, ','))
                if (!part.empty()) cfg.sweep_values.push_back(detail::config_double(part, line_no, key));
        } else
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!optical_settings_given) cfg.optical_settings = {cfg.optical};
    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace spinboson
