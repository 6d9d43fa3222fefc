// pipeline.hpp — orchestration: build → diagonalize → analyze → emit.
// Every emitted file is deterministic for a given configuration.

#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinboson/absorption.hpp"
#include "spinboson/adiabatic.hpp"
#include "spinboson/config.hpp"
#include "spinboson/io.hpp"
#include "spinboson/model.hpp"
#include "spinboson/phase_analysis.hpp"
#include "spinboson/spectrum.hpp"

namespace spinboson {

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_name(stage) {}
    std::string stage_name;
};

enum class Stage {
    spectrum,
    bloch,
    adiabatic,
    husimi,
    absorption,
    ratio,
    convergence,
};

inline const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages = {Stage::spectrum,   Stage::bloch,
                                              Stage::adiabatic,  Stage::husimi,
                                              Stage::absorption, Stage::ratio,
                                              Stage::convergence};
    return stages;
}

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::spectrum: return "spectrum";
        case Stage::bloch: return "bloch";
        case Stage::adiabatic: return "adiabatic";
        case Stage::husimi: return "husimi";
        case Stage::absorption: return "absorption";
        case Stage::ratio: return "ratio";
        case Stage::convergence: return "convergence";
    }
    return "?";
}

struct ManifestEntry {
    std::string name;
    std::string sha256;
};

struct Manifest {
    std::vector<ManifestEntry> entries;  // sorted by file name
};

struct PipelineOptions {
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> cache_dir;
};

namespace detail {

// File-name-safe rendering of a double: '.' -> 'p', '-' -> 'm'.
inline std::string number_tag(double x) {
    std::string s = format_double(x);
    for (char& c : s) {
        if (c == '.') c = 'p';
        if (c == '-') c = 'm';
        if (c == '+') c = '_';
    }
    return s;
}

inline std::string optical_tag(const OpticalParams& o) {
    return "mu" + number_tag(o.mu1) + "_" + number_tag(o.mu2);
}

class Emitter {
public:
    explicit Emitter(const std::filesystem::path& dir) : dir_(dir) {
        std::filesystem::create_directories(dir);
    }

    void emit(const std::string& name, std::string_view content) {
        write_text_file(dir_ / name, content);
        names_.push_back(name);
        hashes_.push_back(sha256_hex(content));
    }

    // Removes everything emitted so far; used when a stage fails.
    void rollback() {
        for (const std::string& name : names_) {
            std::error_code ec;
            std::filesystem::remove(dir_ / name, ec);
        }
        names_.clear();
        hashes_.clear();
    }

    Manifest manifest() const {
        Manifest m;
        m.entries.reserve(names_.size());
        for (std::size_t i = 0; i < names_.size(); ++i)
            m.entries.push_back({names_[i], hashes_[i]});
        std::sort(m.entries.begin(), m.entries.end(),
                  [](const ManifestEntry& a, const ManifestEntry& b) { return a.name < b.name; });
        return m;
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_;
    std::vector<std::string> hashes_;
};

inline std::string manifest_text(const Manifest& m) {
    std::string out;
    for (const ManifestEntry& e : m.entries) out += e.sha256 + "  " + e.name + "\n";
    return out;
}

inline std::filesystem::path cache_entry_dir(const std::filesystem::path& cache_root,
                                             const ModelParams& m, const BasisSpec& b) {
    return cache_root / fnv1a64_hex(canonical_params(m, b));
}

// Cache-aware eigensystem access.
inline EigenSystem obtain_eigensystem(const RunConfig& cfg, const PipelineOptions& opts) {
    if (opts.cache_dir) {
        const auto entry = cache_entry_dir(*opts.cache_dir, cfg.model, cfg.basis);
        if (auto es = try_load_eigensystem(entry, cfg.model, cfg.basis)) return std::move(*es);
        EigenSystem es = solve_eigensystem(cfg.model, cfg.basis);
        save_eigensystem(es, entry);
        return es;
    }
    return solve_eigensystem(cfg.model, cfg.basis);
}

inline std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

inline std::string orbit_to_csv(const std::vector<Orbit>& orbits, const std::string& provenance,
                                int lambda, double energy) {
    std::string out = "# classical orbits lambda=" + std::to_string(lambda) +
                      " energy=" + format_double(energy) + "\n# params " + provenance + "\nQ,P\n";
    for (const Orbit& orbit : orbits)
        for (std::size_t c = 0; c < orbit.components.size(); ++c) {
            out += "# branch=" + std::string(branch_name(orbit.branch)) +
                   " component=" + std::to_string(c) + "\n";
            for (const PhasePoint& pt : orbit.components[c])
                out += format_double(pt.q) + "," + format_double(pt.p_mom) + "\n";
        }
    return out;
}

}  // namespace detail

namespace detail {

// Stage runner shared by run_stages, run_pipeline, and sweep; `preloaded`
// skips the eigensystem computation when the caller already has it.
inline Manifest run_stages_impl(const RunConfig& cfg, const PipelineOptions& opts,
                                const std::vector<Stage>& stages,
                                const EigenSystem* preloaded) {
    cfg.validate();
    detail::Emitter emitter(opts.out_dir);
    const std::string provenance = canonical_params(cfg.model, cfg.basis);
    const bool need_eigensystem =
        std::any_of(stages.begin(), stages.end(), [](Stage s) { return s != Stage::adiabatic; });

    try {
        std::optional<EigenSystem> storage;
        const EigenSystem* es = preloaded;
        if (need_eigensystem && es == nullptr) {
            try {
                storage = detail::obtain_eigensystem(cfg, opts);
            } catch (const std::exception& e) {
                throw StageError("spectrum", e.what());
            }
            es = &*storage;
        }

        for (Stage stage : stages) {
            try {
                switch (stage) {
                    case Stage::spectrum: {
                        std::string out = "# eigenstate energies\n# params " + provenance +
                                          "\nlambda,energy\n";
                        for (int l = 0; l < es->keep(); ++l)
                            out += std::to_string(l) + "," + format_double(es->energies[l]) + "\n";
                        emitter.emit("energies.csv", out);
                        break;
                    }
                    case Stage::bloch: {
                        std::string out =
                            "# bloch projections\n# params " + provenance + "\nlambda,energy,x\n";
                        for (const BlochPoint& pt : bloch_scan(*es))
                            out += std::to_string(pt.lambda) + "," + format_double(pt.energy) +
                                   "," + format_double(pt.x) + "\n";
                        emitter.emit("bloch.csv", out);
                        break;
                    }
                    case Stage::adiabatic: {
                        double q_lo, q_hi;
                        if (cfg.potential_window) {
                            q_lo = cfg.potential_window->first;
                            q_hi = cfg.potential_window->second;
                        } else {
                            const FranckCondonEnergies fc = franck_condon_energies(cfg.model);
                            const double bound = detail::orbit_q_bound(
                                cfg.model, fc.e_upper + 5.0 * cfg.model.r);
                            q_lo = -bound;
                            q_hi = bound;
                        }
                        std::string out = "# adiabatic potentials\n# params " + provenance +
                                          "\nQ,U_minus,U_plus\n";
                        for (int i = 0; i < cfg.potential_points; ++i) {
                            const double q =
                                q_lo + (q_hi - q_lo) * double(i) / (cfg.potential_points - 1);
                            const AdiabaticPotentials u = adiabatic_potentials(cfg.model, q);
                            out += format_double(q) + "," + format_double(u.u_minus) + "," +
                                   format_double(u.u_plus) + "\n";
                        }
                        emitter.emit("adiabatic_potentials.csv", out);

                        const FranckCondonEnergies fc = franck_condon_energies(cfg.model);
                        emitter.emit("franck_condon.csv",
                                     "# franck-condon energies\n# params " + provenance +
                                         "\nbranch,energy\nlower," + format_double(fc.e_lower) +
                                         "\nupper," + format_double(fc.e_upper) + "\n");
                        break;
                    }
                    case Stage::husimi: {
                        for (int l : cfg.husimi_states) {
                            const double energy = es->energies[l];
                            HusimiWindow window;
                            if (auto it = cfg.husimi_window_by_state.find(l);
                                it != cfg.husimi_window_by_state.end())
                                window = it->second;
                            else if (cfg.husimi_window)
                                window = *cfg.husimi_window;
                            else
                                window = auto_husimi_window(cfg.model, energy);
                            const HusimiGrid grid = husimi_grid(*es, l, window, cfg.husimi_nq,
                                                                cfg.husimi_np, cfg.husimi_spin);
                            emitter.emit("husimi_" + std::to_string(l) + ".csv",
                                         grid_to_csv(grid, provenance));
                            emitter.emit("husimi_" + std::to_string(l) + ".pgm",
                                         grid_to_pgm16(grid));
                            std::vector<Orbit> orbits;
                            for (Branch b : {Branch::lower, Branch::upper}) {
                                try {
                                    orbits.push_back(
                                        classical_orbit(cfg.model, b, energy, cfg.orbit_points));
                                } catch (const EmptyOrbitError&) {
                                    // energy below this branch; no overlay
                                }
                            }
                            emitter.emit("orbit_" + std::to_string(l) + ".csv",
                                         detail::orbit_to_csv(orbits, provenance, l, energy));
                        }
                        break;
                    }
                    case Stage::absorption: {
                        const BandWindows bands =
                            default_band_windows(cfg.model, cfg.band_halfwidth_quanta);
                        for (const OpticalParams& o : cfg.optical_settings) {
                            const StickSpectrum lower =
                                stick_spectrum(*es, o, bands.lower_min, bands.lower_max);
                            const StickSpectrum upper =
                                stick_spectrum(*es, o, bands.upper_min, bands.upper_max);
                            std::set<int> seen;
                            std::string out = "# absorption stick spectrum mu1=" +
                                              format_double(o.mu1) +
                                              " mu2=" + format_double(o.mu2) + "\n# params " +
                                              provenance + "\n# lower band [" +
                                              format_double(bands.lower_min) + "," +
                                              format_double(bands.lower_max) + "] upper band [" +
                                              format_double(bands.upper_min) + "," +
                                              format_double(bands.upper_max) +
                                              "]\nlambda,energy,strength\n";
                            for (const StickSpectrum* s : {&lower, &upper})
                                for (const SpectralLine& line : s->lines)
                                    if (seen.insert(line.lambda).second)
                                        out += std::to_string(line.lambda) + "," +
                                               format_double(line.energy) + "," +
                                               format_double(line.strength) + "\n";
                            emitter.emit("absorption_" + detail::optical_tag(o) + ".csv", out);
                        }
                        break;
                    }
                    case Stage::ratio: {
                        std::string out = "# spin ratio c_down0/c_up0\n# params " + provenance +
                                          "\nlambda,energy,ratio,defined\n";
                        for (const RatioPoint& pt : spin_ratio_curve(*es).points) {
                            out += std::to_string(pt.lambda) + "," + format_double(pt.energy) +
                                   ",";
                            if (pt.ratio)
                                out += format_double(*pt.ratio) + ",1\n";
                            else
                                out += ",0\n";
                        }
                        emitter.emit("ratio.csv", out);
                        break;
                    }
                    case Stage::convergence: {
                        const ConvergenceReport rep = convergence_check(
                            cfg.model, cfg.basis, cfg.convergence_tolerance);
                        emitter.emit(
                            "convergence.csv",
                            "# truncation convergence\n# params " + provenance +
                                "\nn_osc_small,n_osc_large,keep,max_abs_shift,tolerance,"
                                "converged\n" +
                                std::to_string(rep.n_osc_small) + "," +
                                std::to_string(rep.n_osc_large) + "," +
                                std::to_string(cfg.basis.keep) + "," +
                                format_double(rep.max_abs_shift) + "," +
                                format_double(cfg.convergence_tolerance) + "," +
                                (rep.converged ? "1" : "0") + "\n");
                        break;
                    }
                }
            } catch (const StageError&) {
                throw;
            } catch (const std::exception& e) {
                throw StageError(stage_name(stage), e.what());
            }
        }
    } catch (...) {
        emitter.rollback();
        throw;
    }
    return emitter.manifest();
}

}  // namespace detail

// Runs the requested stages into opts.out_dir. On a stage failure all
// partial outputs of this invocation are removed and a StageError carrying
// the stage name is thrown. The stages share one eigensystem, computed or
// loaded from the cache up front.
inline Manifest run_stages(const RunConfig& cfg, const PipelineOptions& opts,
                           const std::vector<Stage>& stages) {
    return detail::run_stages_impl(cfg, opts, stages, nullptr);
}

// Full pipeline: every stage plus the checksum manifest.
inline Manifest run_pipeline(const RunConfig& cfg, const PipelineOptions& opts) {
    Manifest manifest = run_stages(cfg, opts, all_stages());
    try {
        write_text_file(opts.out_dir / "manifest.txt", detail::manifest_text(manifest));
    } catch (const std::exception& e) {
        throw StageError("manifest", e.what());
    }
    return manifest;
}

// ---------------------------------- sweep ------------------------------------

struct SweepResult {
    double value{0.0};
    std::string directory;
    std::string error;  // empty on success
    Manifest manifest;
};

namespace detail {

inline RunConfig apply_sweep_value(const RunConfig& base, SweepAxis axis, double value) {
    RunConfig cfg = base;
    cfg.sweep_axis.reset();
    cfg.sweep_values.clear();
    switch (axis) {
        case SweepAxis::p: cfg.model.p = value; break;
        case SweepAxis::r: cfg.model.r = value; break;
        case SweepAxis::eps_minus: cfg.model.eps_minus = value; break;
        case SweepAxis::mu_ratio: {
            // value = mu2/mu1; the inf sentinel selects (0, 1)
            const OpticalParams o =
                std::isinf(value) ? OpticalParams{0.0, 1.0} : OpticalParams{1.0, value};
            cfg.optical = o;
            cfg.optical_settings = {o};
            break;
        }
    }
    return cfg;
}

struct BandAggregate {
    double total{0.0};
    double mean_energy{0.0};
    bool have_mean{false};
};

inline BandAggregate aggregate_band(const StickSpectrum& s) {
    BandAggregate agg;
    double weighted = 0.0;
    for (const SpectralLine& line : s.lines) {
        agg.total += line.strength;
        weighted += line.strength * line.energy;
    }
    if (agg.total > 0.0) {
        agg.mean_energy = weighted / agg.total;
        agg.have_mean = true;
    }
    return agg;
}

}  // namespace detail

// Runs the full pipeline once per sweep value into a subdirectory of
// opts.out_dir; failures are recorded per value and the sweep continues.
// A band-level summary (total strength and strength-weighted mean energy
// per optical setting) is written to sweep_summary.csv.
inline std::vector<SweepResult> sweep(const RunConfig& cfg, const PipelineOptions& opts) {
    cfg.validate();
    if (!cfg.sweep_axis) throw std::invalid_argument("sweep: config has no sweep_axis");
    const SweepAxis axis = *cfg.sweep_axis;
    std::filesystem::create_directories(opts.out_dir);

    std::vector<SweepResult> results;
    std::string summary =
        "# sweep summary axis=" + std::string(sweep_axis_name(axis)) +
        "\naxis,value,status,mu1,mu2,band,total_strength,mean_energy\n";
    for (double value : cfg.sweep_values) {
        SweepResult result;
        result.value = value;
        const std::string sub =
            std::string(sweep_axis_name(axis)) + "_" + detail::number_tag(value);
        result.directory = sub;
        PipelineOptions sub_opts{opts.out_dir / sub, opts.cache_dir};
        try {
            const RunConfig cfg_v = detail::apply_sweep_value(cfg, axis, value);
            cfg_v.validate();
            const EigenSystem es = detail::obtain_eigensystem(cfg_v, sub_opts);
            result.manifest = detail::run_stages_impl(cfg_v, sub_opts, all_stages(), &es);
            write_text_file(sub_opts.out_dir / "manifest.txt",
                            detail::manifest_text(result.manifest));

            const BandWindows bands =
                default_band_windows(cfg_v.model, cfg_v.band_halfwidth_quanta);
            for (const OpticalParams& o : cfg_v.optical_settings) {
                const auto lower = detail::aggregate_band(
                    stick_spectrum(es, o, bands.lower_min, bands.lower_max));
                const auto upper = detail::aggregate_band(
                    stick_spectrum(es, o, bands.upper_min, bands.upper_max));
                for (const auto& [band, agg] :
                     {std::pair<const char*, detail::BandAggregate>{"lower", lower},
                      {"upper", upper}}) {
                    summary += std::string(sweep_axis_name(axis)) + "," + format_double(value) +
                               ",ok," + format_double(o.mu1) + "," + format_double(o.mu2) + "," +
                               band + "," + format_double(agg.total) + ",";
                    if (agg.have_mean) summary += format_double(agg.mean_energy);
                    summary += "\n";
                }
            }
        } catch (const std::exception& e) {
            result.error = e.what();
            summary += std::string(sweep_axis_name(axis)) + "," + format_double(value) +
                       ",error:" + detail::csv_safe(e.what()) + ",,,,,\n";
        }
        results.push_back(std::move(result));
    }
    write_text_file(opts.out_dir / "sweep_summary.csv", summary);
    return results;
}

}  // namespace spinboson
