// spinboson CLI — builds the spin-boson eigensystem and emits the analysis
// data products (energies, Bloch scans, adiabatic potentials, Husimi grids
// with orbit overlays, absorption stick spectra, spin-ratio curves) as CSV
// and PGM files.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "spinboson/spinboson.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string cache_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key=value configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (default: out)");
    cmd->add_option("--cache", args.cache_dir, "eigensystem cache directory");
}

spinboson::RunConfig load_config(const CommonArgs& args) {
    std::string text;
    if (!args.config_path.empty()) text = spinboson::read_text_file(args.config_path);
    return spinboson::parse_config(text);
}

spinboson::PipelineOptions make_options(const CommonArgs& args) {
    spinboson::PipelineOptions opts;
    opts.out_dir = args.out_dir;
    if (!args.cache_dir.empty()) opts.cache_dir = args.cache_dir;
    return opts;
}

void print_manifest(const spinboson::Manifest& manifest, const std::filesystem::path& dir) {
    for (const auto& entry : manifest.entries)
        std::cout << (dir / entry.name).string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-boson dimer eigenstate analysis and absorption spectra"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        CommonArgs args;
        std::vector<spinboson::Stage> stages;
    };
    std::vector<Sub> subs;
    subs.reserve(8);  // option callbacks hold pointers into the elements
    const auto add_stage_command = [&](const char* name, const char* description,
                                       std::vector<spinboson::Stage> stages) {
        subs.push_back({app.add_subcommand(name, description), {}, std::move(stages)});
        add_common(subs.back().cmd, subs.back().args);
    };

    add_stage_command("spectrum", "diagonalize and emit energies.csv",
                      {spinboson::Stage::spectrum});
    add_stage_command("bloch", "emit bloch.csv projections", {spinboson::Stage::bloch});
    add_stage_command("adiabatic", "emit adiabatic_potentials.csv and franck_condon.csv",
                      {spinboson::Stage::adiabatic});
    add_stage_command("husimi", "emit husimi_<l>.csv/.pgm and orbit_<l>.csv",
                      {spinboson::Stage::husimi});
    add_stage_command("absorb", "emit absorption_<tag>.csv per optical setting",
                      {spinboson::Stage::absorption});
    add_stage_command("ratio", "emit ratio.csv spin-ratio curve", {spinboson::Stage::ratio});

    CommonArgs all_args;
    CLI::App* cmd_all =
        app.add_subcommand("all", "run the full pipeline and write a checksum manifest");
    add_common(cmd_all, all_args);

    CommonArgs sweep_args;
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "run the full pipeline per sweep value into subdirectories");
    add_common(cmd_sweep, sweep_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_all->parsed()) {
            const auto cfg = load_config(all_args);
            const auto opts = make_options(all_args);
            const auto manifest = spinboson::run_pipeline(cfg, opts);
            print_manifest(manifest, opts.out_dir);
            std::cout << (opts.out_dir / "manifest.txt").string() << "\n";
            return 0;
        }
        if (cmd_sweep->parsed()) {
            const auto cfg = load_config(sweep_args);
            const auto opts = make_options(sweep_args);
            const auto results = spinboson::sweep(cfg, opts);
            bool any_error = false;
            for (const auto& result : results) {
                if (result.error.empty()) {
                    std::cout << (opts.out_dir / result.directory).string() << "\n";
                } else {
                    std::cerr << "sweep value " << spinboson::format_double(result.value)
                              << " failed: " << result.error << "\n";
                    any_error = true;
                }
            }
            std::cout << (opts.out_dir / "sweep_summary.csv").string() << "\n";
            return any_error ? 1 : 0;
        }
        for (const Sub& sub : subs) {
            if (!sub.cmd->parsed()) continue;
            const auto cfg = load_config(sub.args);
            const auto opts = make_options(sub.args);
            const auto manifest = spinboson::run_stages(cfg, opts, sub.stages);
            print_manifest(manifest, opts.out_dir);
            return 0;
        }
    } catch (const spinboson::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const spinboson::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
