#pragma once

#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nanobot/config.hpp"
#include "nanobot/engine.hpp"
#include "nanobot/environment.hpp"
#include "nanobot/field.hpp"
#include "nanobot/io.hpp"

namespace nanobot::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2 };

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

struct TrainOptions {
    std::string out_dir;
    int replicates = 1;
    bool timing = false;
};

struct RunOptions {
    std::string out_dir;
    std::string qtable_path;
    std::uint64_t episode = 0;
    bool timing = false;
};

struct HeatmapOptions {
    std::string plane = "XY";
    std::optional<double> slice;
    int resolution = 50;
    std::string out_path;
};

/// Config file load with the CLI seed override applied (flag > file > default 0).
/// A missing or unreadable config file is a configuration error, not an I/O one.
inline SimConfig effective_config(const CommonOptions& common) {
    std::string text;
    try {
        text = read_file(common.config_path);
    } catch (const IoError& e) {
        throw ConfigError("", std::string("cannot read config file ") + e.what());
    }
    SimConfig config = parse_config(text);
    if (common.seed) config.seed = *common.seed;
    return config;
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(dir, ec.message());
}

/// Timings are hardware-dependent; they are only written when asked for so that
/// identical inputs give identical files.
inline void strip_timing(EpisodeMetrics& m, bool keep) {
    if (!keep) m.wall_clock_seconds = 0.0;
}

inline nlohmann::json train_one(const SimConfig& config, const std::filesystem::path& out_dir, bool quiet,
                                bool timing) {
    ensure_dir(out_dir);
    ProgressFn progress;
    if (!quiet) {
        progress = [&](int k, const EpisodeMetrics& m, double eps) {
            if ((k + 1) % 25 == 0 || k + 1 == config.episodes)
                std::cerr << "[seed " << config.seed << "] episode " << (k + 1) << "/" << config.episodes
                          << " steps=" << m.total_steps << " eps=" << format_sig9(eps) << "\n";
        };
    }
    TrainingReport report = run_training(config, progress);
    for (auto& m : report.episodes) strip_timing(m, timing);

    write_file(out_dir / "config.json", emit_config(config));
    write_metrics(report, config, out_dir / "report.json");
    for (std::size_t i = 0; i < report.tables.size(); ++i) {
        const auto name = i == 0 ? std::string("qtable.csv") : "qtable_robot" + std::to_string(i) + ".csv";
        write_qtable(report.tables[i], out_dir / name);
    }
    write_trace(report.last_trace, out_dir / "trace.csv");

    int captured = 0;
    for (auto t : report.terminations) captured += t == Termination::AllCaptured ? 1 : 0;
    nlohmann::json summary;
    summary["seed"] = config.seed;
    summary["out_dir"] = out_dir.generic_string();
    summary["episodes"] = config.episodes;
    summary["captured_episodes"] = captured;
    summary["final_epsilon"] = report.epsilons.empty() ? config.epsilon0 : report.epsilons.back();
    return summary;
}

inline int cmd_train(const CommonOptions& common, const TrainOptions& opt) {
    const SimConfig base = effective_config(common);
    nlohmann::json summary;
    summary["command"] = "train";
    if (opt.replicates <= 1) {
        summary["runs"] = nlohmann::json::array({train_one(base, opt.out_dir, common.quiet, opt.timing)});
    } else {
        // Replicates are isolated jobs: seed, seed+1, ..., each in its own subdirectory.
        std::vector<std::future<nlohmann::json>> jobs;
        for (int r = 0; r < opt.replicates; ++r) {
            SimConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(r);
            const auto dir = std::filesystem::path(opt.out_dir) / ("seed_" + std::to_string(cfg.seed));
            jobs.push_back(std::async(std::launch::async, [cfg, dir, &common, &opt] {
                return train_one(cfg, dir, common.quiet, opt.timing);
            }));
        }
        summary["runs"] = nlohmann::json::array();
        for (auto& j : jobs) summary["runs"].push_back(j.get());
    }
    std::cout << summary.dump() << std::endl;
    return kOk;
}

inline int cmd_run(const CommonOptions& common, const RunOptions& opt) {
    const SimConfig config = effective_config(common);
    const std::filesystem::path out_dir(opt.out_dir);
    ensure_dir(out_dir);

    std::vector<QTable> tables = make_tables(config);
    if (!opt.qtable_path.empty()) tables = {read_qtable(opt.qtable_path)};

    auto result = run_evaluation(config, tables, opt.episode);
    strip_timing(result.metrics, opt.timing);
    if (!common.quiet)
        std::cerr << "episode finished: " << to_string(result.trace.termination)
                  << " after " << result.metrics.total_steps << " steps\n";

    write_file(out_dir / "config.json", emit_config(config));
    write_trace(result.trace, out_dir / "trace.csv");
    write_metrics(result.metrics, result.trace.termination, config, out_dir / "metrics.json");

    nlohmann::json summary = metrics_to_json(result.metrics);
    summary["command"] = "run";
    summary["seed"] = config.seed;
    summary["termination"] = to_string(result.trace.termination);
    std::cout << summary.dump() << std::endl;
    return kOk;
}

inline int cmd_heatmap(const CommonOptions& common, const HeatmapOptions& opt) {
    const SimConfig config = effective_config(common);
    Plane plane;
    try {
        plane = parse_plane(opt.plane);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("plane", e.what());
    }
    // The world of training episode 0 for this seed.
    const Environment env = training_environment(config, 0);
    const auto sources = env.alive_sources();
    const double slice = opt.slice.value_or(config.side / 2.0);
    HeatmapGrid grid;
    try {
        grid = sample_heatmap(sources, config.field_model, plane, slice, config.side, opt.resolution, config.d_min);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("heatmap", e.what());
    }
    const std::filesystem::path out(opt.out_path);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_heatmap(grid, out);

    nlohmann::json summary;
    summary["command"] = "heatmap";
    summary["seed"] = config.seed;
    summary["plane"] = to_string(plane);
    summary["slice"] = slice;
    summary["resolution"] = opt.resolution;
    summary["out"] = out.generic_string();
    auto cells = nlohmann::json::array();
    for (const auto& c : env.cells()) cells.push_back({c.position.x, c.position.y, c.position.z});
    summary["cells"] = std::move(cells);
    std::cout << summary.dump() << std::endl;
    return kOk;
}

/// Entry point. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, const std::string& program = "nanobot_sim") {
    CLI::App app{"Nanorobot navigation simulator: Q-learning over biomarker fields", program};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "Flat JSON config file")->required();
        sub->add_option("--seed", common.seed, "Override the config's master seed");
        sub->add_flag("--quiet", common.quiet, "Suppress progress output");
    };

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train a Q-table over many episodes");
    add_common(train_cmd);
    train_cmd->add_option("--out-dir", train.out_dir, "Output directory")->required();
    train_cmd->add_option("--replicates", train.replicates, "Independent runs on consecutive seeds")
        ->check(CLI::PositiveNumber);
    train_cmd->add_flag("--timing", train.timing, "Record wall-clock seconds in the metrics");

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run one greedy evaluation episode");
    add_common(run_cmd);
    run_cmd->add_option("--qtable", run.qtable_path, "Q-table to load (default: all-zero table)");
    run_cmd->add_option("--out-dir", run.out_dir, "Output directory")->required();
    run_cmd->add_option("--episode", run.episode, "Evaluation episode index");
    run_cmd->add_flag("--timing", run.timing, "Record wall-clock seconds in the metrics");

    HeatmapOptions heat;
    auto* heat_cmd = app.add_subcommand("heatmap", "Sample the concentration field on a plane");
    add_common(heat_cmd);
    heat_cmd->add_option("--plane", heat.plane, "XY, XZ or YZ");
    heat_cmd->add_option("--slice", heat.slice, "Fixed third coordinate (default: side/2)");
    heat_cmd->add_option("--resolution", heat.resolution, "Cells per axis");
    heat_cmd->add_option("--out", heat.out_path, "Output CSV path")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kConfigError;
    }

    try {
        if (*train_cmd) return cmd_train(common, train);
        if (*run_cmd) return cmd_run(common, run);
        return cmd_heatmap(common, heat);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InfeasibleConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    }
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, argc > 0 ? std::filesystem::path(argv[0]).filename().string() : "nanobot_sim");
}

}  // namespace nanobot::cli
