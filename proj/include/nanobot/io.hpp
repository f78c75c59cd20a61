#pragma once

#include <array>
#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nanobot/agent.hpp"
#include "nanobot/config.hpp"
#include "nanobot/engine.hpp"
#include "nanobot/field.hpp"

namespace nanobot {

/// File-system failure. The message names the path and the cause.
class IoError : public std::runtime_error {
  public:
    IoError(const std::filesystem::path& path, const std::string& cause)
        : std::runtime_error(path.string() + ": " + cause), path_(path) {}

    const std::filesystem::path& path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Number formatting. std::to_chars is locale-independent, so '.' is always the
// decimal separator.

/// 9 significant digits, shortest of fixed/scientific.
inline std::string format_sig9(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 9);
    return std::string(buf.data(), end);
}

/// Shortest representation that parses back to exactly `v`.
inline std::string format_exact(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

template <class Int>
Int parse_integer(std::string_view s) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, std::string("cannot open for reading: ") + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, std::string("cannot open for writing: ") + std::strerror(errno));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Config (flat JSON)

inline std::string_view to_string(FieldModel m) { return m == FieldModel::Gaussian ? "gaussian" : "inverse_square"; }
inline std::string_view to_string(RewardMode m) { return m == RewardMode::Proportional ? "proportional" : "flat"; }

inline nlohmann::json config_to_json(const SimConfig& c) {
    nlohmann::json j;
    j["side"] = c.side;
    j["cell_count"] = c.cell_count;
    j["obstacle_count"] = c.obstacle_count;
    j["obstacle_radius_range"] = {c.obstacle_radius_min, c.obstacle_radius_max};
    j["cell_step"] = c.cell_step;
    j["confinement_radius"] = c.confinement_radius;
    j["field_model"] = to_string(c.field_model);
    j["sigma"] = c.sigma;
    j["peak"] = c.peak;
    j["strength"] = c.strength;
    j["d_min"] = c.d_min;
    j["sensing_radius"] = c.sensing_radius;
    j["obstacle_alert_radius"] = c.obstacle_alert_radius;
    j["step_size"] = c.step_size;
    j["capture_threshold"] = c.capture_threshold;
    j["concentration_bins"] = c.concentration_bins;
    j["concentration_decades"] = c.concentration_decades;
    j["gradient_epsilon"] = c.gradient_epsilon;
    j["max_steps"] = c.max_steps;
    j["episodes"] = c.episodes;
    j["alpha"] = c.alpha;
    j["gamma"] = c.gamma;
    j["epsilon0"] = c.epsilon0;
    j["decay"] = c.decay;
    j["epsilon_min"] = c.epsilon_min;
    j["reward_mode"] = to_string(c.reward_mode);
    j["seed"] = c.seed;
    j["robot_count"] = c.robot_count;
    j["shared_qtable"] = c.shared_qtable;
    j["randomize_world"] = c.randomize_world;
    return j;
}

inline std::string emit_config(const SimConfig& c) { return config_to_json(c).dump(2) + "\n"; }

namespace detail {

inline double get_real(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

inline int get_int(const nlohmann::json& v, const std::string& key) {
    if (v.is_number_integer()) {
        const auto i = v.get<std::int64_t>();
        if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
            throw ConfigError(key, "integer out of range");
        return static_cast<int>(i);
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 2e9) return static_cast<int>(d);
    }
    throw ConfigError(key, "expected an integer");
}

inline std::uint64_t get_seed(const nlohmann::json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) throw ConfigError(key, "must be >= 0");
    throw ConfigError(key, "expected a non-negative integer");
}

inline std::string get_string(const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

}  // namespace detail

/// Parse a flat JSON config. Omitted keys keep their defaults; unknown keys,
/// wrong types and out-of-range values raise ConfigError naming the key.
inline SimConfig parse_config(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");

    using namespace detail;
    SimConfig c;
    for (const auto& [key, v] : doc.items()) {
        if (key == "side") c.side = get_real(v, key);
        else if (key == "cell_count") c.cell_count = get_int(v, key);
        else if (key == "obstacle_count") c.obstacle_count = get_int(v, key);
        else if (key == "obstacle_radius_range") {
            if (!v.is_array() || v.size() != 2) throw ConfigError(key, "expected [min, max]");
            c.obstacle_radius_min = get_real(v[0], key);
            c.obstacle_radius_max = get_real(v[1], key);
        } else if (key == "cell_step") c.cell_step = get_real(v, key);
        else if (key == "confinement_radius") c.confinement_radius = get_real(v, key);
        else if (key == "field_model") {
            const auto s = get_string(v, key);
            if (s == "gaussian") c.field_model = FieldModel::Gaussian;
            else if (s == "inverse_square") c.field_model = FieldModel::InverseSquare;
            else throw ConfigError(key, "expected \"gaussian\" or \"inverse_square\"");
        } else if (key == "sigma") c.sigma = get_real(v, key);
        else if (key == "peak") c.peak = get_real(v, key);
        else if (key == "strength") c.strength = get_real(v, key);
        else if (key == "d_min") c.d_min = get_real(v, key);
        else if (key == "sensing_radius") c.sensing_radius = get_real(v, key);
        else if (key == "obstacle_alert_radius") c.obstacle_alert_radius = get_real(v, key);
        else if (key == "step_size") c.step_size = get_real(v, key);
        else if (key == "capture_threshold") c.capture_threshold = get_real(v, key);
        else if (key == "concentration_bins") c.concentration_bins = get_int(v, key);
        else if (key == "concentration_decades") c.concentration_decades = get_real(v, key);
        else if (key == "gradient_epsilon") c.gradient_epsilon = get_real(v, key);
        else if (key == "max_steps") c.max_steps = get_int(v, key);
        else if (key == "episodes") c.episodes = get_int(v, key);
        else if (key == "alpha") c.alpha = get_real(v, key);
        else if (key == "gamma") c.gamma = get_real(v, key);
        else if (key == "epsilon0") c.epsilon0 = get_real(v, key);
        else if (key == "decay") c.decay = get_real(v, key);
        else if (key == "epsilon_min") c.epsilon_min = get_real(v, key);
        else if (key == "reward_mode") {
            const auto s = get_string(v, key);
            if (s == "proportional") c.reward_mode = RewardMode::Proportional;
            else if (s == "flat") c.reward_mode = RewardMode::Flat;
            else throw ConfigError(key, "expected \"proportional\" or \"flat\"");
        } else if (key == "seed") c.seed = get_seed(v, key);
        else if (key == "robot_count") c.robot_count = get_int(v, key);
        else if (key == "shared_qtable") {
            if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
            c.shared_qtable = v.get<bool>();
        } else if (key == "randomize_world") {
            if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
            c.randomize_world = v.get<bool>();
        } else throw ConfigError(key, "unknown key");
    }
    validate(c);
    return c;
}

inline SimConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

// ---------------------------------------------------------------------------
// Trace CSV

inline constexpr std::string_view kTraceHeader =
    "step,robot_id,x,y,z,concentration,distance_to_cell,action,reward,cumulative_reward";

inline std::string format_trace(const EpisodeTrace& trace) {
    std::string out(kTraceHeader);
    out += '\n';
    for (const auto& r : trace.records) {
        out += std::to_string(r.step);
        out += ',';
        out += std::to_string(r.robot_id);
        for (double v : {r.position.x, r.position.y, r.position.z, r.concentration, r.distance_to_cell}) {
            out += ',';
            out += format_sig9(v);
        }
        out += ',';
        out += to_string(r.action);
        out += ',';
        out += format_sig9(r.reward);
        out += ',';
        out += format_sig9(r.cumulative_reward);
        out += '\n';
    }
    return out;
}

inline void write_trace(const EpisodeTrace& trace, const std::filesystem::path& path) {
    write_file(path, format_trace(trace));
}

/// Parse a trace CSV. Only the CSV columns are restored; event flags read as false.
inline std::vector<StepRecord> read_trace(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != kTraceHeader) throw IoError(path, "missing or unexpected trace header");
    std::vector<StepRecord> out;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const auto f = split(lines[n], ',');
        if (f.size() != 10) throw IoError(path, "line " + std::to_string(n + 1) + ": expected 10 fields");
        try {
            StepRecord r;
            r.step = parse_integer<int>(f[0]);
            r.robot_id = parse_integer<int>(f[1]);
            r.position = {parse_double(f[2]), parse_double(f[3]), parse_double(f[4])};
            r.concentration = parse_double(f[5]);
            r.distance_to_cell = parse_double(f[6]);
            r.action = parse_action(f[7]);
            r.reward = parse_double(f[8]);
            r.cumulative_reward = parse_double(f[9]);
            out.push_back(r);
        } catch (const std::invalid_argument& e) {
            throw IoError(path, "line " + std::to_string(n + 1) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Heatmap CSV

inline std::string format_heatmap(const HeatmapGrid& g) {
    std::string out = "# plane=" + std::string(to_string(g.plane)) + " slice=" + format_sig9(g.slice) +
                      " res=" + std::to_string(g.resolution) + "\n";
    for (int i = 0; i < g.resolution; ++i) {
        for (int j = 0; j < g.resolution; ++j) {
            if (j) out += ',';
            out += format_sig9(g.at(i, j));
        }
        out += '\n';
    }
    return out;
}

inline void write_heatmap(const HeatmapGrid& grid, const std::filesystem::path& path) {
    write_file(path, format_heatmap(grid));
}

inline HeatmapGrid read_heatmap(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw IoError(path, "empty heatmap file");
    HeatmapGrid g;
    try {
        const auto head = split(lines[0], ' ');
        if (head.size() != 4 || head[0] != "#" || !head[1].starts_with("plane=") || !head[2].starts_with("slice=") ||
            !head[3].starts_with("res="))
            throw std::invalid_argument("malformed header");
        g.plane = parse_plane(head[1].substr(6));
        g.slice = parse_double(head[2].substr(6));
        g.resolution = parse_integer<int>(head[3].substr(4));
        if (lines.size() != static_cast<std::size_t>(g.resolution) + 1)
            throw std::invalid_argument("row count does not match res");
        for (int i = 0; i < g.resolution; ++i) {
            const auto f = split(lines[static_cast<std::size_t>(i) + 1], ',');
            if (f.size() != static_cast<std::size_t>(g.resolution))
                throw std::invalid_argument("row " + std::to_string(i) + " has the wrong width");
            for (auto s : f) g.values.push_back(parse_double(s));
        }
    } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
    }
    return g;
}

// ---------------------------------------------------------------------------
// Metrics JSON

inline nlohmann::json metrics_to_json(const EpisodeMetrics& m) {
    nlohmann::json j;
    j["total_steps"] = m.total_steps;
    j["final_distance"] = m.final_distance;
    j["average_distance"] = m.average_distance;
    j["average_biomarker_concentration"] = m.average_concentration;
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    j["captures"] = m.captures;
    j["obstacle_hits"] = m.obstacle_hits;
    j["empty"] = m.empty;
    return j;
}

inline std::string format_metrics(const EpisodeMetrics& m, Termination termination, const SimConfig& config) {
    nlohmann::json j = metrics_to_json(m);
    j["termination"] = to_string(termination);
    j["seed"] = config.seed;
    j["config"] = config_to_json(config);
    return j.dump(2) + "\n";
}

inline std::string format_metrics(const TrainingReport& report, const SimConfig& config) {
    nlohmann::json j;
    j["seed"] = config.seed;
    j["config"] = config_to_json(config);
    j["qtable_mode"] = config.shared_qtable ? "shared" : "per_robot";
    j["episode_count"] = report.episodes.size();
    auto episodes = nlohmann::json::array();
    for (std::size_t k = 0; k < report.episodes.size(); ++k) {
        auto e = metrics_to_json(report.episodes[k]);
        e["episode"] = k;
        e["epsilon"] = report.epsilons[k];
        e["termination"] = to_string(report.terminations[k]);
        e["steps_to_capture"] = report.steps_to_capture[k];
        episodes.push_back(std::move(e));
    }
    j["episodes"] = std::move(episodes);
    return j.dump(2) + "\n";
}

inline void write_metrics(const EpisodeMetrics& m, Termination termination, const SimConfig& config,
                          const std::filesystem::path& path) {
    write_file(path, format_metrics(m, termination, config));
}

inline void write_metrics(const TrainingReport& report, const SimConfig& config, const std::filesystem::path& path) {
    write_file(path, format_metrics(report, config));
}

// ---------------------------------------------------------------------------
// Q-table text format: `state_code,action_code,value,visits`, sorted by
// (state_code, action_code). Values use the shortest exact representation.

inline std::string format_qtable(const QTable& q) {
    std::string out;
    for (const auto& [key, e] : q.entries()) {
        out += std::to_string(key.first);
        out += ',';
        out += std::to_string(static_cast<unsigned>(key.second));
        out += ',';
        out += format_exact(e.value);
        out += ',';
        out += std::to_string(e.visits);
        out += '\n';
    }
    return out;
}

inline void write_qtable(const QTable& q, const std::filesystem::path& path) { write_file(path, format_qtable(q)); }

inline QTable read_qtable(const std::filesystem::path& path) {
    QTable q;
    const auto lines = read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto f = split(lines[n], ',');
        try {
            if (f.size() != 4) throw std::invalid_argument("expected 4 fields");
            q.set(parse_integer<std::uint32_t>(f[0]), action_from_code(parse_integer<unsigned>(f[1])),
                  parse_double(f[2]), parse_integer<std::uint64_t>(f[3]));
        } catch (const std::invalid_argument& e) {
            throw IoError(path, "line " + std::to_string(n + 1) + ": " + e.what());
        }
    }
    return q;
}

}  // namespace nanobot
