#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "nanobot/agent.hpp"
#include "nanobot/config.hpp"
#include "nanobot/environment.hpp"
#include "nanobot/rng.hpp"

namespace nanobot {

enum class Termination { AllCaptured, StepLimit };

inline std::string_view to_string(Termination t) {
    return t == Termination::AllCaptured ? "all_captured" : "step_limit";
}

/// One robot's state at the end of one step.
struct StepRecord {
    int step = 0;
    int robot_id = 0;
    Vec3 position;
    double concentration = 0.0;
    double distance_to_cell = 0.0;  // to the nearest cell alive when the step resolved
    Action action = Action::TowardBiomarker;
    double reward = 0.0;
    double cumulative_reward = 0.0;
    bool captured = false;
    bool obstacle_hit = false;
};

struct EpisodeTrace {
    std::vector<StepRecord> records;  // ordered by (step, robot_id)
    Termination termination = Termination::StepLimit;
};

struct EpisodeMetrics {
    int total_steps = 0;
    double final_distance = 0.0;
    double average_distance = 0.0;
    double average_concentration = 0.0;
    double wall_clock_seconds = 0.0;
    int captures = 0;
    int obstacle_hits = 0;
    bool empty = true;  // no records; distance statistics are zero placeholders
};

enum class Mode { Train, Eval };

struct EpisodeOptions {
    Mode mode = Mode::Train;
    double epsilon = 0.0;  // ignored in Eval mode
    std::optional<Action> forced_action;  // bypass the Q-table entirely
    std::optional<std::uint64_t> agent_seed;  // defaults to the environment seed
};

inline EpisodeMetrics collect_metrics(const EpisodeTrace& trace, double wall_clock_seconds = 0.0) {
    EpisodeMetrics m;
    m.wall_clock_seconds = wall_clock_seconds;
    if (trace.records.empty()) return m;
    m.empty = false;
    double dist_sum = 0.0, conc_sum = 0.0;
    for (const auto& r : trace.records) {
        dist_sum += r.distance_to_cell;
        conc_sum += r.concentration;
        m.captures += r.captured ? 1 : 0;
        m.obstacle_hits += r.obstacle_hit ? 1 : 0;
    }
    const auto n = static_cast<double>(trace.records.size());
    m.total_steps = trace.records.back().step + 1;
    m.final_distance = trace.records.back().distance_to_cell;
    m.average_distance = dist_sum / n;
    m.average_concentration = conc_sum / n;
    return m;
}

namespace detail {

struct NearestCell {
    std::optional<std::size_t> index;
    double distance = kInfinity;
};

/// Nearest cell among those flagged in `eligible` (all alive cells when empty).
inline NearestCell nearest_alive_cell(const Environment& env, const Vec3& p,
                                      const std::vector<bool>& eligible = {}) {
    NearestCell out;
    const auto cells = env.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (eligible.empty() ? !cells[i].alive : !eligible[i]) continue;
        const double d = distance(p, cells[i].position);
        if (d < out.distance) {
            out.distance = d;
            out.index = i;
        }
    }
    return out;
}

}  // namespace detail

/// Run one episode to capture-of-all-cells or the step limit.
///
/// `tables` holds either one table shared by every robot or one per robot.
/// Within a step robots act in index order, then the cells move, then
/// captures and rewards are resolved against the post-move geometry. A robot
/// already within capture range when its turn comes captures without moving.
inline EpisodeTrace run_episode(Environment& env, std::vector<QTable>& tables, const SimConfig& config,
                                const EpisodeOptions& options) {
    const auto robot_count = env.spawns().size();
    if (robot_count == 0) throw std::invalid_argument("environment has no robot spawn points");
    if (tables.size() != 1 && tables.size() != robot_count)
        throw std::invalid_argument("need one shared Q-table or one per robot");

    const auto disc = DiscretizationParams::from_config(config);
    const LearningParams learning{config.alpha, config.gamma};
    const double epsilon = options.mode == Mode::Eval ? 0.0 : options.epsilon;
    auto table_for = [&](std::size_t i) -> QTable& { return tables[tables.size() == 1 ? 0 : i]; };

    std::vector<Vec3> positions(env.spawns().begin(), env.spawns().end());
    std::vector<Rng> rngs;
    const std::uint64_t agent_seed = options.agent_seed.value_or(env.seed());
    for (std::size_t i = 0; i < robot_count; ++i) rngs.emplace_back(derive_seed(agent_seed, Stream::Agent, i));
    std::vector<double> cumulative(robot_count, 0.0);

    struct Pending {
        std::uint32_t state = 0;
        Action action = Action::TowardBiomarker;
        Vec3 from;
        bool captured_early = false;
        StepRecord record;
    };
    std::vector<Pending> pending(robot_count);

    EpisodeTrace trace;
    for (int step = 0; step < config.max_steps && !env.all_captured(); ++step) {
        std::vector<bool> alive_at_start;
        for (const auto& c : env.cells()) alive_at_start.push_back(c.alive);

        for (std::size_t i = 0; i < robot_count; ++i) {
            auto& p = pending[i];
            p = Pending{};
            p.from = positions[i];
            const Observation obs = env.sense(positions[i], config.sensing_radius);
            p.state = discretize(obs, disc).code();
            p.action = options.forced_action ? *options.forced_action
                                             : select_action(table_for(i), p.state, epsilon, rngs[i]);

            p.record.step = step;
            p.record.robot_id = static_cast<int>(i);
            p.record.action = p.action;

            const auto near = detail::nearest_alive_cell(env, positions[i]);
            if (near.index && near.distance <= config.capture_threshold) {
                env.capture(*near.index);
                p.captured_early = true;
                p.record.captured = true;
                p.record.position = positions[i];
                p.record.concentration = obs.concentration;
                p.record.distance_to_cell = near.distance;
                continue;
            }

            const Vec3 d = action_to_displacement(p.action, obs, config.step_size, config.gradient_epsilon, rngs[i]);
            const MoveOutcome outcome = env.attempt_move(positions[i], d);
            positions[i] = outcome.position;
            p.record.obstacle_hit = outcome.kind == MoveOutcome::Kind::ObstacleHit;
        }

        env.move_cancer_cells();

        // Distances refer to the cells alive when the step began, so a cell taken
        // earlier in this step by a lower-indexed robot still counts.
        std::vector<std::size_t> to_capture;
        for (std::size_t i = 0; i < robot_count; ++i) {
            auto& p = pending[i];
            if (p.captured_early) continue;
            const Observation obs = env.sense(positions[i], config.sensing_radius);
            const auto near = detail::nearest_alive_cell(env, positions[i], alive_at_start);
            p.record.position = positions[i];
            p.record.concentration = obs.concentration;
            p.record.distance_to_cell = near.distance;
            if (near.index && near.distance <= config.capture_threshold) {
                p.record.captured = true;
                to_capture.push_back(*near.index);
            }
        }
        // Approach is measured to the source nearest the robot after the step,
        // so it never exceeds the robot's own displacement.
        for (std::size_t i = 0; i < robot_count; ++i) {
            auto& p = pending[i];
            if (p.captured_early) continue;
            const auto near = detail::nearest_alive_cell(env, positions[i], alive_at_start);
            double delta = 0.0;
            if (near.index) {
                const Vec3 src = env.cells()[*near.index].position;
                delta = distance(p.from, src) - distance(positions[i], src);
            }
            p.record.reward = compute_reward({p.record.captured, p.record.obstacle_hit, delta}, config.reward_mode);
        }
        for (auto idx : to_capture) env.capture(idx);

        const bool done = env.all_captured();
        for (std::size_t i = 0; i < robot_count; ++i) {
            auto& p = pending[i];
            if (p.captured_early) p.record.reward = compute_reward({true, false, 0.0}, config.reward_mode);
            cumulative[i] += p.record.reward;
            p.record.cumulative_reward = cumulative[i];
            if (options.mode == Mode::Train && !options.forced_action) {
                const auto next = discretize(env.sense(positions[i], config.sensing_radius), disc).code();
                update_q(table_for(i), p.state, p.action, p.record.reward, next, learning, done);
            }
            trace.records.push_back(p.record);
        }
        if (done) break;
    }
    trace.termination = env.all_captured() ? Termination::AllCaptured : Termination::StepLimit;
    return trace;
}

struct EpisodeResult {
    EpisodeTrace trace;
    EpisodeMetrics metrics;
};

/// run_episode + collect_metrics, timed.
inline EpisodeResult run_timed_episode(Environment& env, std::vector<QTable>& tables, const SimConfig& config,
                                       const EpisodeOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeResult r;
    r.trace = run_episode(env, tables, config, options);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    r.metrics = collect_metrics(r.trace, dt.count());
    return r;
}

struct TrainingReport {
    std::vector<EpisodeMetrics> episodes;
    std::vector<Termination> terminations;
    std::vector<double> epsilons;
    std::vector<int> steps_to_capture;  // max_steps for episodes that hit the limit
    std::vector<QTable> tables;
    EpisodeTrace last_trace;
};

inline std::vector<QTable> make_tables(const SimConfig& config) {
    return std::vector<QTable>(config.shared_qtable ? 1 : static_cast<std::size_t>(config.robot_count));
}

inline std::uint64_t episode_seed(const SimConfig& config, std::uint64_t episode) {
    return derive_seed(config.seed, Stream::Episode, episode);
}

inline std::uint64_t evaluation_seed(const SimConfig& config, std::uint64_t episode) {
    return derive_seed(config.seed, Stream::Evaluation, episode);
}

/// Layout seed shared by every training episode unless randomize_world is set.
inline std::uint64_t world_seed(const SimConfig& config) { return derive_seed(config.seed, Stream::World); }

/// World for training episode k. Cell motion and agent draws always come from
/// per-episode streams; the layout and spawn are per-episode only with randomize_world.
inline Environment training_environment(const SimConfig& config, std::uint64_t k) {
    const std::uint64_t ep = episode_seed(config, k);
    return Environment::generate(config, config.randomize_world ? ep : world_seed(config),
                                 derive_seed(ep, Stream::CellMotion));
}

using ProgressFn = std::function<void(int episode, const EpisodeMetrics&, double epsilon)>;

/// Train for config.episodes episodes; the Q-tables carry over between episodes.
inline TrainingReport run_training(const SimConfig& config, const ProgressFn& progress = {}) {
    validate(config);
    TrainingReport report;
    report.tables = make_tables(config);
    const EpsilonSchedule schedule{config.epsilon0, config.decay, config.epsilon_min};
    for (int k = 0; k < config.episodes; ++k) {
        const auto index = static_cast<std::uint64_t>(k);
        Environment env = training_environment(config, index);
        const double eps = decay_epsilon(schedule, index);
        auto result = run_timed_episode(env, report.tables, config,
                                        {Mode::Train, eps, std::nullopt, episode_seed(config, index)});
        report.epsilons.push_back(eps);
        report.terminations.push_back(result.trace.termination);
        report.steps_to_capture.push_back(result.trace.termination == Termination::AllCaptured
                                              ? result.metrics.total_steps
                                              : config.max_steps);
        report.episodes.push_back(result.metrics);
        if (progress) progress(k, result.metrics, eps);
        if (k + 1 == config.episodes) report.last_trace = std::move(result.trace);
    }
    return report;
}

/// Greedy evaluation episode `index` on the evaluation seed stream. Tables are not modified.
inline EpisodeResult run_evaluation(const SimConfig& config, std::vector<QTable> tables, std::uint64_t index) {
    Environment env = Environment::generate(config, evaluation_seed(config, index));
    return run_timed_episode(env, tables, config, {Mode::Eval, 0.0, std::nullopt, std::nullopt});
}

}  // namespace nanobot
