#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nanobot/agent.hpp"
#include "nanobot/engine.hpp"
#include "nanobot/rng.hpp"
#include "oracles.hpp"

namespace nanobot::support {

/// Q-learning on the ring MDP with the library's update and selection rules.
/// Every transition starts from a uniformly drawn state.
inline QTable learn_ring_mdp(std::uint64_t seed, int transitions, double alpha, double gamma, double epsilon,
                             double* max_abs_q = nullptr) {
    QTable q;
    Rng rng(seed);
    const LearningParams params{alpha, gamma};
    double peak = 0.0;
    for (int t = 0; t < transitions; ++t) {
        const int s = static_cast<int>(rng.below(oracle::RingMdp::kStates));
        const Action a = select_action(q, static_cast<std::uint32_t>(s), epsilon, rng);
        const int ai = static_cast<int>(a);
        const int s2 = oracle::RingMdp::next(s, ai);
        update_q(q, static_cast<std::uint32_t>(s), a, oracle::RingMdp::reward(s, ai), static_cast<std::uint32_t>(s2),
                 params);
        peak = std::max(peak, std::abs(q.value(static_cast<std::uint32_t>(s), a)));
    }
    if (max_abs_q) *max_abs_q = peak;
    return q;
}

inline double max_error_vs_oracle(const QTable& q, const oracle::QStar& star) {
    double err = 0.0;
    for (int s = 0; s < oracle::RingMdp::kStates; ++s)
        for (int a = 0; a < oracle::RingMdp::kActions; ++a)
            err = std::max(err, std::abs(q.value(static_cast<std::uint32_t>(s), static_cast<Action>(a)) -
                                         star[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
    return err;
}

inline double median(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nanobot_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Single static cell, no obstacles, one robot at `spawn`.
inline Environment open_field(const SimConfig& config, const Vec3& cell_at, const Vec3& spawn,
                              double confinement = 0.0) {
    Environment env(config.side, config.field_model, config.d_min, config.cell_step);
    CancerCell cell;
    cell.position = cell_at;
    cell.confinement_center = cell_at;
    cell.confinement_radius = confinement;
    cell.source = {cell_at, config.peak, config.sigma, config.strength};
    env.add_cell(cell);
    env.add_spawn(spawn);
    return env;
}

}  // namespace nanobot::support
