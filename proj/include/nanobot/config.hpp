#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "nanobot/field.hpp"

namespace nanobot {

enum class RewardMode { Proportional, Flat };

/// Invalid configuration. Carries the offending key.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string key, const std::string& reason)
        : std::runtime_error(key.empty() ? reason : "config key '" + key + "': " + reason),
          key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// Every tunable of a simulation run. Defaults reproduce the reference scenario:
/// one cancer cell and five obstacles in a 50-unit cube.
struct SimConfig {
    // world
    double side = 50.0;
    int cell_count = 1;
    int obstacle_count = 5;
    double obstacle_radius_min = 2.0;
    double obstacle_radius_max = 4.0;
    double cell_step = 0.25;
    double confinement_radius = 5.0;

    // field
    FieldModel field_model = FieldModel::Gaussian;
    double sigma = 15.0;
    double peak = 1.0;
    double strength = 1.0;
    double d_min = kDefaultMinDistance;

    // sensing and motion
    double sensing_radius = 15.0;
    double obstacle_alert_radius = 2.0;
    double step_size = 0.5;
    double capture_threshold = 0.5;

    // state discretization
    int concentration_bins = 8;
    double concentration_decades = 4.0;
    double gradient_epsilon = 1e-12;

    // learning
    int max_steps = 2000;
    int episodes = 300;
    double alpha = 0.1;
    double gamma = 0.9;
    double epsilon0 = 1.0;
    double decay = 0.995;
    double epsilon_min = 0.05;
    RewardMode reward_mode = RewardMode::Proportional;

    // orchestration
    std::uint64_t seed = 0;
    int robot_count = 1;
    bool shared_qtable = false;
    bool randomize_world = false;  // new layout and spawn every training episode

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

namespace detail {

inline void require(bool ok, const char* key, const char* reason) {
    if (!ok) throw ConfigError(key, reason);
}

}  // namespace detail

/// Range checks for every field. Throws ConfigError naming the first bad key.
/// Geometric feasibility (do the obstacles fit?) is left to environment construction.
inline void validate(const SimConfig& c) {
    using detail::require;
    auto finite = [](double v) { return std::isfinite(v); };

    require(finite(c.side) && c.side > 0, "side", "must be > 0");
    require(c.cell_count >= 0, "cell_count", "must be >= 0");
    require(c.obstacle_count >= 0, "obstacle_count", "must be >= 0");
    require(finite(c.obstacle_radius_min) && c.obstacle_radius_min > 0, "obstacle_radius_range",
            "minimum radius must be > 0");
    require(finite(c.obstacle_radius_max) && c.obstacle_radius_max >= c.obstacle_radius_min,
            "obstacle_radius_range", "maximum radius must be >= minimum radius");
    require(finite(c.cell_step) && c.cell_step >= 0, "cell_step", "must be >= 0");
    require(finite(c.confinement_radius) && c.confinement_radius >= 0, "confinement_radius", "must be >= 0");

    require(finite(c.sigma) && c.sigma > 0, "sigma", "must be > 0");
    require(finite(c.peak) && c.peak >= 0, "peak", "must be >= 0");
    require(finite(c.strength) && c.strength >= 0, "strength", "must be >= 0");
    require(finite(c.d_min) && c.d_min > 0, "d_min", "must be > 0");

    require(finite(c.sensing_radius) && c.sensing_radius >= 0, "sensing_radius", "must be >= 0");
    require(finite(c.obstacle_alert_radius) && c.obstacle_alert_radius >= 0, "obstacle_alert_radius",
            "must be >= 0");
    require(finite(c.step_size) && c.step_size > 0, "step_size", "must be > 0");
    require(finite(c.capture_threshold) && c.capture_threshold >= 0, "capture_threshold", "must be >= 0");

    require(c.concentration_bins >= 1, "concentration_bins", "must be >= 1");
    require(finite(c.concentration_decades) && c.concentration_decades > 0, "concentration_decades",
            "must be > 0");
    require(finite(c.gradient_epsilon) && c.gradient_epsilon >= 0, "gradient_epsilon", "must be >= 0");

    require(c.max_steps >= 0, "max_steps", "must be >= 0");
    require(c.episodes >= 0, "episodes", "must be >= 0");
    require(finite(c.alpha) && c.alpha > 0 && c.alpha <= 1, "alpha", "must lie in (0, 1]");
    require(finite(c.gamma) && c.gamma >= 0 && c.gamma <= 1, "gamma", "must lie in [0, 1]");
    require(finite(c.epsilon0) && c.epsilon0 >= 0 && c.epsilon0 <= 1, "epsilon0", "must lie in [0, 1]");
    require(finite(c.decay) && c.decay > 0 && c.decay <= 1, "decay", "must lie in (0, 1]");
    require(finite(c.epsilon_min) && c.epsilon_min >= 0 && c.epsilon_min <= 1, "epsilon_min",
            "must lie in [0, 1]");

    require(c.robot_count >= 1, "robot_count", "must be >= 1");
}

}  // namespace nanobot
