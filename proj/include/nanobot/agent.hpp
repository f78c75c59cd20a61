#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "nanobot/config.hpp"
#include "nanobot/environment.hpp"
#include "nanobot/rng.hpp"
#include "nanobot/vec3.hpp"

namespace nanobot {

// ---------------------------------------------------------------------------
// Actions

enum class Action : std::uint8_t { TowardBiomarker = 0, TowardCell = 1, AvoidObstacle = 2 };

inline constexpr std::size_t kActionCount = 3;
inline constexpr std::array<Action, kActionCount> kAllActions{Action::TowardBiomarker, Action::TowardCell,
                                                               Action::AvoidObstacle};

inline std::string_view to_string(Action a) {
    switch (a) {
        case Action::TowardBiomarker: return "toward_biomarker";
        case Action::TowardCell: return "toward_cell";
        case Action::AvoidObstacle: return "avoid_obstacle";
    }
    return "toward_biomarker";
}

inline Action parse_action(std::string_view s) {
    for (Action a : kAllActions)
        if (to_string(a) == s) return a;
    throw std::invalid_argument("unknown action '" + std::string(s) + "'");
}

inline Action action_from_code(unsigned code) {
    if (code >= kActionCount) throw std::invalid_argument("action code out of range: " + std::to_string(code));
    return static_cast<Action>(code);
}

// ---------------------------------------------------------------------------
// State discretization

/// Code for "gradient too small to have a direction".
inline constexpr int kZeroGradientOctant = 8;
inline constexpr int kOctantCodes = 9;

/// Compact observation features. Packs into a dense code in
/// [0, concentration_bins * 9 * 2 * 2).
struct StateId {
    int concentration_bin = 0;
    int gradient_octant = kZeroGradientOctant;
    bool obstacle_near = false;
    bool cell_in_range = false;

    std::uint32_t code() const {
        auto c = static_cast<std::uint32_t>(concentration_bin);
        c = c * kOctantCodes + static_cast<std::uint32_t>(gradient_octant);
        c = c * 2 + (obstacle_near ? 1u : 0u);
        return c * 2 + (cell_in_range ? 1u : 0u);
    }

    static StateId from_code(std::uint32_t code) {
        StateId s;
        s.cell_in_range = (code & 1u) != 0;
        code >>= 1;
        s.obstacle_near = (code & 1u) != 0;
        code >>= 1;
        s.gradient_octant = static_cast<int>(code % kOctantCodes);
        s.concentration_bin = static_cast<int>(code / kOctantCodes);
        return s;
    }

    friend bool operator==(const StateId&, const StateId&) = default;
};

struct DiscretizationParams {
    int concentration_bins = 8;
    double reference_concentration = 1e-4;  // lower edge of bin 1
    double bins_per_decade = 2.0;
    double gradient_epsilon = 1e-12;
    double obstacle_alert_radius = 2.0;

    /// Bins spread over `concentration_decades` decades below the configured peak.
    static DiscretizationParams from_config(const SimConfig& c) {
        DiscretizationParams p;
        p.concentration_bins = c.concentration_bins;
        p.reference_concentration = c.peak * std::pow(10.0, -c.concentration_decades);
        p.bins_per_decade = static_cast<double>(c.concentration_bins) / c.concentration_decades;
        p.gradient_epsilon = c.gradient_epsilon;
        p.obstacle_alert_radius = c.obstacle_alert_radius;
        return p;
    }

    std::uint32_t state_count() const {
        return static_cast<std::uint32_t>(concentration_bins) * kOctantCodes * 2 * 2;
    }
};

inline int concentration_bin(double c, const DiscretizationParams& p) {
    if (!(c > 0.0)) return 0;
    const int top = p.concentration_bins - 1;
    if (!(p.reference_concentration > 0.0)) return top;
    const double raw = std::floor(std::log10(c / p.reference_concentration) * p.bins_per_decade);
    if (raw <= 0.0) return 0;
    if (raw >= static_cast<double>(top)) return top;
    return static_cast<int>(raw);
}

/// Sign-pattern octant: bit 2 for x < 0, bit 1 for y < 0, bit 0 for z < 0.
inline int gradient_octant(const Vec3& g, double epsilon) {
    if (norm(g) < epsilon || norm_squared(g) == 0.0) return kZeroGradientOctant;
    return (g.x < 0 ? 4 : 0) | (g.y < 0 ? 2 : 0) | (g.z < 0 ? 1 : 0);
}

inline StateId discretize(const Observation& obs, const DiscretizationParams& p) {
    return {concentration_bin(obs.concentration, p), gradient_octant(obs.gradient, p.gradient_epsilon),
            obs.nearest_obstacle_distance < p.obstacle_alert_radius, std::isfinite(obs.nearest_cell_distance)};
}

// ---------------------------------------------------------------------------
// Action geometry

namespace detail {

/// Some unit vector perpendicular to `n` (unit). Built from the axis least aligned with n.
inline Vec3 any_perpendicular(const Vec3& n) {
    const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
    Vec3 axis{1, 0, 0};
    if (ay < ax && ay <= az) axis = {0, 1, 0};
    else if (az < ax && az < ay) axis = {0, 0, 1};
    return normalized(cross(n, axis));
}

inline Vec3 uphill(const Observation& obs, double step, double gradient_epsilon, Rng& rng) {
    if (norm(obs.gradient) < gradient_epsilon || norm_squared(obs.gradient) == 0.0)
        return step * rng.unit_vector();
    return step * normalized(obs.gradient);
}

}  // namespace detail

/// Displacement for a macro-action.
///
/// TowardBiomarker climbs the concentration gradient; with no usable gradient
/// it takes a random direction from `rng`. TowardCell heads straight for the
/// sensed cell, or climbs like TowardBiomarker if no cell is in range.
/// AvoidObstacle moves along the gradient with its component toward the
/// nearest obstacle center removed, i.e. tangentially to that obstacle.
inline Vec3 action_to_displacement(Action action, const Observation& obs, double step_size,
                                   double gradient_epsilon, Rng& rng) {
    switch (action) {
        case Action::TowardBiomarker: return detail::uphill(obs, step_size, gradient_epsilon, rng);
        case Action::TowardCell:
            if (obs.nearest_cell_direction) return step_size * *obs.nearest_cell_direction;
            return detail::uphill(obs, step_size, gradient_epsilon, rng);
        case Action::AvoidObstacle: {
            if (!obs.nearest_obstacle_direction) return detail::uphill(obs, step_size, gradient_epsilon, rng);
            const Vec3 n = *obs.nearest_obstacle_direction;
            const Vec3 tangent = obs.gradient - dot(obs.gradient, n) * n;
            const double gnorm = norm(obs.gradient);
            if (gnorm < gradient_epsilon || norm(tangent) <= 1e-9 * gnorm || norm_squared(tangent) == 0.0)
                return step_size * detail::any_perpendicular(n);
            return step_size * normalized(tangent);
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Q-table

/// Sparse action-value table. Missing entries read as 0.
class QTable {
  public:
    struct Entry {
        double value = 0.0;
        std::uint64_t visits = 0;
        friend bool operator==(const Entry&, const Entry&) = default;
    };
    using Key = std::pair<std::uint32_t, Action>;

    double value(std::uint32_t state, Action a) const {
        auto it = entries_.find({state, a});
        return it == entries_.end() ? 0.0 : it->second.value;
    }

    std::uint64_t visits(std::uint32_t state, Action a) const {
        auto it = entries_.find({state, a});
        return it == entries_.end() ? 0 : it->second.visits;
    }

    double max_value(std::uint32_t state) const {
        double best = value(state, kAllActions[0]);
        for (std::size_t i = 1; i < kActionCount; ++i) best = std::max(best, value(state, kAllActions[i]));
        return best;
    }

    /// Highest-valued action; ties go to the earliest action in enum order.
    Action greedy(std::uint32_t state) const {
        Action best = kAllActions[0];
        double best_value = value(state, best);
        for (std::size_t i = 1; i < kActionCount; ++i) {
            const double v = value(state, kAllActions[i]);
            if (v > best_value) {
                best_value = v;
                best = kAllActions[i];
            }
        }
        return best;
    }

    Entry& entry(std::uint32_t state, Action a) { return entries_[{state, a}]; }
    void set(std::uint32_t state, Action a, double value, std::uint64_t visits = 0) {
        entries_[{state, a}] = {value, visits};
    }

    const std::map<Key, Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    friend bool operator==(const QTable&, const QTable&) = default;

  private:
    std::map<Key, Entry> entries_;
};

struct LearningParams {
    double alpha = 0.1;
    double gamma = 0.9;
};

/// Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
/// A terminal transition has no successor, so the bootstrap term is dropped.
inline void update_q(QTable& q, std::uint32_t s, Action a, double r, std::uint32_t s_next,
                     const LearningParams& params, bool terminal = false) {
    const double future = terminal ? 0.0 : q.max_value(s_next);
    auto& e = q.entry(s, a);
    e.value = e.value + params.alpha * (r + params.gamma * future - e.value);
    ++e.visits;
}

/// Epsilon-greedy. Always consumes exactly one uniform draw, plus one more when exploring.
inline Action select_action(const QTable& q, std::uint32_t s, double epsilon, Rng& rng) {
    if (rng.uniform01() < epsilon) return kAllActions[rng.below(kActionCount)];
    return q.greedy(s);
}

// ---------------------------------------------------------------------------
// Reward and exploration schedule

struct Transition {
    bool captured = false;
    bool obstacle_hit = false;
    double delta_toward_biomarker = 0.0;  // distance reduction to the nearest source
};

inline constexpr double kCaptureReward = 10.0;
inline constexpr double kObstaclePenalty = -1.0;

/// +10 on capture, -1 on an obstacle hit, and +1 per unit of approach to the
/// nearest biomarker (Flat mode: +1 for any approach). Terms add.
inline double compute_reward(const Transition& t, RewardMode mode = RewardMode::Proportional) {
    double r = 0.0;
    if (t.captured) r += kCaptureReward;
    if (t.obstacle_hit) r += kObstaclePenalty;
    if (mode == RewardMode::Proportional) r += std::max(0.0, t.delta_toward_biomarker);
    else if (t.delta_toward_biomarker > 0.0) r += 1.0;
    return r;
}

struct EpsilonSchedule {
    double epsilon0 = 1.0;
    double decay = 0.995;
    double epsilon_min = 0.05;
};

inline double decay_epsilon(const EpsilonSchedule& s, std::uint64_t episode_index) {
    return std::max(s.epsilon_min, s.epsilon0 * std::pow(s.decay, static_cast<double>(episode_index)));
}

}  // namespace nanobot
