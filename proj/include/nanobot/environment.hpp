#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanobot/config.hpp"
#include "nanobot/field.hpp"
#include "nanobot/rng.hpp"
#include "nanobot/vec3.hpp"

namespace nanobot {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr int kMaxPlacementAttempts = 10000;

/// Segments passing closer than radius + kContactTolerance count as a hit, so
/// rounding in the endpoint can never leave a robot inside a sphere.
inline constexpr double kContactTolerance = 1e-9;

/// Placement could not satisfy the geometric constraints.
class InfeasibleConfig : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CancerCell {
    Vec3 position;
    Vec3 confinement_center;
    double confinement_radius = 0.0;
    BiomarkerSource source;
    bool alive = true;
};

struct Obstacle {
    Vec3 center;
    double radius = 1.0;
};

/// True if the closed segment [a, b] passes within `radius` (+ tolerance) of `center`.
inline bool segment_hits_sphere(const Vec3& a, const Vec3& b, const Vec3& center, double radius) {
    const Vec3 d = b - a;
    const double len2 = norm_squared(d);
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(dot(center - a, d) / len2, 0.0, 1.0);
    const Vec3 closest = a + t * d;
    const double r = radius + kContactTolerance;
    return norm_squared(closest - center) < r * r;
}

struct MoveOutcome {
    enum class Kind { Moved, ObstacleHit, BoundaryClamped };
    Kind kind = Kind::Moved;
    Vec3 position;
};

/// What a robot perceives at a point. Distances use kInfinity when there is
/// nothing to measure; directions are unit vectors or empty.
struct Observation {
    Vec3 position;
    double concentration = 0.0;
    Vec3 gradient;
    double nearest_obstacle_distance = kInfinity;  // to the sphere surface
    std::optional<Vec3> nearest_obstacle_direction;  // toward the obstacle center
    double nearest_cell_distance = kInfinity;  // only within the sensing radius
    std::optional<Vec3> nearest_cell_direction;
    double nearest_source_distance = kInfinity;  // unbounded range, alive sources only
};

class Environment {
  public:
    Environment(double side, FieldModel model, double d_min, double cell_step)
        : side_(side), field_model_(model), d_min_(d_min), cell_step_(cell_step), motion_rng_(0) {}

    /// Random world for `seed`: cells first, then obstacles that keep clear of every
    /// confinement ball, then robot spawn points outside every obstacle.
    static Environment generate(const SimConfig& config, std::uint64_t seed) {
        return generate(config, seed, derive_seed(seed, Stream::CellMotion));
    }

    /// Same layout as generate(config, layout_seed) with an independent cell-motion stream.
    static Environment generate(const SimConfig& config, std::uint64_t layout_seed, std::uint64_t motion_seed) {
        Environment env(config.side, config.field_model, config.d_min, config.cell_step);
        env.seed_ = layout_seed;
        env.motion_rng_ = Rng(motion_seed);
        Rng rng(derive_seed(layout_seed, Stream::Placement));
        const double side = config.side;
        const double conf = config.confinement_radius;

        if (config.cell_count > 0 && 2.0 * conf > side)
            throw InfeasibleConfig("confinement_radius " + std::to_string(conf) + " does not fit in the cube");
        for (int i = 0; i < config.cell_count; ++i) {
            const Vec3 p{rng.uniform(conf, side - conf), rng.uniform(conf, side - conf),
                         rng.uniform(conf, side - conf)};
            CancerCell cell;
            cell.position = p;
            cell.confinement_center = p;
            cell.confinement_radius = conf;
            cell.source = {p, config.peak, config.sigma, config.strength};
            env.cells_.push_back(cell);
        }

        for (int i = 0; i < config.obstacle_count; ++i) {
            bool placed = false;
            for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
                const double r = rng.uniform(config.obstacle_radius_min, config.obstacle_radius_max);
                if (2.0 * r > side) continue;
                const Vec3 c{rng.uniform(r, side - r), rng.uniform(r, side - r), rng.uniform(r, side - r)};
                const bool clear = std::ranges::none_of(env.cells_, [&](const CancerCell& cell) {
                    return distance(c, cell.confinement_center) < r + cell.confinement_radius;
                });
                if (clear) {
                    env.obstacles_.push_back({c, r});
                    placed = true;
                }
            }
            if (!placed)
                throw InfeasibleConfig("could not place obstacle " + std::to_string(i) + " after " +
                                       std::to_string(kMaxPlacementAttempts) + " attempts");
        }

        for (int i = 0; i < config.robot_count; ++i) {
            bool placed = false;
            for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
                const Vec3 p{rng.uniform(0, side), rng.uniform(0, side), rng.uniform(0, side)};
                if (env.is_legal(p)) {
                    env.spawns_.push_back(p);
                    placed = true;
                }
            }
            if (!placed)
                throw InfeasibleConfig("could not place robot " + std::to_string(i) + " after " +
                                       std::to_string(kMaxPlacementAttempts) + " attempts");
        }
        return env;
    }

    double side() const { return side_; }
    FieldModel field_model() const { return field_model_; }
    double d_min() const { return d_min_; }
    double cell_step() const { return cell_step_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t step_count() const { return step_count_; }

    std::span<const CancerCell> cells() const { return cells_; }
    std::span<const Obstacle> obstacles() const { return obstacles_; }
    std::span<const Vec3> spawns() const { return spawns_; }

    // Hand-built scenes (tests, custom scenarios).
    void add_cell(const CancerCell& cell) { cells_.push_back(cell); }
    void add_obstacle(const Obstacle& obstacle) { obstacles_.push_back(obstacle); }
    void add_spawn(const Vec3& p) { spawns_.push_back(p); }
    void reseed_motion(std::uint64_t seed) { motion_rng_ = Rng(seed); }

    void capture(std::size_t cell_index) { cells_.at(cell_index).alive = false; }

    bool all_captured() const {
        return std::ranges::none_of(cells_, [](const CancerCell& c) { return c.alive; });
    }

    std::vector<BiomarkerSource> alive_sources() const {
        std::vector<BiomarkerSource> out;
        for (const auto& c : cells_)
            if (c.alive) out.push_back(c.source);
        return out;
    }

    bool inside_cube(const Vec3& p) const {
        return p.x >= 0 && p.x <= side_ && p.y >= 0 && p.y <= side_ && p.z >= 0 && p.z <= side_;
    }

    /// Inside the cube and not inside (or touching) any obstacle.
    bool is_legal(const Vec3& p) const {
        if (!inside_cube(p)) return false;
        return std::ranges::none_of(obstacles_, [&](const Obstacle& o) {
            return distance(p, o.center) <= o.radius + kContactTolerance;
        });
    }

    /// One confined random-walk step for every alive cell. A step that leaves the
    /// confinement ball is reflected radially back inside it.
    void move_cancer_cells() {
        ++step_count_;
        for (auto& cell : cells_) {
            if (!cell.alive || cell.confinement_radius <= 0.0 || cell_step_ <= 0.0) continue;
            const Vec3 candidate = cell.position + cell_step_ * motion_rng_.in_unit_ball();
            const Vec3 offset = candidate - cell.confinement_center;
            const double dist = norm(offset);
            const double radius = cell.confinement_radius;
            if (dist <= radius) {
                cell.position = candidate;
            } else {
                const double reflected = std::clamp(radius - (dist - radius), -radius, radius);
                cell.position = cell.confinement_center + (reflected / dist) * offset;
            }
            cell.source.position = cell.position;
        }
    }

    /// Resolve a robot displacement. A path through an obstacle is refused outright;
    /// otherwise the endpoint is clamped to the cube.
    MoveOutcome attempt_move(const Vec3& from, const Vec3& displacement) const {
        using Kind = MoveOutcome::Kind;
        if (displacement == Vec3{}) return {Kind::Moved, from};

        const Vec3 raw = from + displacement;
        const Vec3 clamped{std::clamp(raw.x, 0.0, side_), std::clamp(raw.y, 0.0, side_),
                           std::clamp(raw.z, 0.0, side_)};
        for (const auto& o : obstacles_) {
            if (segment_hits_sphere(from, raw, o.center, o.radius) ||
                segment_hits_sphere(from, clamped, o.center, o.radius))
                return {Kind::ObstacleHit, from};
        }
        return {clamped == raw ? Kind::Moved : Kind::BoundaryClamped, clamped};
    }

    Observation sense(const Vec3& position, double sensing_radius) const {
        Observation obs;
        obs.position = position;
        const auto sources = alive_sources();
        const FieldSample f = total_field(position, sources, field_model_, d_min_);
        obs.concentration = f.concentration;
        obs.gradient = f.gradient;

        for (const auto& o : obstacles_) {
            const Vec3 to_center = o.center - position;
            const double center_dist = norm(to_center);
            const double surface = std::max(0.0, center_dist - o.radius);
            if (surface < obs.nearest_obstacle_distance) {
                obs.nearest_obstacle_distance = surface;
                obs.nearest_obstacle_direction =
                    center_dist > 0.0 ? std::optional<Vec3>(to_center * (1.0 / center_dist)) : std::nullopt;
            }
        }

        for (const auto& cell : cells_) {
            if (!cell.alive) continue;
            const Vec3 to_cell = cell.position - position;
            const double d = norm(to_cell);
            obs.nearest_source_distance = std::min(obs.nearest_source_distance, d);
            if (d <= sensing_radius && d < obs.nearest_cell_distance) {
                obs.nearest_cell_distance = d;
                obs.nearest_cell_direction = d > 0.0 ? std::optional<Vec3>(to_cell * (1.0 / d)) : std::nullopt;
            }
        }
        return obs;
    }

  private:
    double side_;
    FieldModel field_model_;
    double d_min_;
    double cell_step_;
    std::uint64_t seed_ = 0;
    std::uint64_t step_count_ = 0;
    std::vector<CancerCell> cells_;
    std::vector<Obstacle> obstacles_;
    std::vector<Vec3> spawns_;
    Rng motion_rng_;
};

}  // namespace nanobot
