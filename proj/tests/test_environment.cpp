#include <gtest/gtest.h>

#include <cmath>

#include "nanobot/config.hpp"
#include "nanobot/environment.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace nanobot;

namespace {

Environment empty_world(double side = 50.0) { return Environment(side, FieldModel::Gaussian, 1e-3, 0.25); }

bool same_layout(const Environment& a, const Environment& b) {
    if (a.cells().size() != b.cells().size() || a.obstacles().size() != b.obstacles().size()) return false;
    for (std::size_t i = 0; i < a.cells().size(); ++i)
        if (a.cells()[i].position != b.cells()[i].position) return false;
    for (std::size_t i = 0; i < a.obstacles().size(); ++i)
        if (a.obstacles()[i].center != b.obstacles()[i].center || a.obstacles()[i].radius != b.obstacles()[i].radius)
            return false;
    return std::ranges::equal(a.spawns(), b.spawns());
}

}  // namespace

TEST(Generate, SameSeedSameWorld) {
    SimConfig c;
    c.cell_count = 3;
    c.robot_count = 2;
    EXPECT_TRUE(same_layout(Environment::generate(c, 42), Environment::generate(c, 42)));
    EXPECT_FALSE(same_layout(Environment::generate(c, 42), Environment::generate(c, 43)));
}

TEST(Generate, PlacementConstraints) {
    SimConfig c;
    c.cell_count = 4;
    c.obstacle_count = 8;
    c.robot_count = 3;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto env = Environment::generate(c, seed);
        ASSERT_EQ(env.cells().size(), 4u);
        ASSERT_EQ(env.obstacles().size(), 8u);
        ASSERT_EQ(env.spawns().size(), 3u);
        for (const auto& o : env.obstacles()) {
            EXPECT_GE(o.radius, c.obstacle_radius_min);
            EXPECT_LE(o.radius, c.obstacle_radius_max);
            for (double v : {o.center.x, o.center.y, o.center.z}) {
                EXPECT_GE(v - o.radius, 0.0);
                EXPECT_LE(v + o.radius, c.side);
            }
            for (const auto& cell : env.cells())
                EXPECT_GE(distance(o.center, cell.confinement_center), o.radius + cell.confinement_radius);
        }
        for (const auto& cell : env.cells()) {
            EXPECT_TRUE(env.inside_cube(cell.position));
            EXPECT_EQ(cell.source.position, cell.position);
            EXPECT_TRUE(cell.alive);
        }
        for (const auto& s : env.spawns()) EXPECT_TRUE(env.is_legal(s));
    }
}

TEST(Generate, ImpossibleObstaclesAreInfeasible) {
    SimConfig c;
    c.obstacle_count = 10;
    c.obstacle_radius_min = 30;
    c.obstacle_radius_max = 30;
    EXPECT_THROW(Environment::generate(c, 1), InfeasibleConfig);
}

TEST(CellMotion, StaysInConfinementAndTracksSource) {
    SimConfig c;
    c.cell_count = 3;
    c.cell_step = 2.0;  // large steps so reflection is exercised often
    c.confinement_radius = 3.0;
    auto env = Environment::generate(c, 9);
    for (int t = 0; t < 5000; ++t) {
        env.move_cancer_cells();
        for (const auto& cell : env.cells()) {
            ASSERT_LE(distance(cell.position, cell.confinement_center), cell.confinement_radius + 1e-12);
            ASSERT_EQ(cell.source.position, cell.position);
        }
    }
    EXPECT_EQ(env.step_count(), 5000u);
}

TEST(CellMotion, CapturedCellsStayPut) {
    SimConfig c;
    auto env = Environment::generate(c, 3);
    const Vec3 before = env.cells()[0].position;
    env.capture(0);
    for (int t = 0; t < 10; ++t) env.move_cancer_cells();
    EXPECT_EQ(env.cells()[0].position, before);
    EXPECT_TRUE(env.all_captured());
    EXPECT_TRUE(env.alive_sources().empty());
}

TEST(AttemptMove, FreeMove) {
    auto env = empty_world();
    const auto out = env.attempt_move({10, 10, 10}, {0.5, 0, 0});
    EXPECT_EQ(out.kind, MoveOutcome::Kind::Moved);
    EXPECT_EQ(out.position, (Vec3{10.5, 10, 10}));
}

TEST(AttemptMove, BlockedByObstacle) {
    auto env = empty_world();
    env.add_obstacle({{12, 10, 10}, 1.0});
    const auto out = env.attempt_move({10, 10, 10}, {3, 0, 0});
    EXPECT_EQ(out.kind, MoveOutcome::Kind::ObstacleHit);
    EXPECT_EQ(out.position, (Vec3{10, 10, 10}));
}

TEST(AttemptMove, TangentMoveIsRefused) {
    // Passing at exactly the radius counts as contact.
    auto env = empty_world();
    env.add_obstacle({{12, 11, 10}, 1.0});
    EXPECT_EQ(env.attempt_move({10, 10, 10}, {4, 0, 0}).kind, MoveOutcome::Kind::ObstacleHit);
}

TEST(AttemptMove, ClampedToCube) {
    auto env = empty_world();
    const auto out = env.attempt_move({49.8, 25, 25}, {0.5, 0, 0});
    EXPECT_EQ(out.kind, MoveOutcome::Kind::BoundaryClamped);
    EXPECT_EQ(out.position, (Vec3{50, 25, 25}));
}

TEST(AttemptMove, ZeroDisplacementIsNoop) {
    auto env = empty_world();
    env.add_obstacle({{12, 10, 10}, 1.0});
    const auto out = env.attempt_move({10, 10, 10}, {});
    EXPECT_EQ(out.kind, MoveOutcome::Kind::Moved);
    EXPECT_EQ(out.position, (Vec3{10, 10, 10}));
}

TEST(AttemptMove, AgreesWithClosedFormSegmentTest) {
    Rng rng(123);
    int hits = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        auto env = empty_world();
        const Obstacle o{{rng.uniform(10, 40), rng.uniform(10, 40), rng.uniform(10, 40)}, rng.uniform(1, 4)};
        env.add_obstacle(o);
        Vec3 from;
        do {
            from = {rng.uniform(5, 45), rng.uniform(5, 45), rng.uniform(5, 45)};
        } while (distance(from, o.center) <= o.radius + 1e-6);
        // Half the moves are aimed roughly at the obstacle so both outcomes are common.
        const Vec3 disp = rng.uniform01() < 0.5
                              ? rng.uniform(0.1, 8.0) * rng.unit_vector()
                              : rng.uniform(0.5, 1.5) * (o.center - from + o.radius * rng.in_unit_ball());
        const Vec3 to = from + disp;
        // Skip near-tangent cases whose classification depends on the tolerance.
        const bool inflated = oracle::segment_enters_ball(from, to, o.center, o.radius + 1e-6);
        const bool deflated = oracle::segment_enters_ball(from, to, o.center, o.radius - 1e-6);
        if (inflated != deflated) continue;
        const auto out = env.attempt_move(from, disp);
        EXPECT_EQ(out.kind == MoveOutcome::Kind::ObstacleHit, inflated);
        hits += inflated ? 1 : 0;
    }
    EXPECT_GT(hits, 2000);
}

TEST(Sense, ReportsNearestThings) {
    SimConfig c;
    auto env = support::open_field(c, {20, 20, 20}, {10, 20, 20});
    env.add_obstacle({{10, 26, 20}, 2.0});
    const auto obs = env.sense({10, 20, 20}, 15.0);
    EXPECT_DOUBLE_EQ(obs.nearest_cell_distance, 10.0);
    ASSERT_TRUE(obs.nearest_cell_direction);
    EXPECT_EQ(*obs.nearest_cell_direction, (Vec3{1, 0, 0}));
    EXPECT_DOUBLE_EQ(obs.nearest_obstacle_distance, 4.0);
    ASSERT_TRUE(obs.nearest_obstacle_direction);
    EXPECT_EQ(*obs.nearest_obstacle_direction, (Vec3{0, 1, 0}));
    EXPECT_DOUBLE_EQ(obs.nearest_source_distance, 10.0);
    EXPECT_GT(obs.concentration, 0.0);
    EXPECT_GT(obs.gradient.x, 0.0);
}

TEST(Sense, CellOutOfRange) {
    SimConfig c;
    auto env = support::open_field(c, {40, 20, 20}, {10, 20, 20});
    const auto obs = env.sense({10, 20, 20}, 15.0);
    EXPECT_TRUE(std::isinf(obs.nearest_cell_distance));
    EXPECT_FALSE(obs.nearest_cell_direction);
    EXPECT_DOUBLE_EQ(obs.nearest_source_distance, 30.0);
    EXPECT_TRUE(std::isinf(obs.nearest_obstacle_distance));
}

TEST(Sense, CapturedCellsAreInvisible) {
    SimConfig c;
    auto env = support::open_field(c, {12, 20, 20}, {10, 20, 20});
    env.capture(0);
    const auto obs = env.sense({10, 20, 20}, 15.0);
    EXPECT_EQ(obs.concentration, 0.0);
    EXPECT_TRUE(std::isinf(obs.nearest_cell_distance));
    EXPECT_TRUE(std::isinf(obs.nearest_source_distance));
}

TEST(Safety, RandomWalkNeverEntersObstaclesOrLeavesCube) {
    SimConfig c;
    c.obstacle_count = 12;
    c.cell_count = 3;
    auto env = Environment::generate(c, 77);
    Rng rng(78);
    Vec3 p = env.spawns()[0];
    for (int t = 0; t < 50000; ++t) {
        const Vec3 d = rng.uniform(0.0, 3.0) * rng.unit_vector();
        p = env.attempt_move(p, d).position;
        ASSERT_TRUE(env.is_legal(p)) << "step " << t;
        env.move_cancer_cells();
    }
}
