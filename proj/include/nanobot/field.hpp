#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nanobot/vec3.hpp"

namespace nanobot {

/// A biomarker emitter. `peak` and `sigma` drive the Gaussian model,
/// `strength` drives the inverse-square model.
struct BiomarkerSource {
    Vec3 position;
    double peak = 1.0;
    double sigma = 15.0;
    double strength = 1.0;
};

enum class FieldModel { Gaussian, InverseSquare };

inline constexpr double kDefaultMinDistance = 1e-3;
inline constexpr double kInverseSquareFdStep = 1e-4;

/// rho0 * exp(-|p - p0|^2 / (2 sigma^2))
inline double gaussian_density(const Vec3& point, const BiomarkerSource& source) {
    const Vec3 d = point - source.position;
    return source.peak * std::exp(-norm_squared(d) / (2.0 * source.sigma * source.sigma));
}

/// Closed-form partial derivatives of gaussian_density; points toward the source.
inline Vec3 gaussian_gradient(const Vec3& point, const BiomarkerSource& source) {
    const Vec3 d = point - source.position;
    const double s2 = source.sigma * source.sigma;
    const double rho = gaussian_density(point, source);
    return {-(d.x / s2) * rho, -(d.y / s2) * rho, -(d.z / s2) * rho};
}

/// Sum of strength_i / d_i^2 with each distance clamped below at d_min.
inline double aggregate_concentration(const Vec3& point, std::span<const BiomarkerSource> sources,
                                      double d_min = kDefaultMinDistance) {
    double c = 0.0;
    for (const auto& s : sources) {
        const double d = std::max(distance(point, s.position), d_min);
        c += s.strength / (d * d);
    }
    return c;
}

struct FieldSample {
    double concentration = 0.0;
    Vec3 gradient;
};

/// Superposed concentration and gradient of all sources under the chosen model.
/// The inverse-square model has no closed-form gradient here; it is taken by
/// central differences with step kInverseSquareFdStep.
inline FieldSample total_field(const Vec3& point, std::span<const BiomarkerSource> sources,
                               FieldModel model, double d_min = kDefaultMinDistance) {
    FieldSample out;
    if (model == FieldModel::Gaussian) {
        for (const auto& s : sources) {
            out.concentration += gaussian_density(point, s);
            out.gradient += gaussian_gradient(point, s);
        }
        return out;
    }

    out.concentration = aggregate_concentration(point, sources, d_min);
    if (sources.empty()) return out;
    const double h = kInverseSquareFdStep;
    auto diff = [&](const Vec3& e) {
        return (aggregate_concentration(point + h * e, sources, d_min) -
                aggregate_concentration(point - h * e, sources, d_min)) /
               (2.0 * h);
    };
    out.gradient = {diff({1, 0, 0}), diff({0, 1, 0}), diff({0, 0, 1})};
    return out;
}

// ---------------------------------------------------------------------------
// Heatmaps

enum class Plane { XY, XZ, YZ };

inline std::string_view to_string(Plane p) {
    switch (p) {
        case Plane::XY: return "XY";
        case Plane::XZ: return "XZ";
        case Plane::YZ: return "YZ";
    }
    return "XY";
}

inline Plane parse_plane(std::string_view s) {
    if (s == "XY") return Plane::XY;
    if (s == "XZ") return Plane::XZ;
    if (s == "YZ") return Plane::YZ;
    throw std::invalid_argument("unknown plane '" + std::string(s) + "' (expected XY, XZ or YZ)");
}

/// Concentration sampled on a resolution x resolution grid of cell centers.
/// Row index follows the first-named axis, column index the second; both ascend.
struct HeatmapGrid {
    Plane plane = Plane::XY;
    double slice = 0.0;
    int resolution = 0;
    std::vector<double> values;  // row-major

    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution) +
                      static_cast<std::size_t>(col)];
    }
};

/// Center coordinate of cell `index` when [0, side] is split into `resolution` cells.
inline double cell_center(int index, int resolution, double side) {
    return (static_cast<double>(index) + 0.5) * side / static_cast<double>(resolution);
}

/// 3D point for grid cell (row, col) of a plane at the given slice coordinate.
inline Vec3 grid_point(Plane plane, double slice, double row_coord, double col_coord) {
    switch (plane) {
        case Plane::XY: return {row_coord, col_coord, slice};
        case Plane::XZ: return {row_coord, slice, col_coord};
        case Plane::YZ: return {slice, row_coord, col_coord};
    }
    return {};
}

inline HeatmapGrid sample_heatmap(std::span<const BiomarkerSource> sources, FieldModel model,
                                  Plane plane, double slice, double side, int resolution,
                                  double d_min = kDefaultMinDistance) {
    if (resolution < 2) throw std::invalid_argument("heatmap resolution must be at least 2");
    if (!(slice >= 0.0 && slice <= side))
        throw std::invalid_argument("heatmap slice coordinate lies outside the cube");

    HeatmapGrid grid{plane, slice, resolution, {}};
    grid.values.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        const double u = cell_center(i, resolution, side);
        for (int j = 0; j < resolution; ++j) {
            const double v = cell_center(j, resolution, side);
            grid.values.push_back(total_field(grid_point(plane, slice, u, v), sources, model, d_min).concentration);
        }
    }
    return grid;
}

}  // namespace nanobot
