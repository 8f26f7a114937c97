#pragma once

#include <optional>
#include <vector>

#include "nlperim/geometry.hpp"

namespace nlperim {

/// Boundary of E clipped to a ball or cylinder around a base point, with
/// normals and lengths; the carrier for all excess-type quantities.
struct BoundaryWindow {
    Vec2 base;
    double radius = 0.0;
    std::optional<Vec2> direction;
    std::vector<BoundarySegment> segments;

    double total_length() const;
    Vec2 normal_sum() const;  // sum of length-weighted unit normals
};

BoundaryWindow boundary_window_ball(const PolygonSet& e, Vec2 x, double r);
BoundaryWindow boundary_window_cylinder(const PolygonSet& e, Vec2 x, double r, Vec2 nu);

/// Nearest boundary point; throws when x is farther than snap_tol from it.
Vec2 snap_to_boundary(const PolygonSet& e, Vec2 x, double snap_tol = 0.1);

/// Spherical excess: inf over directions of the normal variance in B_r(x).
/// The infimum is attained at the normalized normal average, so no search.
double spherical_excess(const PolygonSet& e, Vec2 x, double r, double snap_tol = 0.1);

/// Cylindrical excess in C(x, r, nu) (half-width and half-height r).
double cylindrical_excess(const PolygonSet& e, Vec2 x, double r, Vec2 nu,
                          double snap_tol = 0.1);

/// Flatness: scale-normalized L2 distance of the boundary to its best
/// parallel line; the offset infimum is the length-weighted mean height.
double flatness(const PolygonSet& e, Vec2 x, double r, Vec2 nu, double snap_tol = 0.1);

/// Slab cylinder D_t(z) x (-1, 1) in an oriented frame.
struct SlabFrame {
    Vec2 center;
    double t = 0.0;
    Vec2 nu{0.0, 1.0};
    double half_height = 1.0;
};

/// scrE = P(E; K_t) - H^1(D_t): the cylindrical excess mass of the slab.
double slab_excess(const PolygonSet& e, const SlabFrame& f);
/// scrF = \int_{K_t} ((y - center) . nu - c)^2 / t^2.
double slab_flatness(const PolygonSet& e, const SlabFrame& f, double c);

/// Height spread sup |(y - x) . nu| over the boundary inside C(x, r, nu).
double height(const PolygonSet& e, Vec2 x, double r, Vec2 nu, double snap_tol = 0.1);

struct DensityRow {
    double r = 0.0;
    double volume_ratio = 0.0;     // |E ∩ B_r(x)| / |B_r|, the ball fraction
    double perimeter_ratio = 0.0;  // P(E; B_r(x)) / r
    double lower_bound = 0.0;      // ((1-gamma)/4)^2
    double upper_bound = 0.0;      // 1 - ((1-gamma)/4)^2
    bool volume_in_bounds = false;
};

std::vector<DensityRow> density_ratios(const PolygonSet& e, Vec2 x,
                                       const std::vector<double>& radii, double gamma,
                                       double snap_tol = 0.1);

struct ExcessProfile {
    Vec2 base;
    std::vector<double> radii;   // strictly decreasing
    std::vector<double> excess;  // spherical excess per radius
    std::vector<double> flat;    // flatness at the per-radius optimal direction
    std::vector<double> heights;
};

ExcessProfile excess_profile(const PolygonSet& e, Vec2 x, const std::vector<double>& radii,
                             double snap_tol = 0.1);

struct DecayFit {
    bool ok = false;
    double exponent = 0.0;
    double intercept = 0.0;
    int points_used = 0;
    double residual = 0.0;
};

/// Least-squares slope of log(excess) against log(r), above a numeric floor.
/// Refused (ok = false) with fewer than 4 usable radii.
DecayFit fit_decay(const ExcessProfile& p, double floor = 1e-13);

/// Pairwise check of the scaling inequality e(r) <= (R/r)^{n-1} e(R) on
/// adjacent profile radii; returns the number of violations.
int scaling_inequality_violations(const ExcessProfile& p, double rel_tol = 1e-9);

}  // namespace nlperim
