#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlperim/util.hpp"

namespace nlperim {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BBox {
    Vec2 lo, hi;
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double diag() const { return (hi - lo).norm(); }
};

/// A boundary piece with its outward unit normal.
struct BoundarySegment {
    Vec2 a, b;
    Vec2 normal;
    double length() const { return (b - a).norm(); }
    Vec2 midpoint() const { return (a + b) * 0.5; }
};

struct DiscWindow {
    Vec2 center;
    double radius;
};

/// Oriented box {|(p-center).u| < half_u, |(p-center).v| < half_v} with
/// v = axis and u = axis.perp(). Covers both the truncated cylinder
/// C(x, r, nu) (half_u = half_v = r) and the slab cylinder D_t x (-1, 1).
struct BoxWindow {
    Vec2 center;
    Vec2 axis;  // unit; the "vertical" direction nu
    double half_u = 0.0;
    double half_v = 0.0;

    static BoxWindow cylinder(Vec2 x, double r, Vec2 nu) {
        return {x, nu.normalized(), r, r};
    }
    static BoxWindow slab(Vec2 x, double t, Vec2 nu, double half_height = 1.0) {
        return {x, nu.normalized(), t, half_height};
    }
};

/// Closed polygonal chain, counterclockwise, positive area. The primary
/// geometric representation: perimeter and area are exact.
class PolygonSet {
  public:
    explicit PolygonSet(std::vector<Vec2> vertices, bool check_simple = true);

    const std::vector<Vec2>& vertices() const { return v_; }
    std::size_t size() const { return v_.size(); }
    const Vec2& vertex(std::size_t i) const { return v_[i % v_.size()]; }

    double area() const { return area_; }
    double perimeter() const { return perimeter_; }
    Vec2 centroid() const;
    BBox bbox() const;

    Vec2 edge_start(std::size_t i) const { return v_[i]; }
    Vec2 edge_end(std::size_t i) const { return v_[(i + 1) % v_.size()]; }
    /// Outward unit normal of edge i (counterclockwise chain).
    Vec2 edge_normal(std::size_t i) const;
    double edge_length(std::size_t i) const { return (edge_end(i) - edge_start(i)).norm(); }

    bool contains(const Vec2& p) const;
    bool is_simple() const;

    double perimeter_in(const DiscWindow& w) const;
    double perimeter_in(const BoxWindow& w) const;
    std::vector<BoundarySegment> boundary_in(const DiscWindow& w) const;
    std::vector<BoundarySegment> boundary_in(const BoxWindow& w) const;

    /// Exact area of the intersection with a disc (chord/arc decomposition).
    double disc_intersection_area(const Vec2& center, double radius) const;

    /// Closest boundary point to p, with the distance.
    std::pair<Vec2, double> project_to_boundary(const Vec2& p) const;

    PolygonSet translated(const Vec2& d) const;
    PolygonSet scaled(double s) const;  // about the origin
    PolygonSet rotated(double angle, const Vec2& about = {}) const;

  private:
    std::vector<Vec2> v_;
    double area_ = 0.0;
    double perimeter_ = 0.0;
};

/// Binary indicator on a uniform grid. Cell (i, j) covers
/// [origin + (i, j) h, origin + (i+1, j+1) h); occupancy refers to the center.
struct PixelSet {
    double h = 0.0;
    Vec2 origin;
    int nx = 0, ny = 0;
    double margin = 0.0;
    std::vector<std::uint8_t> occ;

    bool at(int i, int j) const { return occ[static_cast<std::size_t>(j) * nx + i] != 0; }
    void set(int i, int j, bool v) {
        occ[static_cast<std::size_t>(j) * nx + i] = v ? 1 : 0;
    }
    Vec2 center(int i, int j) const {
        return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h};
    }
    long count() const;
    double volume() const { return h * h * static_cast<double>(count()); }
};

/// Fractional cell coverage in [0, 1]; exact sub-cell areas of a polygon.
struct FracField {
    double h = 0.0;
    Vec2 origin;
    int nx = 0, ny = 0;
    double margin = 0.0;
    std::vector<double> a;

    double at(int i, int j) const { return a[static_cast<std::size_t>(j) * nx + i]; }
    double area() const;
};

/// Pixel occupied iff its center lies inside E (even-odd rule).
/// The window is the bounding box inflated by margin and snapped to h.
PixelSet rasterize(const PolygonSet& e, double h, double margin);

/// Exact per-cell coverage fractions on the same window layout.
FracField rasterize_fractional(const PolygonSet& e, double h, double margin);

/// Fractional coverage on an explicitly given window (shared grids for
/// set-pair comparisons).
FracField rasterize_fractional_window(const PolygonSet& e, double h, Vec2 origin, int nx, int ny);

void write_pgm(const PixelSet& p, const std::string& path);
PixelSet read_pgm(const std::string& path, double h = 1.0, Vec2 origin = {});

void write_polygon(const PolygonSet& e, const std::string& path);
PolygonSet read_polygon(const std::string& path);

PolygonSet regular_ngon(Vec2 center, double radius, int m);
PolygonSet ellipse_polygon(Vec2 center, double a, double b, int m);
/// r(theta) = base (1 + sum_j amp[j] cos((j+2) theta + phase[j])).
PolygonSet star_polygon(Vec2 center, double base, const std::vector<double>& amp,
                        const std::vector<double>& phase, int m);
/// Random star-shaped polygon with area pi, modes j = 2..(2+n_modes-1).
PolygonSet random_star(std::mt19937_64& rng, int m, int n_modes = 5, double max_amp = 0.3);

}  // namespace nlperim
