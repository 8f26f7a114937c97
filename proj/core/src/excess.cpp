#include "nlperim/excess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlperim {

double BoundaryWindow::total_length() const {
    double s = 0.0;
    for (const auto& seg : segments) s += seg.length();
    return s;
}

Vec2 BoundaryWindow::normal_sum() const {
    Vec2 v{0.0, 0.0};
    for (const auto& seg : segments) v += seg.normal * seg.length();
    return v;
}

BoundaryWindow boundary_window_ball(const PolygonSet& e, Vec2 x, double r) {
    if (!(r > 0.0)) throw std::domain_error("boundary window: r <= 0");
    BoundaryWindow w;
    w.base = x;
    w.radius = r;
    w.segments = e.boundary_in(DiscWindow{x, r});
    return w;
}

BoundaryWindow boundary_window_cylinder(const PolygonSet& e, Vec2 x, double r, Vec2 nu) {
    if (!(r > 0.0)) throw std::domain_error("boundary window: r <= 0");
    BoundaryWindow w;
    w.base = x;
    w.radius = r;
    w.direction = nu.normalized();
    w.segments = e.boundary_in(BoxWindow::cylinder(x, r, nu));
    return w;
}

Vec2 snap_to_boundary(const PolygonSet& e, Vec2 x, double snap_tol) {
    auto [p, d] = e.project_to_boundary(x);
    if (d > snap_tol)
        throw std::domain_error("snap_to_boundary: base point too far from the boundary");
    return p;
}

double spherical_excess(const PolygonSet& e, Vec2 x, double r, double snap_tol) {
    Vec2 base = snap_to_boundary(e, x, snap_tol);
    BoundaryWindow w = boundary_window_ball(e, base, r);
    if (w.segments.empty())
        throw std::domain_error("spherical_excess: empty boundary window");
    double length = w.total_length();
    // int |nu - nu_E|^2 / 2 = L - nu . sum(nu_E), minimal at the normalized
    // normal average, so the infimum needs no search
    double best = w.normal_sum().norm();
    return std::max(0.0, length - best) / r;
}

double cylindrical_excess(const PolygonSet& e, Vec2 x, double r, Vec2 nu, double snap_tol) {
    Vec2 base = snap_to_boundary(e, x, snap_tol);
    Vec2 dir = nu.normalized();
    BoundaryWindow w = boundary_window_cylinder(e, base, r, dir);
    if (w.segments.empty())
        throw std::domain_error("cylindrical_excess: empty boundary window");
    return std::max(0.0, w.total_length() - dir.dot(w.normal_sum())) / r;
}

namespace {

// Length, mean height and optimal-offset variance integral of the clipped
// boundary, heights measured along nu relative to x.
struct HeightVariance {
    double length = 0.0;
    double mean = 0.0;
    double variance_integral = 0.0;
};

HeightVariance height_variance(const std::vector<BoundarySegment>& segs, Vec2 x, Vec2 nu) {
    double len = 0.0, first = 0.0;
    for (const auto& s : segs) {
        double sa = (s.a - x).dot(nu);
        double sb = (s.b - x).dot(nu);
        double l = s.length();
        len += l;
        first += l * 0.5 * (sa + sb);
    }
    HeightVariance hv;
    hv.length = len;
    if (len == 0.0) return hv;
    hv.mean = first / len;
    double q = 0.0;
    for (const auto& s : segs) {
        double sa = (s.a - x).dot(nu) - hv.mean;
        double sb = (s.b - x).dot(nu) - hv.mean;
        q += s.length() * (sa * sa + sa * sb + sb * sb) / 3.0;
    }
    hv.variance_integral = q;
    return hv;
}

}  // namespace

double flatness(const PolygonSet& e, Vec2 x, double r, Vec2 nu, double snap_tol) {
    Vec2 base = snap_to_boundary(e, x, snap_tol);
    Vec2 dir = nu.normalized();
    BoundaryWindow w = boundary_window_cylinder(e, base, r, dir);
    if (w.segments.empty()) throw std::domain_error("flatness: empty boundary window");
    HeightVariance hv = height_variance(w.segments, base, dir);
    return hv.variance_integral / (r * r * r);
}

double slab_excess(const PolygonSet& e, const SlabFrame& f) {
    if (!(f.t > 0.0)) throw std::domain_error("slab_excess: t <= 0");
    BoxWindow box = BoxWindow::slab(f.center, f.t, f.nu, f.half_height);
    return e.perimeter_in(box) - 2.0 * f.t;
}

double slab_flatness(const PolygonSet& e, const SlabFrame& f, double c) {
    BoxWindow box = BoxWindow::slab(f.center, f.t, f.nu, f.half_height);
    auto segs = e.boundary_in(box);
    Vec2 dir = f.nu.normalized();
    double q = 0.0;
    for (const auto& s : segs) {
        double sa = (s.a - f.center).dot(dir) - c;
        double sb = (s.b - f.center).dot(dir) - c;
        q += s.length() * (sa * sa + sa * sb + sb * sb) / 3.0;
    }
    return q / (f.t * f.t);
}

double height(const PolygonSet& e, Vec2 x, double r, Vec2 nu, double snap_tol) {
    Vec2 base = snap_to_boundary(e, x, snap_tol);
    Vec2 dir = nu.normalized();
    BoundaryWindow w = boundary_window_cylinder(e, base, r, dir);
    if (w.segments.empty()) throw std::domain_error("height: empty boundary window");
    double sup = 0.0;
    for (const auto& s : w.segments) {
        sup = std::max(sup, std::abs((s.a - base).dot(dir)));
        sup = std::max(sup, std::abs((s.b - base).dot(dir)));
    }
    return sup;
}

std::vector<DensityRow> density_ratios(const PolygonSet& e, Vec2 x,
                                       const std::vector<double>& radii, double gamma,
                                       double snap_tol) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::domain_error("density_ratios: bad gamma");
    Vec2 base = snap_to_boundary(e, x, snap_tol);
    double lb = std::pow((1.0 - gamma) / 4.0, 2.0);
    std::vector<DensityRow> rows;
    for (double r : radii) {
        if (!(r > 0.0)) throw std::domain_error("density_ratios: r <= 0");
        DensityRow row;
        row.r = r;
        row.volume_ratio = e.disc_intersection_area(base, r) / (kPi * r * r);
        row.perimeter_ratio = e.perimeter_in(DiscWindow{base, r}) / r;
        row.lower_bound = lb;
        row.upper_bound = 1.0 - lb;
        row.volume_in_bounds = row.volume_ratio >= lb && row.volume_ratio <= 1.0 - lb;
        rows.push_back(row);
    }
    return rows;
}

ExcessProfile excess_profile(const PolygonSet& e, Vec2 x, const std::vector<double>& radii,
                             double snap_tol) {
    ExcessProfile p;
    p.base = snap_to_boundary(e, x, snap_tol);
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end(), std::greater<double>());
    for (double r : rs) {
        BoundaryWindow w = boundary_window_ball(e, p.base, r);
        if (w.segments.empty()) continue;
        double length = w.total_length();
        Vec2 vsum = w.normal_sum();
        double ex = std::max(0.0, length - vsum.norm()) / r;
        p.radii.push_back(r);
        p.excess.push_back(ex);
        Vec2 nu = vsum.norm() > 0.0 ? vsum.normalized() : Vec2{0.0, 1.0};
        BoundaryWindow cw = boundary_window_cylinder(e, p.base, r, nu);
        if (!cw.segments.empty()) {
            HeightVariance hv = height_variance(cw.segments, p.base, nu);
            p.flat.push_back(hv.variance_integral / (r * r * r));
            double sup = 0.0;
            for (const auto& s : cw.segments) {
                sup = std::max(sup, std::abs((s.a - p.base).dot(nu)));
                sup = std::max(sup, std::abs((s.b - p.base).dot(nu)));
            }
            p.heights.push_back(sup);
        } else {
            p.flat.push_back(0.0);
            p.heights.push_back(0.0);
        }
    }
    return p;
}

DecayFit fit_decay(const ExcessProfile& p, double floor) {
    DecayFit fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < p.radii.size(); ++i) {
        if (!(p.excess[i] > floor)) continue;
        double lx = std::log(p.radii[i]);
        double ly = std::log(p.excess[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 4) return fit;  // refused
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-30) return fit;
    fit.exponent = (n * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    double ss = 0.0;
    for (std::size_t i = 0; i < p.radii.size(); ++i) {
        if (!(p.excess[i] > floor)) continue;
        double res =
            std::log(p.excess[i]) - (fit.intercept + fit.exponent * std::log(p.radii[i]));
        ss += res * res;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points_used = n;
    fit.ok = true;
    return fit;
}

int scaling_inequality_violations(const ExcessProfile& p, double rel_tol) {
    int bad = 0;
    for (std::size_t i = 0; i + 1 < p.radii.size(); ++i) {
        double big_r = p.radii[i], small_r = p.radii[i + 1];  // decreasing order
        // e(r) <= (R/r)^{n-1} e(R), n = 2
        double bound = (big_r / small_r) * p.excess[i];
        if (p.excess[i + 1] > bound * (1.0 + rel_tol) + 1e-14) ++bad;
    }
    return bad;
}

}  // namespace nlperim
