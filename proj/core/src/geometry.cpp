#include "nlperim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlperim {

namespace {

double shoelace(const std::vector<Vec2>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % v.size()];
        s += p.cross(q);
    }
    return 0.5 * s;
}

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    double d = (b - a).cross(c - a);
    double eps = 1e-14 * std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y),
                                   std::abs(c.x), std::abs(c.y), 1.0});
    if (d > eps) return 1;
    if (d < -eps) return -1;
    return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) - 1e-15 <= p.x && p.x <= std::max(a.x, b.x) + 1e-15 &&
           std::min(a.y, b.y) - 1e-15 <= p.y && p.y <= std::max(a.y, b.y) + 1e-15;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

double wrap_angle(const Vec2& x0, const Vec2& x1) {
    return std::atan2(x0.cross(x1), x0.dot(x1));
}

}  // namespace

PolygonSet::PolygonSet(std::vector<Vec2> vertices, bool check_simple) : v_(std::move(vertices)) {
    if (v_.size() < 3) throw std::invalid_argument("PolygonSet: fewer than 3 vertices");
    for (std::size_t i = 0; i < v_.size(); ++i) {
        if ((edge_end(i) - edge_start(i)).norm() == 0.0)
            throw std::invalid_argument("PolygonSet: zero-length edge");
    }
    area_ = shoelace(v_);
    if (!(area_ > 0.0))
        throw std::invalid_argument("PolygonSet: signed area must be positive (counterclockwise)");
    perimeter_ = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) perimeter_ += edge_length(i);
    if (check_simple && !is_simple())
        throw std::invalid_argument("PolygonSet: self-intersecting chain");
}

bool PolygonSet::is_simple() const {
    std::size_t m = v_.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if ((j + 1) % m == i || (i + 1) % m == j) continue;  // share a vertex
            if (segments_intersect(v_[i], v_[(i + 1) % m], v_[j], v_[(j + 1) % m])) return false;
        }
    }
    return true;
}

Vec2 PolygonSet::centroid() const {
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
        const Vec2& p = v_[i];
        const Vec2& q = v_[(i + 1) % v_.size()];
        double w = p.cross(q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {cx / (6.0 * area_), cy / (6.0 * area_)};
}

BBox PolygonSet::bbox() const {
    BBox b{v_[0], v_[0]};
    for (const Vec2& p : v_) {
        b.lo.x = std::min(b.lo.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y);
        b.hi.x = std::max(b.hi.x, p.x);
        b.hi.y = std::max(b.hi.y, p.y);
    }
    return b;
}

Vec2 PolygonSet::edge_normal(std::size_t i) const {
    Vec2 d = edge_end(i) - edge_start(i);
    double n = d.norm();
    return {d.y / n, -d.x / n};
}

bool PolygonSet::contains(const Vec2& p) const {
    bool in = false;
    std::size_t m = v_.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& a = v_[i];
        const Vec2& b = v_[(i + 1) % m];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xint) in = !in;
        }
    }
    return in;
}

std::vector<BoundarySegment> PolygonSet::boundary_in(const DiscWindow& w) const {
    std::vector<BoundarySegment> out;
    std::size_t m = v_.size();
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 p = v_[i] - w.center;
        Vec2 d = v_[(i + 1) % m] - v_[i];
        double a = d.norm2();
        if (a == 0.0) continue;
        double b = p.dot(d);
        double c0 = p.norm2() - w.radius * w.radius;
        double disc = b * b - a * c0;
        if (disc <= 0.0) continue;
        double sq = std::sqrt(disc);
        double t0 = std::max(0.0, (-b - sq) / a);
        double t1 = std::min(1.0, (-b + sq) / a);
        if (t1 <= t0) continue;
        BoundarySegment s;
        s.a = v_[i] + d * t0;
        s.b = v_[i] + d * t1;
        s.normal = edge_normal(i);
        if (s.length() > 0.0) out.push_back(s);
    }
    return out;
}

std::vector<BoundarySegment> PolygonSet::boundary_in(const BoxWindow& w) const {
    std::vector<BoundarySegment> out;
    Vec2 u = w.axis.perp();
    std::size_t m = v_.size();
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 p = v_[i] - w.center;
        double pu = p.dot(u), pv = p.dot(w.axis);
        Vec2 d = v_[(i + 1) % m] - v_[i];
        double du = d.dot(u), dv = d.dot(w.axis);
        double t0 = 0.0, t1 = 1.0;
        bool ok = true;
        // keep p(t) with -half <= coord(t) <= half; coord(t) = c + t*dc
        auto clip = [&](double c, double dc, double half) {
            // need -half <= c + t dc <= half
            if (dc == 0.0) {
                if (c < -half || c > half) ok = false;
                return;
            }
            double ta = (-half - c) / dc;
            double tb = (half - c) / dc;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        };
        clip(pu, du, w.half_u);
        if (!ok) continue;
        clip(pv, dv, w.half_v);
        if (!ok || t1 <= t0) continue;
        BoundarySegment s;
        s.a = v_[i] + d * t0;
        s.b = v_[i] + d * t1;
        s.normal = edge_normal(i);
        if (s.length() > 0.0) out.push_back(s);
    }
    return out;
}

double PolygonSet::perimeter_in(const DiscWindow& w) const {
    double len = 0.0;
    for (const auto& s : boundary_in(w)) len += s.length();
    return len;
}

double PolygonSet::perimeter_in(const BoxWindow& w) const {
    double len = 0.0;
    for (const auto& s : boundary_in(w)) len += s.length();
    return len;
}

double PolygonSet::disc_intersection_area(const Vec2& center, double radius) const {
    double area = 0.0;
    std::size_t m = v_.size();
    double r2 = radius * radius;
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 p = v_[i] - center;
        Vec2 q = v_[(i + 1) % m] - center;
        Vec2 d = q - p;
        double a = d.norm2();
        if (a == 0.0) continue;
        double b = p.dot(d);
        double c0 = p.norm2() - r2;
        double disc = b * b - a * c0;
        bool crossing = false;
        double s0 = 0.0, s1 = 0.0;
        if (disc > 0.0) {
            double sq = std::sqrt(disc);
            s0 = std::max(0.0, (-b - sq) / a);
            s1 = std::min(1.0, (-b + sq) / a);
            crossing = s1 > s0;
        }
        if (crossing) {
            Vec2 x0 = p + d * s0;
            Vec2 x1 = p + d * s1;
            area += 0.5 * x0.cross(x1);  // chord part inside
            if (s0 > 0.0) area += 0.5 * r2 * wrap_angle(p, x0);
            if (s1 < 1.0) area += 0.5 * r2 * wrap_angle(x1, q);
        } else if (c0 <= 0.0 && q.norm2() - r2 <= 0.0) {
            area += 0.5 * p.cross(q);  // fully inside the disc
        } else {
            area += 0.5 * r2 * wrap_angle(p, q);  // outside: sector sweep
        }
    }
    return area;
}

std::pair<Vec2, double> PolygonSet::project_to_boundary(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    Vec2 arg = v_[0];
    std::size_t m = v_.size();
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 a = v_[i];
        Vec2 d = v_[(i + 1) % m] - a;
        double t = d.norm2() > 0.0 ? std::clamp((p - a).dot(d) / d.norm2(), 0.0, 1.0) : 0.0;
        Vec2 c = a + d * t;
        double dist = (p - c).norm();
        if (dist < best) {
            best = dist;
            arg = c;
        }
    }
    return {arg, best};
}

PolygonSet PolygonSet::translated(const Vec2& d) const {
    std::vector<Vec2> w = v_;
    for (auto& p : w) p += d;
    return PolygonSet(std::move(w), false);
}

PolygonSet PolygonSet::scaled(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("PolygonSet::scaled: s <= 0");
    std::vector<Vec2> w = v_;
    for (auto& p : w) p = p * s;
    return PolygonSet(std::move(w), false);
}

PolygonSet PolygonSet::rotated(double angle, const Vec2& about) const {
    double c = std::cos(angle), s = std::sin(angle);
    std::vector<Vec2> w = v_;
    for (auto& p : w) {
        Vec2 q = p - about;
        p = about + Vec2{c * q.x - s * q.y, s * q.x + c * q.y};
    }
    return PolygonSet(std::move(w), false);
}

long PixelSet::count() const {
    long c = 0;
    for (auto v : occ) c += v;
    return c;
}

double FracField::area() const {
    double s = 0.0;
    for (double v : a) s += v;
    return s * h * h;
}

namespace {

struct Window {
    Vec2 origin;
    int nx, ny;
};

Window make_window(const PolygonSet& e, double h, double margin) {
    if (!(h > 0.0)) throw std::invalid_argument("rasterize: h <= 0");
    if (margin < 0.0) throw std::invalid_argument("rasterize: margin < 0");
    BBox b = e.bbox();
    Vec2 origin{b.lo.x - margin, b.lo.y - margin};
    int nx = static_cast<int>(std::ceil((b.width() + 2.0 * margin) / h)) + 1;
    int ny = static_cast<int>(std::ceil((b.height() + 2.0 * margin) / h)) + 1;
    if (static_cast<long>(nx) * ny > 64L * 1024 * 1024)
        throw ResourceError("rasterize: window exceeds the memory budget");
    return {origin, nx, ny};
}

}  // namespace

PixelSet rasterize(const PolygonSet& e, double h, double margin) {
    Window w = make_window(e, h, margin);
    PixelSet p;
    p.h = h;
    p.origin = w.origin;
    p.nx = w.nx;
    p.ny = w.ny;
    p.margin = margin;
    p.occ.assign(static_cast<std::size_t>(w.nx) * w.ny, 0);

    const auto& v = e.vertices();
    std::size_t m = v.size();
    std::vector<double> xs;
    for (int j = 0; j < w.ny; ++j) {
        double y = w.origin.y + (j + 0.5) * h;
        xs.clear();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % m];
            if ((a.y > y) != (b.y > y)) {
                xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            int i0 = static_cast<int>(std::ceil((xs[k] - w.origin.x) / h - 0.5));
            int i1 = static_cast<int>(std::floor((xs[k + 1] - w.origin.x) / h - 0.5));
            i0 = std::max(i0, 0);
            i1 = std::min(i1, w.nx - 1);
            for (int i = i0; i <= i1; ++i) p.set(i, j, true);
        }
    }
    return p;
}

namespace {

// Sutherland-Hodgman against sign * (y - level) <= 0.
void clip_halfplane_y(const std::vector<Vec2>& poly, double level, double sign,
                      std::vector<Vec2>& out) {
    out.clear();
    std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % m];
        double fa = sign * (a.y - level);
        double fb = sign * (b.y - level);
        bool ina = fa <= 0.0, inb = fb <= 0.0;
        if (ina) out.push_back(a);
        if (ina != inb) {
            double t = fa / (fa - fb);
            out.push_back(a + (b - a) * t);
        }
    }
}

}  // namespace

FracField rasterize_fractional(const PolygonSet& e, double h, double margin) {
    Window w = make_window(e, h, margin);
    FracField f = rasterize_fractional_window(e, h, w.origin, w.nx, w.ny);
    f.margin = margin;
    return f;
}

FracField rasterize_fractional_window(const PolygonSet& e, double h, Vec2 origin, int nx,
                                      int ny) {
    if (!(h > 0.0)) throw std::invalid_argument("rasterize: h <= 0");
    if (static_cast<long>(nx) * ny > 64L * 1024 * 1024)
        throw ResourceError("rasterize: window exceeds the memory budget");
    Window w{origin, nx, ny};
    FracField f;
    f.h = h;
    f.origin = w.origin;
    f.nx = w.nx;
    f.ny = w.ny;
    f.a.assign(static_cast<std::size_t>(w.nx) * w.ny, 0.0);

    BBox bb = e.bbox();
    int j_lo = std::max(0, static_cast<int>(std::floor((bb.lo.y - w.origin.y) / h)));
    int j_hi = std::min(w.ny - 1, static_cast<int>(std::floor((bb.hi.y - w.origin.y) / h)));
    std::vector<Vec2> band, tmp;
    for (int j = j_lo; j <= j_hi; ++j) {
        double y0 = w.origin.y + j * h;
        double y1 = y0 + h;
        clip_halfplane_y(e.vertices(), y0, -1.0, band);  // keep y >= y0
        if (band.size() < 3) continue;
        clip_halfplane_y(band, y1, 1.0, tmp);  // keep y <= y1
        if (tmp.size() < 3) continue;
        std::size_t m = tmp.size();
        for (std::size_t k = 0; k < m; ++k) {
            const Vec2& a = tmp[k];
            const Vec2& b = tmp[(k + 1) % m];
            double dx = b.x - a.x;
            if (dx == 0.0) continue;
            double xm = std::min(a.x, b.x), xM = std::max(a.x, b.x);
            int i0 = std::max(0, static_cast<int>(std::floor((xm - w.origin.x) / h)));
            int i1 = std::min(w.nx - 1, static_cast<int>(std::floor((xM - w.origin.x) / h)));
            for (int i = i0; i <= i1; ++i) {
                double xl = std::max(xm, w.origin.x + i * h);
                double xr = std::min(xM, w.origin.x + (i + 1) * h);
                if (xr <= xl) continue;
                double tl = (xl - a.x) / dx;
                double tr = (xr - a.x) / dx;
                double t_lo = std::min(tl, tr), t_hi = std::max(tl, tr);
                double tc = 0.5 * (t_lo + t_hi);
                double yc = a.y + tc * (b.y - a.y);
                // oriented piece of -∮(y - y0) dx, the band-polygon area in
                // this column (counterclockwise chain)
                double contrib = dx * (t_hi - t_lo) * (yc - y0);
                f.a[static_cast<std::size_t>(j) * w.nx + i] -= contrib;
            }
        }
    }
    double inv = 1.0 / (h * h);
    for (double& v : f.a) v = std::clamp(v * inv, 0.0, 1.0);
    return f;
}

void write_pgm(const PixelSet& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
    os << "P2\n" << p.nx << " " << p.ny << "\n1\n";
    for (int j = p.ny - 1; j >= 0; --j) {
        for (int i = 0; i < p.nx; ++i) {
            os << (p.at(i, j) ? 1 : 0) << (i + 1 == p.nx ? '\n' : ' ');
        }
    }
}

PixelSet read_pgm(const std::string& path, double h, Vec2 origin) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P2") throw std::runtime_error("read_pgm: not a plain PGM (P2) file");
    auto next_token = [&is]() {
        std::string t;
        while (is >> t) {
            if (t[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return t;
        }
        throw std::runtime_error("read_pgm: truncated file");
    };
    int nx = std::stoi(next_token());
    int ny = std::stoi(next_token());
    int maxv = std::stoi(next_token());
    if (maxv < 1) throw std::runtime_error("read_pgm: bad maxval");
    PixelSet p;
    p.h = h;
    p.origin = origin;
    p.nx = nx;
    p.ny = ny;
    p.occ.assign(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = ny - 1; j >= 0; --j) {
        for (int i = 0; i < nx; ++i) {
            int v = std::stoi(next_token());
            p.set(i, j, v > maxv / 2);
        }
    }
    return p;
}

void write_polygon(const PolygonSet& e, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_polygon: cannot open " + path);
    os.precision(17);
    for (const Vec2& v : e.vertices()) os << v.x << " " << v.y << "\n";
}

PolygonSet read_polygon(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_polygon: cannot open " + path);
    std::vector<Vec2> v;
    double x, y;
    while (is >> x >> y) v.push_back({x, y});
    return PolygonSet(std::move(v));
}

PolygonSet regular_ngon(Vec2 center, double radius, int m) {
    if (m < 3) throw std::invalid_argument("regular_ngon: m < 3");
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        double t = 2.0 * kPi * k / m;
        v.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    return PolygonSet(std::move(v), false);
}

PolygonSet ellipse_polygon(Vec2 center, double a, double b, int m) {
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        double t = 2.0 * kPi * k / m;
        v.push_back({center.x + a * std::cos(t), center.y + b * std::sin(t)});
    }
    return PolygonSet(std::move(v), false);
}

PolygonSet star_polygon(Vec2 center, double base, const std::vector<double>& amp,
                        const std::vector<double>& phase, int m) {
    if (amp.size() != phase.size()) throw std::invalid_argument("star_polygon: size mismatch");
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        double t = 2.0 * kPi * k / m;
        double r = 1.0;
        for (std::size_t j = 0; j < amp.size(); ++j) {
            r += amp[j] * std::cos((static_cast<double>(j) + 2.0) * t + phase[j]);
        }
        r = std::max(0.2, r) * base;
        v.push_back({center.x + r * std::cos(t), center.y + r * std::sin(t)});
    }
    return PolygonSet(std::move(v), false);
}

PolygonSet random_star(std::mt19937_64& rng, int m, int n_modes, double max_amp) {
    std::uniform_real_distribution<double> A(-max_amp, max_amp);
    std::uniform_real_distribution<double> P(0.0, 2.0 * kPi);
    std::vector<double> amp(static_cast<std::size_t>(n_modes));
    std::vector<double> phase(static_cast<std::size_t>(n_modes));
    double total = 0.0;
    for (int j = 0; j < n_modes; ++j) {
        amp[static_cast<std::size_t>(j)] = A(rng);
        phase[static_cast<std::size_t>(j)] = P(rng);
        total += std::abs(amp[static_cast<std::size_t>(j)]);
    }
    if (total > 0.45) {
        for (auto& a : amp) a *= 0.45 / total;
    }
    PolygonSet raw = star_polygon({0.0, 0.0}, 1.0, amp, phase, m);
    return raw.scaled(std::sqrt(kPi / raw.area()));
}

}  // namespace nlperim
