#include "nlperim/variation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace nlperim {

namespace {

// C^2 bump profile on [0, 1)
double bump(double s) {
    if (s >= 1.0) return 0.0;
    double t = 1.0 - s * s;
    return t * t * t;
}
double bump_deriv(double s) {
    if (s >= 1.0) return 0.0;
    double t = 1.0 - s * s;
    return -6.0 * s * t * t;
}

// quintic cutoff: 1 below a, 0 above 1, arguments s = r / radius
double cutoff(double s, double a) {
    if (s <= a) return 1.0;
    if (s >= 1.0) return 0.0;
    double u = (s - a) / (1.0 - a);
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}
double cutoff_deriv(double s, double a) {
    if (s <= a || s >= 1.0) return 0.0;
    double u = (s - a) / (1.0 - a);
    return -30.0 * u * u * (1.0 - u) * (1.0 - u) / (1.0 - a);
}

}  // namespace

VectorField VectorField::constant(Vec2 v) {
    VectorField f;
    f.family_ = Family::constant;
    f.v_ = v;
    f.radius_ = std::numeric_limits<double>::infinity();
    return f;
}

VectorField VectorField::translation_bump(Vec2 v, Vec2 center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("translation_bump: radius <= 0");
    VectorField f;
    f.family_ = Family::translation_bump;
    f.v_ = v;
    f.center_ = center;
    f.radius_ = radius;
    return f;
}

VectorField VectorField::normal_bump(double amplitude, Vec2 center, Vec2 normal,
                                     double radius) {
    VectorField f = translation_bump(normal.normalized() * amplitude, center, radius);
    f.family_ = Family::normal_bump;
    return f;
}

VectorField VectorField::linear_bump(Mat2 a, Vec2 center, double inner, double radius) {
    if (!(radius > 0.0 && inner >= 0.0 && inner < radius))
        throw std::invalid_argument("linear_bump: need 0 <= inner < radius");
    VectorField f;
    f.family_ = Family::linear_bump;
    f.a_ = a;
    f.center_ = center;
    f.radius_ = radius;
    f.inner_ = inner / radius;
    return f;
}

VectorField VectorField::dilation_bump(double inner, double radius) {
    VectorField f = linear_bump(Mat2{1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}, inner, radius);
    f.family_ = Family::dilation_bump;
    return f;
}

Vec2 VectorField::value(Vec2 x) const {
    switch (family_) {
        case Family::constant:
            return v_;
        case Family::translation_bump:
        case Family::normal_bump: {
            double s = (x - center_).norm() / radius_;
            return v_ * bump(s);
        }
        case Family::linear_bump:
        case Family::dilation_bump: {
            Vec2 d = x - center_;
            double s = d.norm() / radius_;
            return a_.apply(d) * cutoff(s, inner_);
        }
    }
    return {};
}

Mat2 VectorField::jacobian(Vec2 x) const {
    switch (family_) {
        case Family::constant:
            return {};
        case Family::translation_bump:
        case Family::normal_bump: {
            Vec2 d = x - center_;
            double r = d.norm();
            if (r == 0.0 || r >= radius_) return {};
            double s = r / radius_;
            Vec2 g = d * (bump_deriv(s) / (radius_ * r));
            return {v_.x * g.x, v_.x * g.y, v_.y * g.x, v_.y * g.y};
        }
        case Family::linear_bump:
        case Family::dilation_bump: {
            Vec2 d = x - center_;
            double r = d.norm();
            double s = r / radius_;
            double psi = cutoff(s, inner_);
            Mat2 out{a_.a * psi, a_.b * psi, a_.c * psi, a_.d * psi};
            if (r > 0.0 && s > inner_ && s < 1.0) {
                Vec2 ad = a_.apply(d);
                Vec2 g = d * (cutoff_deriv(s, inner_) / (radius_ * r));
                out.a += ad.x * g.x;
                out.b += ad.x * g.y;
                out.c += ad.y * g.x;
                out.d += ad.y * g.y;
            }
            return out;
        }
    }
    return {};
}

double VectorField::jacobian_bound() const {
    if (family_ == Family::constant) return 0.0;
    double worst = 0.0;
    for (int i = 0; i <= 512; ++i) {
        double r = radius_ * i / 512.0;
        Mat2 j = jacobian(center_ + Vec2{r, 0.0});
        worst = std::max(worst, std::sqrt(j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d));
    }
    return worst;
}

double boundary_divergence(const VectorField& t, Vec2 point, Vec2 normal) {
    Mat2 j = t.jacobian(point);
    Vec2 nu = normal.normalized();
    return j.trace() - nu.dot(j.apply(nu));
}

namespace {

constexpr double kGx8[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                            0.9602898564975363};
constexpr double kGw8[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                            0.1012285362903763};
constexpr double kGx4[2] = {0.3399810435848563, 0.8611363115940526};
constexpr double kGw4[2] = {0.6521451548625461, 0.3478548451374538};

template <typename F>
double gauss8(const F& f, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        s += kGw8[i] * (f(mid + half * kGx8[i]) + f(mid - half * kGx8[i]));
    }
    return s * half;
}

struct GaussNode {
    double t, w;  // on [0, 1]
};

std::vector<GaussNode> edge_nodes(int order) {
    std::vector<GaussNode> ns;
    if (order >= 8) {
        for (int i = 0; i < 4; ++i) {
            ns.push_back({0.5 + 0.5 * kGx8[i], 0.5 * kGw8[i]});
            ns.push_back({0.5 - 0.5 * kGx8[i], 0.5 * kGw8[i]});
        }
    } else if (order >= 4) {
        for (int i = 0; i < 2; ++i) {
            ns.push_back({0.5 + 0.5 * kGx4[i], 0.5 * kGw4[i]});
            ns.push_back({0.5 - 0.5 * kGx4[i], 0.5 * kGw4[i]});
        }
    } else {
        double x = 0.5773502691896258;
        ns.push_back({0.5 + 0.5 * x, 0.5});
        ns.push_back({0.5 - 0.5 * x, 0.5});
    }
    return ns;
}

// Composite Gauss over [a, b] split at the given interior points and then
// paneled at the resolution scale.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& splits, double scale) {
    if (!(b > a)) return 0.0;
    std::vector<double> bounds{a};
    for (double s : splits) {
        if (s > a + 1e-15 && s < b - 1e-15) bounds.push_back(s);
    }
    bounds.push_back(b);
    std::sort(bounds.begin(), bounds.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        double lo = bounds[i], hi = bounds[i + 1];
        int n = std::max(1, std::min(48, static_cast<int>(std::ceil((hi - lo) / (0.5 * scale)))));
        for (int p = 0; p < n; ++p) {
            acc += gauss8(f, lo + (hi - lo) * p / n, lo + (hi - lo) * (p + 1) / n);
        }
    }
    return acc;
}

// Graded dyadic panels from `shared` into the interval of width `len`,
// direction sign = +1 (to the right of shared) or -1.
double integrate_graded(const std::function<double(double)>& f, double shared, double len,
                        int sign, const std::vector<double>& splits, double scale) {
    double acc = 0.0;
    double w = len;
    for (int k = 0; k < 60; ++k) {
        double hi = w, lo = 0.5 * w;
        if (hi < 1e-15 * len) break;
        double a = sign > 0 ? shared + lo : shared - hi;
        double b = sign > 0 ? shared + hi : shared - lo;
        double inc = integrate_split(f, a, b, splits, scale);
        acc += inc;
        if (acc != 0.0 && std::abs(inc) < 1e-13 * std::abs(acc) && k > 6) break;
        w = lo;
    }
    return acc;
}

struct SliceGeometry {
    Vec2 dir;
    Vec2 point;
    std::vector<Interval> inside;
    std::vector<Interval> gaps;
};

SliceGeometry slice_geometry(const PolygonSet& e, Vec2 dir, double offset) {
    SliceFrame f = line_trace(e, dir, offset);
    SliceGeometry g;
    g.dir = f.dir;
    g.point = f.point;
    g.inside = f.trace.parts();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (!g.inside.empty()) {
        g.gaps.push_back({-kInf, g.inside.front().a});
        for (std::size_t i = 0; i + 1 < g.inside.size(); ++i)
            g.gaps.push_back({g.inside[i].b, g.inside[i + 1].a});
        g.gaps.push_back({g.inside.back().b, kInf});
    }
    return g;
}

// \int_I h(s) K_J(s) ds with K_J(s) the rho_eps mass of the gap J seen from s.
double interval_gap_integral(const std::function<double(double)>& h, const KernelCalculus& calc,
                             const std::vector<double>& radial_breaks, double i1, double i2,
                             double j1, double j2) {
    bool j_right = j1 >= i2 - 1e-13;
    auto kj = [&](double s) {
        double d1, d2;
        if (j_right) {
            d1 = j1 - s;
            d2 = std::isinf(j2) ? j2 : j2 - s;
        } else {
            d1 = s - j2;
            d2 = std::isinf(-j1) ? std::numeric_limits<double>::infinity() : s - j1;
        }
        double v = calc.S(std::max(d1, 1e-14)) - (std::isinf(d2) ? 0.0 : calc.S(d2));
        return 0.5 * std::max(0.0, v);
    };
    auto f = [&](double s) { return h(s) * kj(s); };

    // distances to the gap endpoints cross the kernel breakpoints here
    std::vector<double> splits;
    for (double bp : radial_breaks) {
        if (j_right) {
            splits.push_back(j1 - bp);
            if (std::isfinite(j2)) splits.push_back(j2 - bp);
        } else {
            splits.push_back(j2 + bp);
            if (std::isfinite(-j1)) splits.push_back(j1 + bp);
        }
    }
    double len = i2 - i1;
    double scale = calc.eps();
    bool shared = (j_right && std::abs(j1 - i2) < 1e-13) ||
                  (!j_right && std::abs(i1 - j2) < 1e-13);
    if (!shared) return integrate_split(f, i1, i2, splits, scale);
    if (j_right) return integrate_graded(f, i2, len, -1, splits, scale);
    return integrate_graded(f, i1, len, +1, splits, scale);
}

}  // namespace

VariationBreakdown first_variation(const PolygonSet& e, const VectorField& t,
                                   const RadialKernel& k, double eps, double gamma,
                                   const VariationQuadrature& q) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::domain_error("first_variation: bad gamma");
    VariationBreakdown out;
    out.gamma = gamma;

    double bdiv = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        Vec2 a = e.edge_start(i), b = e.edge_end(i);
        Vec2 nu = e.edge_normal(i);
        double len = e.edge_length(i);
        auto f = [&](double s) { return boundary_divergence(t, a + (b - a) * s, nu); };
        bdiv += len * gauss8(f, 0.0, 1.0);
    }
    out.boundary_div = bdiv;

    if (gamma == 0.0 && t.family() == VectorField::Family::constant) {
        out.total = bdiv;
        return out;
    }

    KernelCalculus calc(k, eps);
    std::vector<double> radial_breaks;
    for (double bp : k.breakpoints()) radial_breaks.push_back(eps * bp);

    // volume term by 1D slicing over stratified directions and offsets
    std::vector<double> per_dir(static_cast<std::size_t>(q.n_dirs), 0.0);
    parallel_for(static_cast<std::size_t>(q.n_dirs), q.threads, [&](std::size_t di) {
        double theta = (static_cast<double>(di) + 0.5) * kPi / q.n_dirs;
        Vec2 dir{std::cos(theta), std::sin(theta)};
        Vec2 nrm = dir.perp();
        double lo = 1e300, hi = -1e300;
        for (const Vec2& p : e.vertices()) {
            double x = p.dot(nrm);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        double w = hi - lo;
        double acc = 0.0;
        for (int j = 0; j < q.n_offsets; ++j) {
            double x = lo + (static_cast<double>(j) + 0.5) * w / q.n_offsets;
            SliceGeometry g = slice_geometry(e, dir, x);
            auto h = [&](double s) { return t.divergence(g.point + g.dir * s); };
            double inner = 0.0;
            for (const auto& iv : g.inside) {
                for (const auto& gap : g.gaps) {
                    inner += interval_gap_integral(h, calc, radial_breaks, iv.a, iv.b, gap.a,
                                                   gap.b);
                }
            }
            acc += inner;
        }
        per_dir[di] = 0.5 * kPi * w * acc / q.n_offsets;
    });
    double vol = 0.0;
    for (double v : per_dir) vol += v;
    out.volume = vol / q.n_dirs;

    // boundary x volume term: angular rays from boundary Gauss nodes
    RadialKernel geps = rescale(k, eps);
    auto nodes = edge_nodes(q.edge_gauss);
    std::vector<double> per_edge(e.size(), 0.0);
    parallel_for(e.size(), q.threads, [&](std::size_t ei) {
        Vec2 a = e.edge_start(ei), b = e.edge_end(ei);
        Vec2 nu = e.edge_normal(ei);
        double len = e.edge_length(ei);
        double acc = 0.0;
        for (const auto& gn : nodes) {
            Vec2 y = a + (b - a) * gn.t;
            Vec2 y_in = y - nu * 1e-9;  // nudge inside: clean ray traces
            Mat2 jac = t.jacobian(y);
            Vec2 ty = t.value(y);
            double inner_sum = 0.0;
            for (int l = 0; l < q.n_rays; ++l) {
                double phi = (static_cast<double>(l) + 0.5) * 2.0 * kPi / q.n_rays;
                Vec2 sigma{std::cos(phi), std::sin(phi)};
                SliceFrame tr = line_trace(e, sigma, y_in.dot(sigma.perp()));
                double base = (y_in - tr.point).dot(sigma);
                double lead = nu.dot(jac.apply(sigma));
                for (const auto& iv : tr.trace.parts()) {
                    double r0 = std::max(0.0, iv.a - base);
                    double r1 = iv.b - base;
                    if (!(r1 > r0)) continue;
                    if (r0 < 1e-9) {
                        // exact radial integral of the linear lead, graded
                        // panels for the superlinear remainder
                        inner_sum += lead * geps.profile_power_integral(2.0, 0.0, r1).value;
                        auto rem = [&](double r) {
                            Vec2 x = y + sigma * r;
                            return r * geps.profile(r) *
                                   ((t.value(x) - ty).dot(nu) - lead * r);
                        };
                        inner_sum += integrate_graded(rem, 0.0, r1, +1, radial_breaks, eps);
                    } else {
                        auto f = [&](double r) {
                            Vec2 x = y + sigma * r;
                            return r * geps.profile(r) * (t.value(x) - ty).dot(nu);
                        };
                        inner_sum += integrate_split(f, r0, r1, radial_breaks, eps);
                    }
                }
            }
            acc += gn.w * len * inner_sum * (2.0 * kPi / q.n_rays);
        }
        per_edge[ei] = acc;
    });
    double bvol = 0.0;
    for (double v : per_edge) bvol += v;
    out.boundary_vol = bvol;

    out.total = out.boundary_div - 2.0 * gamma * (out.volume + out.boundary_vol);
    return out;
}

namespace {

double sliced_energy(const PolygonSet& e, const RadialKernel& k, double eps, double gamma,
                     const SliceSampling& s) {
    if (gamma == 0.0) return e.perimeter();
    SlicedEstimate est = sliced_perimeter_estimate(e, k, eps, s);
    return e.perimeter() - gamma * est.nonlocal;
}

PolygonSet transported(const PolygonSet& e, const VectorField& t, double step) {
    std::vector<Vec2> v = e.vertices();
    for (auto& p : v) p += t.value(p) * step;
    return PolygonSet(std::move(v), false);
}

}  // namespace

FdResult first_variation_fd(const PolygonSet& e, const VectorField& t, const RadialKernel& k,
                            double eps, double gamma, const FdOptions& opt) {
    double jb = t.jacobian_bound();
    double step = opt.t_step > 0.0 ? opt.t_step : (jb > 0.0 ? 0.05 / jb : 0.02);
    if (step * jb > 0.1)
        throw std::domain_error("first_variation_fd: step outside the diffeomorphism regime");

    Vec2 c = e.centroid();
    double radius = 0.0;
    for (const Vec2& p : e.vertices()) radius = std::max(radius, (p - c).norm());
    auto energy_at = [&](double tau) {
        PolygonSet moved = transported(e, t, tau);
        SliceSampling s;
        s.n_dirs = opt.n_dirs;
        s.n_offsets = opt.n_offsets;
        s.jitter = false;
        s.anchor = std::make_pair(moved.centroid(), radius + 0.3);
        return sliced_energy(moved, k, eps, gamma, s);
    };
    auto central = [&](double tau) { return (energy_at(tau) - energy_at(-tau)) / (2.0 * tau); };
    FdResult r;
    r.t_step = step;
    r.raw_coarse = central(step);
    r.raw_fine = central(0.5 * step);
    r.value = (4.0 * r.raw_fine - r.raw_coarse) / 3.0;
    r.extrap_err = std::abs(r.value - r.raw_fine);
    return r;
}

double ptilde(const PolygonSet& e, const RadialKernel& k, double eps,
              const VariationQuadrature& q) {
    RadialKernel geps = rescale(k, eps);
    auto nodes = edge_nodes(q.edge_gauss);
    std::vector<double> per_edge(e.size(), 0.0);
    parallel_for(e.size(), q.threads, [&](std::size_t ei) {
        Vec2 a = e.edge_start(ei), b = e.edge_end(ei);
        Vec2 nu = e.edge_normal(ei);
        double len = e.edge_length(ei);
        double acc = 0.0;
        for (const auto& gn : nodes) {
            Vec2 y = a + (b - a) * gn.t;
            Vec2 y_in = y - nu * 1e-9;
            Vec2 vsum{0.0, 0.0};
            for (int l = 0; l < q.n_rays; ++l) {
                double phi = (static_cast<double>(l) + 0.5) * 2.0 * kPi / q.n_rays;
                Vec2 sigma{std::cos(phi), std::sin(phi)};
                SliceFrame tr = line_trace(e, sigma, y_in.dot(sigma.perp()));
                double base = (y_in - tr.point).dot(sigma);
                double radial = 0.0;
                for (const auto& iv : tr.trace.parts()) {
                    double r0 = std::max(0.0, iv.a - base);
                    double r1 = iv.b - base;
                    if (!(r1 > r0)) continue;
                    radial += geps.profile_power_integral(2.0, r0, r1).value;
                }
                vsum -= sigma * radial;
            }
            acc += gn.w * len * nu.dot(vsum) * (2.0 * kPi / q.n_rays);
        }
        per_edge[ei] = acc;
    });
    double total = 0.0;
    for (double v : per_edge) total += v;
    return 2.0 * total;
}

ScalingDerivativeReport scaling_derivative_check(const PolygonSet& e, const RadialKernel& k,
                                                 double eps, double t,
                                                 const VariationQuadrature& q) {
    if (!(t > 0.0)) throw std::domain_error("scaling_derivative_check: t <= 0");
    ScalingDerivativeReport rep;
    auto peps_of = [&](double tau) {
        PolygonSet scaled = e.scaled(tau);
        SliceSampling s;
        s.n_dirs = 512;
        s.n_offsets = 512;
        Vec2 c = scaled.centroid();
        double radius = 0.0;
        for (const Vec2& p : scaled.vertices()) radius = std::max(radius, (p - c).norm());
        s.anchor = std::make_pair(c, radius + 0.2);
        return sliced_perimeter_estimate(scaled, k, eps, s).nonlocal;
    };
    double dt = 0.02 * t;
    double d1 = (peps_of(t + dt) - peps_of(t - dt)) / (2.0 * dt);
    double d2 = (peps_of(t + 0.5 * dt) - peps_of(t - 0.5 * dt)) / dt;
    rep.fd = (4.0 * d2 - d1) / 3.0;

    PolygonSet te = e.scaled(t);
    double peps_t = peps_of(t);
    double pt = ptilde(te, k, eps, q);
    rep.ptilde_value = pt;
    rep.formula = (2.0 / t) * peps_t - (1.0 / t) * pt;
    rep.rel_err = std::abs(rep.fd - rep.formula) / std::max(std::abs(rep.fd), 1e-300);
    MomentValue i1 = moment(k, 1);
    rep.ptilde_bound = 2.0 * te.perimeter() * i1.value;
    rep.ptilde_bound_ok = std::abs(pt) <= rep.ptilde_bound * (1.0 + 1e-9);
    return rep;
}

double lambda0(int n, double gamma) {
    if (n < 2) throw std::domain_error("lambda0: n < 2");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("lambda0: gamma not in (0,1)");
    double ball_perimeter = n * unit_ball_volume(n);  // P(B_1) = n omega_n
    double ball_volume = unit_ball_volume(n);
    double c1 = n + 2.0 / k1n(n);
    return (1.0 + c1) * ball_perimeter / ((1.0 - gamma) * ball_volume);
}

}  // namespace nlperim
