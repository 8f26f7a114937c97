#include "nlperim/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlperim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

IntervalUnion::IntervalUnion(std::vector<Interval> parts) : parts_(std::move(parts)) {
    for (const auto& p : parts_) {
        if (!(p.a < p.b)) throw std::invalid_argument("IntervalUnion: empty or inverted interval");
    }
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval& x, const Interval& y) { return x.a < y.a; });
    std::vector<Interval> merged;
    for (const auto& p : parts_) {
        if (!merged.empty() && p.a <= merged.back().b) {
            merged.back().b = std::max(merged.back().b, p.b);
        } else {
            merged.push_back(p);
        }
    }
    parts_ = std::move(merged);
}

double IntervalUnion::total_length() const {
    double s = 0.0;
    for (const auto& p : parts_) s += p.length();
    return s;
}

std::vector<IntervalUnion::Endpoint> IntervalUnion::endpoints() const {
    std::vector<Endpoint> e;
    for (const auto& p : parts_) {
        if (std::isfinite(p.a)) e.push_back({p.a, +1});
        if (std::isfinite(p.b)) e.push_back({p.b, -1});
    }
    return e;
}

int IntervalUnion::endpoint_count() const { return static_cast<int>(endpoints().size()); }

SliceFrame line_trace(const PolygonSet& e, Vec2 sigma, double offset) {
    Vec2 dir = sigma.normalized();
    Vec2 nrm = dir.perp();
    const auto& v = e.vertices();
    std::size_t m = v.size();

    for (int attempt = 0; attempt < 6; ++attempt) {
        double off = offset + attempt * 1e-12;
        Vec2 o = nrm * off;
        bool degenerate = false;
        std::vector<SliceFrame::Crossing> cr;
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % m];
            double da = (a - o).dot(nrm);
            double db = (b - o).dot(nrm);
            if (da == 0.0 || db == 0.0) {
                degenerate = true;  // vertex exactly on the line
                break;
            }
            if ((da > 0.0) == (db > 0.0)) continue;
            double s = da / (da - db);
            Vec2 x = a + (b - a) * s;
            cr.push_back({(x - o).dot(dir), i});
        }
        if (degenerate || (cr.size() % 2) != 0) continue;
        std::sort(cr.begin(), cr.end(),
                  [](const SliceFrame::Crossing& x, const SliceFrame::Crossing& y) {
                      return x.t < y.t;
                  });
        std::vector<Interval> parts;
        for (std::size_t i = 0; i + 1 < cr.size(); i += 2) {
            if (cr[i + 1].t > cr[i].t) parts.push_back({cr[i].t, cr[i + 1].t});
        }
        SliceFrame f;
        f.dir = dir;
        f.point = o;
        f.crossings = std::move(cr);
        f.trace = IntervalUnion(std::move(parts));
        f.endpoint_count = f.trace.endpoint_count();
        return f;
    }
    throw std::runtime_error("line_trace: persistent degeneracy after perturbation");
}

double oned_nonlocal_perimeter(const IntervalUnion& u, const KernelCalculus& calc) {
    auto ep = u.endpoints();
    std::size_t k = ep.size();
    double mass = calc.mass();
    double s = mass * static_cast<double>(k);  // diagonal terms R(0)
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            double r = calc.R(std::abs(ep[j].c - ep[i].c));
            s += 2.0 * ep[i].sign * ep[j].sign * r;
        }
    }
    return s;
}

double oned_nonlocal_perimeter(const IntervalUnion& u, const RadialKernel& k, double eps) {
    return oned_nonlocal_perimeter(u, KernelCalculus(k, eps));
}

double oned_critical_energy(const IntervalUnion& u, const KernelCalculus& calc) {
    double f = static_cast<double>(u.endpoint_count()) - oned_nonlocal_perimeter(u, calc);
    if (f < -1e-9)
        throw std::runtime_error("oned_critical_energy: negative beyond tolerance");
    return std::max(0.0, f);
}

double oned_critical_energy(const IntervalUnion& u, const RadialKernel& k, double eps) {
    return oned_critical_energy(u, KernelCalculus(k, eps));
}

SlicedEstimate sliced_perimeter_estimate(const PolygonSet& e, const RadialKernel& k, double eps,
                                         const SliceSampling& s) {
    if (s.n_dirs < 1 || s.n_offsets < 1)
        throw std::invalid_argument("sliced_perimeter_estimate: need at least one stratum");
    KernelCalculus calc(k, eps);
    std::mt19937_64 rng = make_rng(s.seed, 77);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    RunningStat stat_p, stat_pe, stat_f;
    for (int i = 0; i < s.n_dirs; ++i) {
        double jd = s.jitter ? U(rng) : 0.5;
        double theta = (static_cast<double>(i) + jd) * kPi / s.n_dirs;
        Vec2 dir{std::cos(theta), std::sin(theta)};
        Vec2 nrm = dir.perp();
        double lo, hi;
        if (s.anchor) {
            double c = s.anchor->first.dot(nrm);
            lo = c - s.anchor->second;
            hi = c + s.anchor->second;
        } else {
            lo = kInf;
            hi = -kInf;
            for (const Vec2& p : e.vertices()) {
                double x = p.dot(nrm);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        double w = hi - lo;
        double sum_h0 = 0.0, sum_p1 = 0.0;
        for (int j = 0; j < s.n_offsets; ++j) {
            double jo = s.jitter ? U(rng) : 0.5;
            double x = lo + (static_cast<double>(j) + jo) * w / s.n_offsets;
            SliceFrame f = line_trace(e, dir, x);
            sum_h0 += static_cast<double>(f.endpoint_count);
            if (!f.trace.empty()) sum_p1 += oned_nonlocal_perimeter(f.trace, calc);
        }
        double yp = 0.5 * kPi * w * sum_h0 / s.n_offsets;
        double ype = 0.5 * kPi * w * sum_p1 / s.n_offsets;
        stat_p.add(yp);
        stat_pe.add(ype);
        stat_f.add(yp - ype);
    }
    SlicedEstimate out;
    out.perimeter = stat_p.mean;
    out.perimeter_stderr = stat_p.stderr_of_mean();
    out.nonlocal = stat_pe.mean;
    out.nonlocal_stderr = stat_pe.stderr_of_mean();
    out.critical = stat_f.mean;
    out.critical_stderr = stat_f.stderr_of_mean();
    out.n_slices = static_cast<long>(s.n_dirs) * s.n_offsets;
    return out;
}

double shadow_length(const std::vector<Segment>& boundary, Vec2 sigma) {
    Vec2 axis = sigma.normalized().perp();
    std::vector<std::pair<double, double>> iv;
    iv.reserve(boundary.size());
    for (const Segment& s : boundary) {
        double x0 = s.a.dot(axis);
        double x1 = s.b.dot(axis);
        if (x0 > x1) std::swap(x0, x1);
        if (x1 > x0) iv.emplace_back(x0, x1);
    }
    std::sort(iv.begin(), iv.end());
    double total = 0.0;
    double cur_lo = 0.0, cur_hi = -kInf;
    for (const auto& [a, b] : iv) {
        if (a > cur_hi) {
            if (cur_hi > cur_lo) total += cur_hi - cur_lo;
            cur_lo = a;
            cur_hi = b;
        } else {
            cur_hi = std::max(cur_hi, b);
        }
    }
    if (cur_hi > cur_lo) total += cur_hi - cur_lo;
    return total;
}

ShadowEstimate shadow_average(const std::vector<Segment>& boundary, int n_dirs, bool jitter,
                              std::uint64_t seed) {
    if (n_dirs < 1) throw std::invalid_argument("shadow_average: n_dirs < 1");
    std::mt19937_64 rng = make_rng(seed, 99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    RunningStat st;
    for (int i = 0; i < n_dirs; ++i) {
        double j = jitter ? U(rng) : 0.5;
        double theta = (static_cast<double>(i) + j) * kPi / n_dirs;
        Vec2 sigma{std::cos(theta), std::sin(theta)};
        // Sh = (1/(2 omega_1)) \int_{S^1} L = (1/2) \int_0^pi L(theta) dtheta
        st.add(0.5 * kPi * shadow_length(boundary, sigma));
    }
    ShadowEstimate out;
    out.value = st.mean;
    out.stderr_ = st.stderr_of_mean();
    out.n_dirs = n_dirs;
    return out;
}

std::vector<Segment> graph_boundary(const std::vector<double>& values, double t) {
    if (values.size() < 2) throw std::invalid_argument("graph_boundary: need >= 2 nodes");
    std::vector<Segment> segs;
    std::size_t m = values.size() - 1;
    for (std::size_t i = 0; i < m; ++i) {
        double x0 = -t + 2.0 * t * static_cast<double>(i) / static_cast<double>(m);
        double x1 = -t + 2.0 * t * static_cast<double>(i + 1) / static_cast<double>(m);
        segs.push_back({{x0, values[i]}, {x1, values[i + 1]}});
    }
    return segs;
}

ShadowReport verify_shadow_lemma(const ShadowFuzzConfig& cfg) {
    ShadowReport rep;
    std::mt19937_64 rng = make_rng(cfg.seed, 4242);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double target = 2.0 * cfg.t;
    const int nodes = 256;

    auto eval = [&](std::vector<double> vals, const std::string& kind) {
        ShadowSample s;
        s.kind = kind;
        s.target = target;
        bool ok = true;
        for (double v : vals) {
            if (!(v > -0.25 && v < 0.25)) ok = false;
        }
        if (!ok) {
            s.rejected = true;
            ++rep.rejections;
            rep.samples.push_back(s);
            return;
        }
        ShadowEstimate est =
            shadow_average(graph_boundary(vals, cfg.t), cfg.n_dirs, /*jitter=*/false, cfg.seed);
        s.value = est.value;
        s.stderr_ = est.stderr_;
        s.pass = est.value >= target - 3.0 * std::max(est.stderr_, 1e-12);
        if (!s.pass) ++rep.violations;
        rep.samples.push_back(s);
    };

    // flat interface first: the equality case
    eval(std::vector<double>(nodes + 1, 0.0), "flat");

    int remaining = cfg.samples - 1;
    for (int i = 0; i < remaining; ++i) {
        std::vector<double> vals(nodes + 1, 0.0);
        if (i % 3 == 2) {
            // zigzag with a random tooth count and height
            int teeth = 4 + static_cast<int>(U(rng) * 20);
            double amp = cfg.amplitude * (0.3 + 0.7 * U(rng));
            for (int kk = 0; kk <= nodes; ++kk) {
                double x = static_cast<double>(kk) / nodes * teeth;
                double saw = 2.0 * std::abs(x - std::floor(x) - 0.5);
                vals[static_cast<std::size_t>(kk)] = amp * (saw - 0.5);
            }
        } else {
            int modes = 1 + static_cast<int>(U(rng) * 4);
            for (int q = 1; q <= modes; ++q) {
                double a = cfg.amplitude * (2.0 * U(rng) - 1.0) / modes;
                double ph = 2.0 * kPi * U(rng);
                for (int kk = 0; kk <= nodes; ++kk) {
                    double x = -1.0 + 2.0 * static_cast<double>(kk) / nodes;
                    vals[static_cast<std::size_t>(kk)] += a * std::cos(kPi * q * x + ph);
                }
            }
        }
        eval(std::move(vals), i % 3 == 2 ? "zigzag" : "fourier");
    }

    if (cfg.include_violating_fixture) {
        std::vector<double> bad(nodes + 1, 0.0);
        for (int kk = 0; kk <= nodes; ++kk) {
            bad[static_cast<std::size_t>(kk)] =
                0.35 * std::sin(2.0 * kPi * static_cast<double>(kk) / nodes);
        }
        eval(std::move(bad), "violating-fixture");
    }
    return rep;
}

}  // namespace nlperim
