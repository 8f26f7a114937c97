#include "nlperim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlperim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RadialKernel RadialKernel::power_law_min(int n, double s0, double p0) {
    if (n < 2) throw std::domain_error("power_law_min: n < 2");
    if (!(s0 > 0.0 && s0 < 1.0)) throw std::domain_error("power_law_min: s0 not in (0,1)");
    if (!(p0 > 0.0)) throw std::domain_error("power_law_min: p0 <= 0");
    RadialKernel k;
    k.n_ = n;
    k.family_ = "power_law_min";
    k.params_ = {{"s0", s0}, {"p0", p0}};
    // min(r^{-(n+s0)}, r^{-(2n+p0)}): the slow branch below the crossover at
    // r = 1, the fast branch above.
    k.pieces_ = {{0.0, 1.0, 1.0, -(n + s0)}, {1.0, kInf, 1.0, -(2.0 * n + p0)}};
    k.singularity_order_ = n + s0;
    k.decay_order_ = 2.0 * n + p0;
    k.support_radius_ = kInf;
    return k;
}

RadialKernel RadialKernel::compact_indicator(int n, double radius) {
    if (n < 2) throw std::domain_error("compact_indicator: n < 2");
    if (!(radius > 0.0)) throw std::domain_error("compact_indicator: radius <= 0");
    RadialKernel k;
    k.n_ = n;
    k.family_ = "compact_indicator";
    k.params_ = {{"radius", radius}};
    k.pieces_ = {{0.0, radius, 1.0, 0.0}};
    k.singularity_order_ = 0.0;
    k.decay_order_ = kInf;
    k.support_radius_ = radius;
    return k;
}

RadialKernel RadialKernel::truncated_power(int n, double exponent, double cutoff) {
    if (n < 2) throw std::domain_error("truncated_power: n < 2");
    if (!(cutoff > 0.0)) throw std::domain_error("truncated_power: cutoff <= 0");
    if (!(exponent > n + 1.0))
        throw std::domain_error("truncated_power: exponent must exceed n+1 for a finite first moment");
    RadialKernel k;
    k.n_ = n;
    k.family_ = "truncated_power";
    k.params_ = {{"exponent", exponent}, {"cutoff", cutoff}};
    k.pieces_ = {{cutoff, kInf, 1.0, -exponent}};
    k.singularity_order_ = 0.0;
    k.decay_order_ = exponent;
    k.support_radius_ = kInf;
    return k;
}

double RadialKernel::profile(double r) const {
    if (!(r > 0.0)) return 0.0;
    for (const auto& p : pieces_) {
        if (r >= p.lo && r < p.hi) return scale_ * p.coef * std::pow(r, p.expo);
    }
    return 0.0;
}

std::vector<double> RadialKernel::breakpoints() const {
    std::vector<double> b;
    for (const auto& p : pieces_) {
        if (p.lo > 0.0 && std::isfinite(p.lo)) b.push_back(p.lo);
        if (std::isfinite(p.hi)) b.push_back(p.hi);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (b.empty()) b.push_back(1.0);
    return b;
}

RadialKernel RadialKernel::with_scale(double s) const {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("with_scale: bad scale");
    RadialKernel k = *this;
    k.scale_ = s;
    return k;
}

MomentValue RadialKernel::profile_power_integral(double m, double a, double b) const {
    MomentValue out;
    out.status = IntegralStatus::converged;
    for (const auto& p : pieces_) {
        double lo = std::max(a, p.lo);
        double hi = std::min(b, p.hi);
        if (!(lo < hi)) continue;
        IntegralResult part = power_integral(scale_ * p.coef, m + p.expo, lo, hi);
        if (part.status == IntegralStatus::divergent) {
            out.status = IntegralStatus::divergent;
            return out;
        }
        out.value += part.value;
    }
    return out;
}

double k1n(int n) {
    if (n < 2) throw std::domain_error("k1n: n < 2");
    return 2.0 * unit_ball_volume(n - 1) / (n * unit_ball_volume(n));
}

MomentValue moment(const RadialKernel& k, int order, const QuadratureOptions& opt) {
    if (order < 0) throw std::domain_error("moment: order < 0");
    int n = k.dimension();
    double w = n * unit_ball_volume(n);
    auto f = [&k, n, order](double r) {
        return std::pow(r, n - 1 + order) * k.profile(r);
    };
    IntegralResult res = integrate_radial(f, k.breakpoints(), opt);
    MomentValue mv;
    mv.status = res.status;
    mv.value = w * res.value;
    mv.abs_error = w * res.abs_error;
    if (mv.status == IntegralStatus::divergent) mv.value = 0.0;
    return mv;
}

RadialKernel normalize(const RadialKernel& k) {
    MomentValue i1 = moment(k, 1);
    if (!i1.finite() || !(i1.value > 0.0))
        throw std::domain_error("normalize: first moment must be finite and positive");
    double target = 1.0 / k1n(k.dimension());
    return k.with_scale(k.scale() * target / i1.value);
}

double tail_Q(const RadialKernel& k, double r, const QuadratureOptions& opt) {
    if (r < 0.0) throw std::domain_error("tail_Q: r < 0");
    int n = k.dimension();
    double w = n * unit_ball_volume(n);
    auto f = [&k, n](double t) { return std::pow(t, n) * k.profile(t); };
    if (r == 0.0) {
        IntegralResult res = integrate_radial(f, k.breakpoints(), opt);
        return w * res.value;
    }
    if (std::isfinite(k.support_radius()) && r >= k.support_radius()) return 0.0;
    // Split at any piece boundary beyond r, then run the dyadic tail.
    double acc = 0.0;
    double lo = r;
    for (double b : k.breakpoints()) {
        if (b > lo) {
            acc += integrate_finite(f, lo, b, opt).value;
            lo = b;
        }
    }
    acc += integrate_to_infinity(f, lo, opt).value;
    return w * acc;
}

RadialKernel rescale(const RadialKernel& k, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("rescale: eps <= 0");
    RadialKernel out = k;
    int n = k.dimension();
    double pref = std::pow(eps, -(n + 1.0));
    for (auto& p : out.pieces_) {
        // g_eps(r) = eps^{-(n+1)} g(r/eps): [lo,hi) scales by eps and the
        // coefficient absorbs eps^{-(n+1)-expo}.
        p.coef *= pref * std::pow(eps, -p.expo);
        p.lo *= eps;
        if (std::isfinite(p.hi)) p.hi *= eps;
    }
    if (std::isfinite(out.support_radius_)) out.support_radius_ *= eps;
    out.params_["rescale_eps"] = eps * (k.params().count("rescale_eps")
                                            ? k.params().at("rescale_eps")
                                            : 1.0);
    return out;
}

double rho_eps(const RadialKernel& k, double eps, double t) {
    if (!(eps > 0.0)) throw std::domain_error("rho_eps: eps <= 0");
    double s = std::abs(t) / eps;
    int n = k.dimension();
    return unit_ball_volume(n - 1) * std::pow(s, n - 1) * k.profile(s) / (eps * eps);
}

double one_dim_mass(const RadialKernel& k, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("one_dim_mass: eps <= 0");
    int n = k.dimension();
    MomentValue t = k.profile_power_integral(static_cast<double>(n), 0.0, kInf);
    if (!t.finite()) throw std::domain_error("one_dim_mass: first moment not finite");
    return 2.0 * unit_ball_volume(n - 1) * t.value;
}

double second_tail_R(const RadialKernel& k, double eps, double a) {
    if (a < 0.0) throw std::domain_error("second_tail_R: a < 0");
    return KernelCalculus(k, eps).R(a);
}

double alpha_star(int n, double s0, double p0) {
    if (n < 2) throw std::domain_error("alpha_star: n < 2");
    if (!(s0 > 0.0 && s0 < 1.0)) throw std::domain_error("alpha_star: s0 not in (0,1)");
    if (!(p0 > 0.0)) throw std::domain_error("alpha_star: p0 <= 0");
    return 0.5 * p0 * (1.0 - s0) / ((n - s0) * (n + p0) + p0);
}

namespace {

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(points));
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < points; ++i) {
        double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        g.push_back(std::exp(llo + t * (lhi - llo)));
    }
    return g;
}

// sup over the grid of r^{s0} * \int_{B_1 \ B_r} G.
double h4_sup_on(const RadialKernel& k, double s0, double r_min, int points) {
    int n = k.dimension();
    double w = n * unit_ball_volume(n);
    auto f = [&k, n](double t) { return std::pow(t, n - 1) * k.profile(t); };
    double sup = 0.0;
    for (double r : log_grid(r_min, 0.999, points)) {
        double integral = w * integrate_finite(f, r, 1.0).value;
        sup = std::max(sup, std::pow(r, s0) * integral);
    }
    return sup;
}

double h5_sup_on(const RadialKernel& k, double p0, double r_max, int points) {
    int n = k.dimension();
    double sup = 0.0;
    for (double r : log_grid(0.25, r_max, points)) {
        double q = tail_Q(k, r);
        sup = std::max(sup, std::pow(r, n - 1 + p0) * q);
    }
    return sup;
}

bool h3_symbolic(const RadialKernel& k) {
    // (H3) needs a locally W^{1,1} profile with |g'| <= C r^{-(n+1)} at
    // infinity and integrable |z|^2 |grad G|. Piecewise powers satisfy it iff
    // the profile is continuous across every interior breakpoint; a jump puts
    // a surface measure into grad G.
    const auto& ps = k.pieces();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        double hi = ps[i].hi;
        if (!std::isfinite(hi)) continue;
        double left = ps[i].coef * std::pow(hi, ps[i].expo);
        double right = 0.0;
        for (const auto& q : ps) {
            if (q.lo == hi) right = q.coef * std::pow(hi, q.expo);
        }
        if (std::abs(left - right) > 1e-12 * std::max(1.0, std::abs(left))) return false;
        double lo = ps[i].lo;
        if (lo > 0.0) {
            bool has_left_neighbor = false;
            for (const auto& q : ps)
                if (q.hi == lo) has_left_neighbor = true;
            if (!has_left_neighbor) {
                // profile jumps from 0 at the inner edge unless coef vanishes
                if (std::abs(ps[i].coef) > 0.0) return false;
            }
        }
    }
    // tail decay of the derivative: d/dr r^e ~ r^{e-1}; need e-1 <= -(n+1).
    double n = k.dimension();
    if (std::isfinite(k.decay_order()) && !(k.decay_order() + 1.0 >= n + 1.0)) return false;
    return true;
}

}  // namespace

KernelReport verify_hypotheses(const RadialKernel& k, double s0, double p0,
                               const HypothesisGrid& grid) {
    if (!(s0 > 0.0 && s0 < 1.0)) throw std::domain_error("verify_hypotheses: s0 not in (0,1)");
    if (!(p0 > 0.0)) throw std::domain_error("verify_hypotheses: p0 <= 0");
    KernelReport rep;
    rep.n = k.dimension();
    rep.family = k.family();
    rep.params = k.params();
    rep.scale = k.scale();
    rep.k1n_value = k1n(k.dimension());
    rep.probe_q = p0;

    rep.i0 = moment(k, 0);
    rep.i1 = moment(k, 1);
    rep.i_nq = moment(k, k.dimension() + static_cast<int>(std::ceil(p0)));
    if (rep.i1.finite())
        rep.normalization_residual = std::abs(rep.i1.value * rep.k1n_value - 1.0);

    // H1: nonnegative radial profile (sampled; families are nonnegative by
    // construction, a negative scale or coefficient would show here).
    rep.h1 = true;
    for (double r : log_grid(1e-6, 1e4, 64)) {
        if (k.profile(r) < 0.0) rep.h1 = false;
    }

    rep.h2 = rep.i1.finite() && rep.i1.value > 0.0;
    rep.h3 = h3_symbolic(k);

    double s1 = h4_sup_on(k, s0, grid.r_min, grid.points);
    double s2 = h4_sup_on(k, s0, grid.r_min / 2.0, grid.points * 2);
    rep.h4_sup = s2;
    rep.h4_refine_change = (s1 == 0.0 && s2 == 0.0) ? 0.0 : std::abs(s2 - s1) / std::max(s1, s2);
    rep.h4 = std::isfinite(s2) && rep.h4_refine_change < 0.05;

    double t1 = h5_sup_on(k, p0, grid.r_max, grid.points);
    double t2 = h5_sup_on(k, p0, grid.r_max * 2.0, grid.points * 2);
    rep.h5_sup = t2;
    rep.h5_refine_change = (t1 == 0.0 && t2 == 0.0) ? 0.0 : std::abs(t2 - t1) / std::max(t1, t2);
    rep.h5 = std::isfinite(t2) && rep.h5_refine_change < 0.05;

    for (double r : log_grid(std::max(grid.r_min, 1e-3), grid.r_max, grid.points)) {
        rep.q_samples.emplace_back(r, tail_Q(k, r));
    }
    return rep;
}

KernelCalculus::KernelCalculus(const RadialKernel& k, double eps)
    : k_(k), geps_(rescale(k, eps)), n_(k.dimension()), eps_(eps) {
    if (!(eps > 0.0)) throw std::domain_error("KernelCalculus: eps <= 0");
    omega_nm1_ = unit_ball_volume(n_ - 1);
    MomentValue tn = k_.profile_power_integral(static_cast<double>(n_), 0.0, kInf);
    if (!tn.finite()) throw std::domain_error("KernelCalculus: kernel lacks a first moment");
    mass_ = 2.0 * omega_nm1_ * tn.value;
}

double KernelCalculus::R(double a) const {
    if (a < 0.0) throw std::domain_error("KernelCalculus::R: a < 0");
    double x = a / eps_;
    if (std::isfinite(k_.support_radius()) && x >= k_.support_radius()) return 0.0;
    MomentValue tn = k_.profile_power_integral(static_cast<double>(n_), x, kInf);
    MomentValue tn1 = k_.profile_power_integral(static_cast<double>(n_ - 1), x, kInf);
    return 2.0 * omega_nm1_ * (tn.value - x * tn1.value);
}

double KernelCalculus::S(double a) const {
    if (!(a > 0.0)) throw std::domain_error("KernelCalculus::S: a <= 0");
    double x = a / eps_;
    MomentValue tn1 = k_.profile_power_integral(static_cast<double>(n_ - 1), x, kInf);
    return 2.0 * omega_nm1_ * tn1.value / eps_;
}

double KernelCalculus::ball_moment(int m, double rho) const {
    if (rho <= 0.0) return 0.0;
    double w = n_ * unit_ball_volume(n_);
    MomentValue h = k_.profile_power_integral(static_cast<double>(n_ - 1 + m), 0.0, rho / eps_);
    if (!h.finite())
        throw std::domain_error("KernelCalculus::ball_moment: divergent near-field moment");
    return w * std::pow(eps_, m - 1) * h.value;
}

double KernelCalculus::exterior_mass(double rho) const {
    if (!(rho > 0.0)) throw std::domain_error("KernelCalculus::exterior_mass: rho <= 0");
    double w = n_ * unit_ball_volume(n_);
    MomentValue t = k_.profile_power_integral(static_cast<double>(n_ - 1), rho / eps_, kInf);
    return w * t.value / eps_;
}

double KernelCalculus::exterior_first_moment(double rho) const {
    if (rho < 0.0) throw std::domain_error("KernelCalculus::exterior_first_moment: rho < 0");
    double w = n_ * unit_ball_volume(n_);
    MomentValue t = k_.profile_power_integral(static_cast<double>(n_), rho / eps_, kInf);
    return w * t.value;
}

}  // namespace nlperim
