#include "nlperim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlperim/util.hpp"

namespace nlperim {
namespace {

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGn = 15;
constexpr double kGx[kGn] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGw[kGn] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gauss15(const std::function<double(double)>& f, double a, double b, long& evals) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < kGn; ++i) s += kGw[i] * f(mid + half * kGx[i]);
    evals += kGn;
    return s * half;
}

struct PanelResult {
    double value = 0.0;
    double err = 0.0;
    bool ok = false;
};

PanelResult adaptive_panel(const std::function<double(double)>& f, double a, double b,
                           double tol, int depth_left, long& evals, long max_evals) {
    double whole = gauss15(f, a, b, evals);
    double mid = 0.5 * (a + b);
    double left = gauss15(f, a, mid, evals);
    double right = gauss15(f, mid, b, evals);
    double halves = left + right;
    double diff = halves - whole;
    PanelResult r;
    if (std::abs(diff) <= tol || depth_left <= 0 || evals > max_evals) {
        // One Richardson step: the halved composite rule plus its correction.
        r.value = halves + diff / 63.0;
        r.err = std::abs(diff);
        r.ok = std::abs(diff) <= tol;
        return r;
    }
    PanelResult rl = adaptive_panel(f, a, mid, 0.5 * tol, depth_left - 1, evals, max_evals);
    PanelResult rr = adaptive_panel(f, mid, b, 0.5 * tol, depth_left - 1, evals, max_evals);
    r.value = rl.value + rr.value;
    r.err = rl.err + rr.err;
    r.ok = rl.ok && rr.ok;
    return r;
}

}  // namespace

IntegralResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& opt) {
    IntegralResult out;
    if (!(a <= b)) throw std::invalid_argument("integrate_finite: a > b");
    if (a == b) {
        out.status = IntegralStatus::converged;
        return out;
    }
    long evals = 0;
    double coarse = gauss15(f, a, b, evals);
    double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(coarse));
    PanelResult pr = adaptive_panel(f, a, b, tol, opt.max_depth, evals, opt.max_evals);
    out.value = pr.value;
    out.abs_error = pr.err;
    out.evals = evals;
    out.status = pr.ok ? IntegralStatus::converged : IntegralStatus::inconclusive;
    if (!std::isfinite(pr.value)) out.status = IntegralStatus::divergent;
    return out;
}

namespace {

// Shared driver for geometric panel sequences. next(a) yields panel [a, next(a))
// going either outward (toward infinity) or inward (toward zero; then panels are
// [next(a), a) with the roles swapped by the caller).
IntegralResult geometric_sum(const std::function<double(double)>& f, double start,
                             bool outward, const QuadratureOptions& opt) {
    IntegralResult out;
    long evals = 0;
    double acc = 0.0, erracc = 0.0;
    double a = start;
    int grow_streak = 0;
    double prev_inc = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < opt.max_geometric; ++j) {
        double b = outward ? 2.0 * a : 0.5 * a;
        double lo = outward ? a : b;
        double hi = outward ? b : a;
        double tol = std::max(opt.abs_tol, opt.rel_tol * std::max(std::abs(acc), 1e-300));
        PanelResult pr = adaptive_panel(f, lo, hi, tol, opt.max_depth, evals, opt.max_evals);
        double inc = pr.value;
        if (!std::isfinite(inc)) {
            out.status = IntegralStatus::divergent;
            out.value = acc;
            out.evals = evals;
            return out;
        }
        acc += inc;
        erracc += pr.err;
        double mag = std::abs(inc);
        if (std::isfinite(prev_inc)) {
            // Power-law integrands give a fixed increment ratio 2^{-(q+1)};
            // a sustained ratio >= 1 means the panel series cannot converge.
            if (mag >= std::abs(prev_inc) * 0.999 && mag > opt.abs_tol) {
                ++grow_streak;
            } else {
                grow_streak = 0;
            }
            if (grow_streak >= 8) {
                out.status = IntegralStatus::divergent;
                out.value = acc;
                out.evals = evals;
                return out;
            }
        }
        prev_inc = inc;
        double scale = std::max(std::abs(acc), opt.abs_tol);
        if (mag <= opt.rel_tol * scale && j >= 2) {
            // Estimate the remaining tail from the measured decay ratio.
            double ratio = 0.5;
            if (std::abs(prev_inc) > 0 && std::isfinite(prev_inc)) ratio = 0.5;
            out.status = IntegralStatus::converged;
            out.value = acc;
            out.abs_error = erracc + mag * ratio / (1.0 - ratio);
            out.evals = evals;
            return out;
        }
        a = b;
        if (evals > opt.max_evals) break;
    }
    out.status = IntegralStatus::inconclusive;
    out.value = acc;
    out.abs_error = erracc;
    out.evals = evals;
    return out;
}

}  // namespace

IntegralResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                     const QuadratureOptions& opt) {
    if (a <= 0.0) throw std::invalid_argument("integrate_to_infinity: a <= 0");
    return geometric_sum(f, a, /*outward=*/true, opt);
}

IntegralResult integrate_from_zero(const std::function<double(double)>& f, double b,
                                   const QuadratureOptions& opt) {
    if (b <= 0.0) throw std::invalid_argument("integrate_from_zero: b <= 0");
    return geometric_sum(f, b, /*outward=*/false, opt);
}

IntegralResult integrate_radial(const std::function<double(double)>& f,
                                const std::vector<double>& breakpoints,
                                const QuadratureOptions& opt) {
    std::vector<double> bps;
    for (double b : breakpoints)
        if (std::isfinite(b) && b > 0.0) bps.push_back(b);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    if (bps.empty()) bps.push_back(1.0);

    IntegralResult total;
    total.status = IntegralStatus::converged;

    IntegralResult head = integrate_from_zero(f, bps.front(), opt);
    auto merge = [&total](const IntegralResult& part) {
        total.value += part.value;
        total.abs_error += part.abs_error;
        total.evals += part.evals;
        if (part.status == IntegralStatus::divergent) {
            total.status = IntegralStatus::divergent;
        } else if (part.status == IntegralStatus::inconclusive &&
                   total.status != IntegralStatus::divergent) {
            total.status = IntegralStatus::inconclusive;
        }
    };
    merge(head);
    if (total.status == IntegralStatus::divergent) return total;

    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        merge(integrate_finite(f, bps[i], bps[i + 1], opt));
        if (total.status == IntegralStatus::divergent) return total;
    }
    merge(integrate_to_infinity(f, bps.back(), opt));
    return total;
}

IntegralResult power_integral(double c, double p, double a, double b) {
    IntegralResult out;
    out.status = IntegralStatus::converged;
    if (c == 0.0 || a == b) return out;
    if (a < 0.0 || b < a) throw std::invalid_argument("power_integral: bad bounds");
    double q = p + 1.0;
    bool binf = std::isinf(b);
    if (a == 0.0 && q <= 0.0) {
        out.status = IntegralStatus::divergent;
        return out;
    }
    if (binf && q >= 0.0) {
        out.status = IntegralStatus::divergent;
        return out;
    }
    if (std::abs(q) < 1e-14) {
        if (a == 0.0 || binf) {
            out.status = IntegralStatus::divergent;
            return out;
        }
        out.value = c * std::log(b / a);
        return out;
    }
    double upper = binf ? 0.0 : std::pow(b, q);
    double lower = (a == 0.0) ? 0.0 : std::pow(a, q);
    out.value = c * (upper - lower) / q;
    return out;
}

}  // namespace nlperim
