#pragma once

#include <functional>
#include <vector>

namespace nlperim {

/// Outcome of an improper-integral evaluation. Divergence is an explicit
/// state, never an overflowed float; "inconclusive" means the refinement
/// budget ran out before the panel sums settled.
enum class IntegralStatus { converged, divergent, inconclusive };

struct IntegralResult {
    IntegralStatus status = IntegralStatus::inconclusive;
    double value = 0.0;
    double abs_error = 0.0;
    long evals = 0;

    bool converged() const { return status == IntegralStatus::converged; }
};

struct QuadratureOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    int max_depth = 48;         // interval halvings per panel
    int max_geometric = 220;    // dyadic panels toward 0 or infinity
    long max_evals = 4'000'000;
};

/// Adaptive interval-halving with one Richardson level on a finite panel.
IntegralResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& opt = {});

/// Integral over [a, +inf): dyadic panels [a 2^j, a 2^{j+1}] whose increments
/// must decay; sustained non-decay is reported as divergence.
IntegralResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                     const QuadratureOptions& opt = {});

/// Integral over (0, b] with a possible power singularity at 0: dyadic panels
/// [b 2^{-j-1}, b 2^{-j}]; growing increments are reported as divergence.
IntegralResult integrate_from_zero(const std::function<double(double)>& f, double b,
                                   const QuadratureOptions& opt = {});

/// Integral over (0, inf) split at the given interior breakpoints.
IntegralResult integrate_radial(const std::function<double(double)>& f,
                                const std::vector<double>& breakpoints,
                                const QuadratureOptions& opt = {});

/// Exact integral of c * r^p over [a, b] (0 <= a <= b <= +inf).
/// Divergent cases are reported through the status, not as inf values.
IntegralResult power_integral(double c, double p, double a, double b);

}  // namespace nlperim
