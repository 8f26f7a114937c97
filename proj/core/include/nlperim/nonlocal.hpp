#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlperim/geometry.hpp"
#include "nlperim/kernels.hpp"

namespace nlperim {

/// Summed-area table of the field, for pair sums restricted to the window:
/// overlap_sum(d) = measure of the field over W ∩ (W - d).
struct WindowPairSums {
    int nx = 0, ny = 0;
    double h2 = 0.0;
    std::vector<double> sat;  // (nx+1) x (ny+1) prefix sums

    double rect(int i0, int i1, int j0, int j1) const {
        if (i0 > i1 || j0 > j1) return 0.0;
        auto S = [&](int i, int j) { return sat[static_cast<std::size_t>(j) * (nx + 1) + i]; };
        return S(i1 + 1, j1 + 1) - S(i0, j1 + 1) - S(i1 + 1, j0) + S(i0, j0);
    }
    double overlap_sum(int di, int dj) const {
        int i0 = std::max(0, -di), i1 = nx - 1 - std::max(0, di);
        int j0 = std::max(0, -dj), j1 = ny - 1 - std::max(0, dj);
        return rect(i0, i1, j0, j1) * h2;
    }
};

/// Set covariogram on lattice offsets: at(di, dj) = |E ∩ (E - z)| for
/// z = (di, dj) h, with |di| <= mx, |dj| <= my.
struct CovGrid {
    double h = 0.0;
    int mx = 0, my = 0;
    double set_measure = 0.0;  // |E|
    bool from_binary = false;
    std::vector<double> v;
    std::shared_ptr<const WindowPairSums> restricted;

    double at(int di, int dj) const {
        return v[static_cast<std::size_t>(dj + my) * (2 * mx + 1) + (di + mx)];
    }
    double& at(int di, int dj) {
        return v[static_cast<std::size_t>(dj + my) * (2 * mx + 1) + (di + mx)];
    }
    /// u(z) = |E Δ (E - z)| = 2(|E| - cov(z)).
    double sym_diff(int di, int dj) const { return 2.0 * (set_measure - at(di, dj)); }
};

enum class CovRoute { fft, direct };

/// Zero-padded autocorrelation of the indicator; counts are exact integers
/// times h^2. The direct route is the O(N^4) pair-sum oracle.
CovGrid covariogram(const PixelSet& p, CovRoute route = CovRoute::fft);
CovGrid covariogram(const FracField& f, CovRoute route = CovRoute::fft);

enum class PeriScheme {
    midpoint,  // kernel at pixel-center offsets, z = 0 cell contributes 0
    refined,   // pair-averaged weights + near-field model + analytic tail
};

struct PeriOptions {
    PeriScheme scheme = PeriScheme::refined;
    /// Restrict the pair sum to window x window (the semantics of the O(N^4)
    /// pair oracle). Off: pairs with the empty exterior count and the tail
    /// beyond the covariogram range is added in closed form.
    bool window_restricted = false;
    double r_model_eps_factor = 1.0;  // near-field model radius, in units of eps
    int r_model_min_cells = 4;
    double fit_factor = 2.0;   // model fitted on (r_model, fit_factor * r_model]
    int band_cells = 2;        // midpoint buffer band outside the model disc
    int tent_cells = 40;       // pair-averaged weights out to this many cells
    bool strict_window = false;  // throw if the truncation error exceeds 1e-10 rel
    /// Exact boundary length when known (polygon input): pins the linear
    /// covariogram coefficient, the angular average of u(z)/|z| being
    /// (2/pi) P(E) as z -> 0. Without it the slope is fitted from the grid.
    std::optional<double> boundary_hint;
};

struct PeriValue {
    double value = 0.0;
    double err = 0.0;  // reported numerical error estimate
    double near_field = 0.0, lattice = 0.0, tail = 0.0;
    double phi_bar = 0.0, phi_quad = 0.0, fit_residual = 0.0;
    bool window_exact = true;  // tail evaluated in closed form (u == 2|E| there)
    std::string evaluator;
};

/// P_eps of the discrete set via its covariogram (FFT route).
PeriValue nonlocal_perimeter_correlation(const PixelSet& p, const RadialKernel& k, double eps,
                                         const PeriOptions& opt = {});
PeriValue nonlocal_perimeter_correlation(const FracField& f, const RadialKernel& k, double eps,
                                         const PeriOptions& opt = {});

/// Same assembly fed by the O(N^4) pair-sum covariogram; N <= 96 per axis.
PeriValue nonlocal_perimeter_direct(const PixelSet& p, const RadialKernel& k, double eps,
                                    const PeriOptions& opt = {});
PeriValue nonlocal_perimeter_direct(const FracField& f, const RadialKernel& k, double eps,
                                    const PeriOptions& opt = {});

/// Shared assembly from a precomputed covariogram (route-independent).
PeriValue assemble_nonlocal_perimeter(const CovGrid& cov, const RadialKernel& k, double eps,
                                      const PeriOptions& opt);

struct RasterPolicy {
    double h_over_eps = 0.125;  // h <= eps/8 whenever compared to analytic targets
    double h_cap = 0.02;        // absolute cap for large eps
    double extra_margin_cells = 6.0;

    double h_for(double eps) const { return std::min(h_over_eps * eps, h_cap); }
};

/// Rasterize (fractional coverage) and evaluate with the refined scheme.
PeriValue polygon_nonlocal_perimeter(const PolygonSet& e, const RadialKernel& k, double eps,
                                     const RasterPolicy& policy = {});

enum class Evaluator { correlation, direct, sliced };

struct EnergyBreakdown {
    double perimeter = 0.0;
    double nonlocal = 0.0;
    double value = 0.0;  // perimeter - gamma * nonlocal, exactly as stored
    double gamma = 0.0;
    double err = 0.0;
    std::string evaluator;
};

EnergyBreakdown energy(const PolygonSet& e, const RadialKernel& k, double eps, double gamma,
                       Evaluator evaluator = Evaluator::correlation,
                       const RasterPolicy& policy = {});

/// Boolean-operation quantities of the symmetric difference E Δ F.
struct SymDiffStats {
    double area = 0.0;
    double perimeter = 0.0;
};
SymDiffStats symmetric_difference_stats(const PolygonSet& e, const PolygonSet& f);
double intersection_area(const PolygonSet& e, const PolygonSet& f);

/// Difference bounds: (i) via P(EΔF); (ii) via 2 I^0 |EΔF| / eps when I^0 is
/// finite; (iii) the interpolation bound with its implied constant.
struct DifferenceBoundsReport {
    double lhs = 0.0;  // P_eps(E) - P_eps(F)
    double sym_area = 0.0, sym_perimeter = 0.0;
    double bound_perimeter = 0.0;
    bool bound_perimeter_ok = false;
    bool i0_finite = false;
    double bound_volume = 0.0;
    bool bound_volume_ok = false;
    double rhs_interp = 0.0;     // (|EΔF|/eps)^{1-s0} P(EΔF)^{s0}
    double implied_constant = 0.0;  // lhs / rhs_interp when rhs > 0
    double eval_err = 0.0;
};

DifferenceBoundsReport check_difference_bounds(const PolygonSet& e, const PolygonSet& f,
                                               const RadialKernel& k, double eps, double s0,
                                               const RasterPolicy& policy = {});

}  // namespace nlperim
