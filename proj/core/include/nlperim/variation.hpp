#pragma once

#include <string>

#include "nlperim/geometry.hpp"
#include "nlperim/kernels.hpp"
#include "nlperim/slicing.hpp"

namespace nlperim {

/// Compactly supported deformation field with a closed-form Jacobian.
/// No numerical differentiation of T anywhere: the families are analytic.
class VectorField {
  public:
    enum class Family { constant, linear_bump, translation_bump, normal_bump, dilation_bump };

    static VectorField constant(Vec2 v);
    /// T(x) = v B(|x-c|/rho), B(s) = (1-s^2)^3 on s < 1.
    static VectorField translation_bump(Vec2 v, Vec2 center, double radius);
    /// translation bump aligned with a boundary normal.
    static VectorField normal_bump(double amplitude, Vec2 center, Vec2 normal, double radius);
    /// T(x) = A (x-c) psi(|x-c|/rho); psi == 1 for |x-c| <= inner.
    static VectorField linear_bump(Mat2 a, Vec2 center, double inner, double radius);
    /// T(x) = x inside |x| <= inner, smoothly cut off at rho.
    static VectorField dilation_bump(double inner, double radius);

    Vec2 value(Vec2 x) const;
    Mat2 jacobian(Vec2 x) const;
    double divergence(Vec2 x) const { return jacobian(x).trace(); }

    Family family() const { return family_; }
    Vec2 support_center() const { return center_; }
    double support_radius() const { return radius_; }
    /// Sampled bound on |grad T| for step-size control.
    double jacobian_bound() const;

  private:
    Family family_ = Family::constant;
    Vec2 v_;
    Mat2 a_;
    Vec2 center_;
    double radius_ = 1.0;
    double inner_ = 0.5;
};

/// div_E T = div T - nu . (grad T) nu at a boundary point.
double boundary_divergence(const VectorField& t, Vec2 point, Vec2 normal);

struct VariationQuadrature {
    int n_dirs = 192;        // slicing directions for the volume term
    int n_offsets = 192;     // offsets per direction
    int n_rays = 192;        // angular rays for boundary x volume terms
    int edge_gauss = 4;      // boundary nodes per polygon edge
    int threads = 1;
};

struct VariationBreakdown {
    double boundary_div = 0.0;   // \int_{bd E} div_E T
    double volume = 0.0;         // \iint_{E x E^c} div T(x) G_eps
    double boundary_vol = 0.0;   // \int_{bd E} \int_E G_eps (T(x)-T(y)).nu(y)
    double gamma = 0.0;
    double total = 0.0;          // boundary_div - 2 gamma (volume + boundary_vol)
    double err = 0.0;
};

/// First variation of F_{eps,gamma} under x -> x + t T(x) at t = 0.
VariationBreakdown first_variation(const PolygonSet& e, const VectorField& t,
                                   const RadialKernel& k, double eps, double gamma,
                                   const VariationQuadrature& q = {});

struct FdOptions {
    double t_step = 0.0;  // 0: auto from the Jacobian bound
    int n_dirs = 512;
    int n_offsets = 512;
};

struct FdResult {
    double value = 0.0;       // Richardson-extrapolated central difference
    double raw_coarse = 0.0;  // D(t)
    double raw_fine = 0.0;    // D(t/2)
    double extrap_err = 0.0;  // |value - raw_fine|
    double t_step = 0.0;
};

/// Central difference of F(f_t(E)) with vertices moved by t T, one
/// Richardson level; the nonlocal energy is the deterministic sliced
/// evaluator with a slice family common to all four evaluations.
FdResult first_variation_fd(const PolygonSet& e, const VectorField& t, const RadialKernel& k,
                            double eps, double gamma, const FdOptions& opt = {});

/// P~_eps(E) = 2 \int_E \int_{bd E} G_eps(x-y) (y-x).nu(y); exact radial
/// integrals along angular rays.
double ptilde(const PolygonSet& e, const RadialKernel& k, double eps,
              const VariationQuadrature& q = {});

struct ScalingDerivativeReport {
    double fd = 0.0;        // d/dtau P_eps(tau E) at tau = t, central difference
    double formula = 0.0;   // (n/t) P_eps(tE) - (1/t) P~_eps(tE)
    double rel_err = 0.0;
    double ptilde_value = 0.0;
    double ptilde_bound = 0.0;  // 2 P(E) I_G^1
    bool ptilde_bound_ok = false;
};

ScalingDerivativeReport scaling_derivative_check(const PolygonSet& e, const RadialKernel& k,
                                                 double eps, double t,
                                                 const VariationQuadrature& q = {});

/// Penalization constant of the equivalent unconstrained problem:
/// (1/(1-gamma)) (1 + n + 2/k1n) P(B_1)/|B_1|.
double lambda0(int n, double gamma);

}  // namespace nlperim
