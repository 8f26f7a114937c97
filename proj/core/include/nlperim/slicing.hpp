#pragma once

#include <optional>
#include <vector>

#include "nlperim/geometry.hpp"
#include "nlperim/kernels.hpp"

namespace nlperim {

/// Open interval; +-inf endpoints describe half-lines.
struct Interval {
    double a = 0.0, b = 0.0;
    double length() const { return b - a; }
};

/// Finite union of disjoint open intervals on a line, sorted.
class IntervalUnion {
  public:
    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<Interval> parts);

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    double total_length() const;
    /// Finite endpoints with orientation: +1 entering the set, -1 leaving.
    struct Endpoint {
        double c;
        int sign;
    };
    std::vector<Endpoint> endpoints() const;
    /// H^0 of the boundary: the number of finite endpoints.
    int endpoint_count() const;

  private:
    std::vector<Interval> parts_;
};

/// One traced line: direction sigma, base point, crossing parameters with
/// their polygon edge indices, and the resulting interval union.
struct SliceFrame {
    Vec2 dir;
    Vec2 point;  // a point on the line; the line is point + t * dir
    struct Crossing {
        double t;
        std::size_t edge;
    };
    std::vector<Crossing> crossings;
    IntervalUnion trace;
    int endpoint_count = 0;
};

/// Exact polygon/line intersection; vertex incidences are broken by a fixed
/// deterministic 1e-12 offset perturbation.
SliceFrame line_trace(const PolygonSet& e, Vec2 sigma, double offset);

/// Closed-form 1D nonlocal perimeter of an interval union: the double
/// integral collapses to sum_{i,j} sign_i sign_j R(|c_i - c_j|) over the
/// finite endpoints (second-tail primitive R, diagonal included).
double oned_nonlocal_perimeter(const IntervalUnion& u, const KernelCalculus& calc);
double oned_nonlocal_perimeter(const IntervalUnion& u, const RadialKernel& k, double eps);

/// F^1D = H^0(boundary) - P^1D >= 0.
double oned_critical_energy(const IntervalUnion& u, const KernelCalculus& calc);
double oned_critical_energy(const IntervalUnion& u, const RadialKernel& k, double eps);

struct SlicedEstimate {
    double perimeter = 0.0, perimeter_stderr = 0.0;
    double nonlocal = 0.0, nonlocal_stderr = 0.0;
    double critical = 0.0, critical_stderr = 0.0;  // F_eps^loc = P - P_eps
    long n_slices = 0;
};

struct SliceSampling {
    int n_dirs = 256;
    int n_offsets = 256;
    /// Midpoint strata when false; uniform jitter inside each stratum when true.
    bool jitter = false;
    std::uint64_t seed = 0;
    /// Fixed offset span (world frame). Default: the polygon's projected span.
    std::optional<std::pair<Vec2, double>> anchor;  // (center, half-width)
};

/// Stratified estimate of (P, P_eps) over lines: directions on the
/// half-circle, offsets over the projected span per direction.
SlicedEstimate sliced_perimeter_estimate(const PolygonSet& e, const RadialKernel& k, double eps,
                                         const SliceSampling& s = {});

/// Slicing functional with the offset integral done exactly per direction:
/// vertex projections split the span into panels where the crossing pattern
/// is fixed and the integrand is analytic, so only the direction average is
/// sampled. Values vary smoothly under deformations of E, which the
/// finite-difference oracles require.
SlicedEstimate sliced_perimeter_offset_exact(const PolygonSet& e, const RadialKernel& k,
                                             double eps, int n_dirs, int threads = 1);

/// Same offset-exact sweep for a custom per-slice integrand; returns the
/// direction-averaged value of (pi/2) \int f(slice) dx.
double slice_integral_offset_exact(const PolygonSet& e, int n_dirs, int threads,
                                   const std::function<double(const SliceFrame&)>& f);

struct Segment {
    Vec2 a, b;
};

/// Length of the projection of a segment family onto the line orthogonal to
/// sigma (union of intervals, overlaps merged once).
double shadow_length(const std::vector<Segment>& boundary, Vec2 sigma);

struct ShadowEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    int n_dirs = 0;
};

/// Direction-averaged shadow Sh = (1/(2 omega_1)) \int_{S^1} |proj| dsigma.
ShadowEstimate shadow_average(const std::vector<Segment>& boundary, int n_dirs,
                              bool jitter = false, std::uint64_t seed = 0);

struct ShadowSample {
    double value = 0.0;
    double stderr_ = 0.0;
    double target = 0.0;  // H^1(D_t) = 2t
    bool pass = false;
    bool rejected = false;  // sandwich violation
    std::string kind;
};

struct ShadowFuzzConfig {
    double t = 1.0;            // box half-width; box is D_t x (-1, 1)
    int samples = 200;
    int n_dirs = 512;
    std::uint64_t seed = 1;
    double amplitude = 0.2;    // graph amplitude bound (sandwich needs < 1/4)
    bool include_violating_fixture = false;
};

struct ShadowReport {
    std::vector<ShadowSample> samples;
    int violations = 0;
    int rejections = 0;
};

/// Lemma check: graph-type boundaries obeying the 1/4-sandwich must shadow
/// at least as much as the flat interface. Sandwich violations are rejected
/// and counted, never silently passed.
ShadowReport verify_shadow_lemma(const ShadowFuzzConfig& cfg);

/// Boundary segments of the subgraph {x2 < f(x1)} inside the box, for graph
/// values sampled at m+1 uniform nodes on [-t, t].
std::vector<Segment> graph_boundary(const std::vector<double>& values, double t);

}  // namespace nlperim
