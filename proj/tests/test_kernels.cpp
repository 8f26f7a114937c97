#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlperim/kernels.hpp"
#include "nlperim/util.hpp"

using namespace nlperim;

namespace {

RadialKernel plm_normalized() {
    return normalize(RadialKernel::power_law_min(2, 0.5, 1.0));
}

// Independent dense-grid Riemann oracle for Q(r) of power_law_min(s0, p0):
// midpoint sum of 2 pi r^2 min(r^-(n+s0), r^-(2n+p0)) out to R, plus the
// exact power tail beyond R (the profile is a pure power there).
double q_riemann_oracle(double scale, double s0, double p0, double r) {
    const int n = 2;
    const double R = 100.0;
    const long N = 1'000'000;
    double a = r, acc = 0.0;
    double dr = (R - a) / static_cast<double>(N);
    for (long i = 0; i < N; ++i) {
        double x = a + (i + 0.5) * dr;
        double g = std::min(std::pow(x, -(n + s0)), std::pow(x, -(2.0 * n + p0)));
        acc += x * x * g * dr;
    }
    double beta = 2.0 * n + p0;       // tail exponent, r > 1
    double q = 2.0 - beta + 1.0;      // power of the antiderivative of r^{2-beta}
    acc += -std::pow(R, q) / q;
    return 2.0 * kPi * scale * acc;
}

}  // namespace

TEST_CASE("sphere average of |x_n|") {
    CHECK(k1n(2) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
    CHECK(k1n(3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(k1n(1), std::domain_error);
}

TEST_CASE("moments: closed values and explicit divergence") {
    auto compact = RadialKernel::compact_indicator(2, 1.0);
    auto m1 = moment(compact, 1);
    REQUIRE(m1.finite());
    CHECK(m1.value == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-10));

    auto plm = RadialKernel::power_law_min(2, 0.5, 1.0);
    auto m0 = moment(plm, 0);
    CHECK(m0.divergent());

    auto m1p = moment(plm, 1);
    REQUIRE(m1p.finite());
    CHECK(m1p.value == doctest::Approx(5.0 * kPi).epsilon(1e-10));
}

TEST_CASE("normalize fixes the first moment") {
    auto compact = normalize(RadialKernel::compact_indicator(2, 1.0));
    CHECK(compact.scale() == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(moment(compact, 1).value == doctest::Approx(kPi / 2.0).epsilon(1e-8));

    // idempotence
    auto twice = normalize(compact);
    CHECK(twice.scale() == doctest::Approx(compact.scale()).epsilon(1e-8));

    // linearity: doubling the profile halves the normalizing scale
    auto doubled = RadialKernel::compact_indicator(2, 1.0).with_scale(2.0);
    CHECK(normalize(doubled).scale() == doctest::Approx(2.0 * 0.375).epsilon(1e-8));
    CHECK(normalize(doubled).scale() * 0.5 ==
          doctest::Approx(0.5 * compact.scale()).epsilon(1e-8));

    for (int n : {2, 3}) {
        auto k = normalize(RadialKernel::power_law_min(n, 0.3, 2.0));
        CHECK(std::abs(moment(k, 1).value - 1.0 / k1n(n)) < 1e-8);
    }
}

TEST_CASE("first-moment tail Q") {
    auto compact = normalize(RadialKernel::compact_indicator(2, 1.0));
    CHECK(tail_Q(compact, 1.0) == doctest::Approx(0.0));
    CHECK(tail_Q(compact, 2.5) == doctest::Approx(0.0));
    CHECK(tail_Q(compact, 0.0) == doctest::Approx(moment(compact, 1).value).epsilon(1e-8));

    auto plm = plm_normalized();
    double q2 = tail_Q(plm, 2.0);
    double oracle = q_riemann_oracle(plm.scale(), 0.5, 1.0, 2.0);
    CHECK(std::abs(q2 - oracle) / oracle < 1e-6);

    // nonincreasing on a grid, Q(0) = I^1
    double prev = tail_Q(plm, 0.0);
    CHECK(std::abs(prev - moment(plm, 1).value) < 1e-8);
    for (double r : {0.1, 0.3, 0.5, 1.0, 2.0, 4.0, 16.0}) {
        double q = tail_Q(plm, r);
        CHECK(q <= prev * (1.0 + 1e-12));
        prev = q;
    }
}

TEST_CASE("rescaling preserves the first moment and shifts Q") {
    auto plm = plm_normalized();
    auto same = rescale(plm, 1.0);
    for (double r : {0.2, 1.0, 3.0}) CHECK(same.profile(r) == doctest::Approx(plm.profile(r)));

    double i1 = moment(plm, 1).value;
    for (double eps : {1.0, 0.1, 0.01}) {
        auto keps = rescale(plm, eps);
        CHECK(std::abs(moment(keps, 1).value - i1) / i1 < 1e-8);
    }

    auto k01 = rescale(plm, 0.1);
    for (double r : {0.05, 0.2, 0.7}) {
        CHECK(tail_Q(k01, r) == doctest::Approx(tail_Q(plm, r / 0.1)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(rescale(plm, -1.0), std::domain_error);
}

TEST_CASE("hypothesis verdicts") {
    HypothesisGrid grid;
    grid.points = 32;

    auto plm = plm_normalized();
    auto rep = verify_hypotheses(plm, 0.5, 1.0, grid);
    CHECK(rep.h1);
    CHECK(rep.h2);
    CHECK(rep.h3);
    CHECK(rep.h4);
    CHECK(rep.h5);
    CHECK(rep.i0.divergent());
    CHECK(rep.normalization_residual < 1e-8);

    auto compact = normalize(RadialKernel::compact_indicator(2, 1.0));
    auto repc = verify_hypotheses(compact, 0.5, 1.0, grid);
    CHECK(repc.h5);
    CHECK(repc.h4);
    CHECK_FALSE(repc.h3);  // profile jumps at its support radius
    CHECK(tail_Q(compact, 1.5) == doctest::Approx(0.0));

    // decay exponent exactly 2n leaves no slack for any p0 > 0
    auto trunc = normalize(RadialKernel::truncated_power(2, 4.0, 1.0));
    auto rept = verify_hypotheses(trunc, 0.5, 1.0, grid);
    CHECK_FALSE(rept.h5);
    CHECK(rept.h5_refine_change >= 0.05);
}

TEST_CASE("alpha_star") {
    CHECK(alpha_star(2, 0.5, 1.0) == doctest::Approx(1.0 / 22.0).epsilon(1e-14));
    CHECK(alpha_star(2, 1.0 - 1e-9, 1.0) < 1e-9);
    // p0 -> infinity limit: (1 - s0) / (2 (n - s0 + 1))
    CHECK(alpha_star(2, 0.5, 1e9) == doctest::Approx(0.1).epsilon(1e-6));

    double prev = 0.0;
    for (double p0 : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        double a = alpha_star(2, 0.5, p0);
        CHECK(a > prev);
        CHECK(a < 0.5);
        prev = a;
    }
    prev = 1.0;
    for (double s0 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        double a = alpha_star(2, s0, 1.0);
        CHECK(a < prev);
        prev = a;
    }
}

TEST_CASE("1D slice profile mass identity") {
    auto compact = normalize(RadialKernel::compact_indicator(2, 1.0));
    CHECK(std::abs(one_dim_mass(compact, 1.0) - 1.0) < 1e-10);
    CHECK(std::abs(one_dim_mass(compact, 0.05) - 1.0) < 1e-10);

    auto plm = plm_normalized();
    CHECK(std::abs(one_dim_mass(plm, 0.37) - 1.0) < 1e-10);

    auto doubled = plm.with_scale(2.0 * plm.scale());
    CHECK(one_dim_mass(doubled, 0.2) == doctest::Approx(2.0).epsilon(1e-10));

    // quadrature route agrees with the closed form
    auto q = integrate_radial([&](double t) { return 2.0 * t * rho_eps(plm, 0.3, t); },
                              {0.3, 1.0});
    CHECK(q.converged());
    CHECK(q.value == doctest::Approx(one_dim_mass(plm, 0.3)).epsilon(1e-9));
}

TEST_CASE("second tail R: normalization, support, monotonicity, convexity") {
    for (auto k : {plm_normalized(), normalize(RadialKernel::compact_indicator(2, 1.0))}) {
        for (double eps : {1.0, 0.1}) {
            CHECK(std::abs(second_tail_R(k, eps, 0.0) - 1.0) < 1e-10);
        }
    }

    auto compact = normalize(RadialKernel::compact_indicator(2, 1.0));
    CHECK(second_tail_R(compact, 0.25, 0.25) == doctest::Approx(0.0));
    CHECK(second_tail_R(compact, 0.25, 5.0) == doctest::Approx(0.0));

    auto plm = plm_normalized();
    KernelCalculus calc(plm, 0.2);
    std::mt19937_64 rng = make_rng(1234);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        double a = U(rng), b = U(rng);
        if (a > b) std::swap(a, b);
        CHECK(calc.R(a) >= calc.R(b) - 1e-12);
    }
    // convexity: centered second difference >= -1e-8
    double h = 1e-3;
    for (double a : {0.05, 0.1, 0.3, 0.7, 1.5}) {
        double d2 = (calc.R(a + h) - 2.0 * calc.R(a) + calc.R(a - h)) / (h * h);
        CHECK(d2 >= -1e-8);
    }
    // S = -R' (finite differences)
    for (double a : {0.1, 0.4, 1.1}) {
        double fd = -(calc.R(a + h) - calc.R(a - h)) / (2.0 * h);
        CHECK(fd == doctest::Approx(calc.S(a)).epsilon(1e-4));
    }
}

TEST_CASE("kernel calculus ball moments and exterior masses") {
    auto plm = plm_normalized();
    KernelCalculus calc(plm, 0.3);
    auto geps = rescale(plm, 0.3);

    double m1 = calc.ball_moment(1, 0.5);
    auto q = integrate_radial(
        [&](double t) { return 2.0 * kPi * t * t * geps.profile(t) * (t <= 0.5 ? 1.0 : 0.0); },
        {0.3, 0.5});
    CHECK(m1 == doctest::Approx(q.value).epsilon(1e-6));

    double e1 = calc.exterior_first_moment(0.5);
    CHECK(e1 == doctest::Approx(tail_Q(geps, 0.5)).epsilon(1e-8));
    CHECK(calc.exterior_first_moment(0.0) ==
          doctest::Approx(moment(plm, 1).value).epsilon(1e-8));

    double e0 = calc.exterior_mass(0.5);
    auto q0 = integrate_to_infinity([&](double t) { return 2.0 * kPi * t * geps.profile(t); }, 0.5);
    CHECK(e0 == doctest::Approx(q0.value).epsilon(1e-8));
}
