#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlperim/quadrature.hpp"
#include "nlperim/util.hpp"

using namespace nlperim;

TEST_CASE("finite panels reproduce smooth integrals") {
    auto r = integrate_finite([](double x) { return std::sin(x); }, 0.0, kPi);
    CHECK(r.converged());
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

    auto p = integrate_finite([](double x) { return x * x * x - x; }, -1.0, 3.0);
    CHECK(p.value == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("dyadic tail handles power decay") {
    // int_1^inf x^-3 dx = 1/2
    auto r = integrate_to_infinity([](double x) { return std::pow(x, -3.0); }, 1.0);
    CHECK(r.converged());
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("dyadic head handles integrable singularities") {
    // int_0^1 x^-1/2 dx = 2
    auto r = integrate_from_zero([](double x) { return 1.0 / std::sqrt(x); }, 1.0);
    CHECK(r.converged());
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("non-integrable singularity is flagged divergent, not overflowed") {
    auto r = integrate_from_zero([](double x) { return std::pow(x, -1.5); }, 1.0);
    CHECK(r.status == IntegralStatus::divergent);

    auto t = integrate_to_infinity([](double x) { return 1.0 / x; }, 1.0);
    CHECK(t.status == IntegralStatus::divergent);
}

TEST_CASE("radial splits at breakpoints") {
    // piecewise: x^-1/2 on (0,1), x^-4 on (1,inf): 2 + 1/3
    auto f = [](double x) { return x < 1.0 ? 1.0 / std::sqrt(x) : std::pow(x, -4.0); };
    auto r = integrate_radial(f, {1.0});
    CHECK(r.converged());
    CHECK(r.value == doctest::Approx(2.0 + 1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("closed-form power integral agrees with quadrature") {
    auto exact = power_integral(2.5, -0.5, 0.0, 4.0);
    CHECK(exact.converged());
    auto quad = integrate_from_zero([](double x) { return 2.5 * std::pow(x, -0.5); }, 4.0);
    CHECK(exact.value == doctest::Approx(quad.value).epsilon(1e-10));

    CHECK(power_integral(1.0, -1.0, 0.0, 1.0).status == IntegralStatus::divergent);
    CHECK(power_integral(1.0, -1.0, 1.0, 2.0).value == doctest::Approx(std::log(2.0)));
    CHECK(power_integral(3.0, -2.0, 1.0, INFINITY).value == doctest::Approx(3.0));
}
