#include <doctest.h>

#include <cmath>

#include "data/special_reference.hpp"
#include "qrng/errors.hpp"
#include "qrng/special.hpp"

using namespace qrng;

namespace {

double rel_err(double got, double want) {
    if (want == 0.0) return std::abs(got);
    return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("erfc matches the 50-digit reference to 1e-10 including deep tails") {
    for (const auto& ref : kErfcRef) {
        CAPTURE(ref.x);
        CHECK(rel_err(qrng::erfc(ref.x), ref.value) < 1e-10);
    }
}

TEST_CASE("regularized incomplete gamma matches the reference to 1e-10") {
    for (const auto& ref : kGammaRef) {
        CAPTURE(ref.a);
        CAPTURE(ref.x);
        CHECK(rel_err(regularized_gamma_p(ref.a, ref.x), ref.p) < 1e-10);
        CHECK(rel_err(regularized_gamma_q(ref.a, ref.x), ref.q) < 1e-10);
    }
}

TEST_CASE("gamma identities and edges") {
    CHECK(regularized_gamma_p(3.0, 0.0) == 0.0);
    CHECK(regularized_gamma_q(3.0, 0.0) == 1.0);
    // P + Q = 1 across a sweep
    for (double a = 0.5; a < 300.0; a *= 2.3)
        for (double x = 0.1; x < 500.0; x *= 3.1)
            CHECK(regularized_gamma_p(a, x) + regularized_gamma_q(a, x) ==
                  doctest::Approx(1.0).epsilon(1e-12));
    // Q(1, x) = exp(-x)
    CHECK(regularized_gamma_q(1.0, 7.5) == doctest::Approx(std::exp(-7.5)).epsilon(1e-13));
    CHECK_THROWS_AS(regularized_gamma_q(-1.0, 1.0), ConfigError&);
    CHECK_THROWS_AS(regularized_gamma_p(1.0, -1.0), ConfigError&);
}

TEST_CASE("normal cdf basics") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.220960574271786e-16).epsilon(1e-10));
}
