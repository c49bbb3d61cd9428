#include <doctest.h>

#include <cmath>

#include "probest/numeric.hpp"

using namespace probest;

TEST_CASE("survival and inclusion powers stay accurate in extreme regimes") {
    CHECK(num::survival_pow(0.3, 2) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(num::inclusion_prob(0.3, 2) == doctest::Approx(0.51).epsilon(1e-15));
    CHECK(num::survival_pow(1.0, 5) == 0.0);
    CHECK(num::inclusion_prob(1.0, 5) == 1.0);
    CHECK(num::survival_pow(0.5, 0) == 1.0);
    CHECK(num::inclusion_prob(0.5, 0) == 0.0);

    // tiny p, huge n: 1-(1-p)^n ~ n p, far below double-rounding of direct powering
    const double p = 1e-12;
    CHECK(num::inclusion_prob(p, 1000) == doctest::Approx(1000 * p).epsilon(1e-9));
    // large n decay without underflow surprises
    CHECK(std::log(num::survival_pow(0.3, 400)) ==
          doctest::Approx(400 * std::log1p(-0.3)).epsilon(1e-14));
}

TEST_CASE("pow_int handles zero and negative bases") {
    CHECK(num::pow_int(0.0, 0) == 1.0);
    CHECK(num::pow_int(0.0, 3) == 0.0);
    CHECK(num::pow_int(-0.5, 2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(num::pow_int(-0.5, 3) == doctest::Approx(-0.125).epsilon(1e-15));
}

TEST_CASE("joint_excess matches the direct difference where that is stable") {
    auto direct = [](double a, double b, std::int64_t n) {
        return std::pow(1.0 - a - b, n) - std::pow(1.0 - a, n) * std::pow(1.0 - b, n);
    };
    for (double a : {0.1, 0.4, 0.7}) {
        for (double b : {0.2, 0.5}) {
            for (std::int64_t n : {1, 2, 5}) {
                CHECK(num::joint_excess(a, b, n) ==
                      doctest::Approx(direct(a, b, n)).epsilon(1e-12));
            }
        }
    }
    CHECK(num::joint_excess(0.0, 0.5, 7) == 0.0);
    // the covariance kernel of inclusion indicators is <= 0 termwise
    CHECK(num::joint_excess(0.3, 0.2, 50) <= 0.0);
}

TEST_CASE("single_excess is nonnegative and stable") {
    for (double p : {0.01, 0.3, 0.5, 0.8, 1.0}) {
        for (std::int64_t n : {1, 2, 10, 100}) {
            const double v = num::single_excess(p, n);
            const double direct = std::pow(1 - p, n) - std::pow(1 - 2 * p, n);
            CHECK(v == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("binomial coefficients") {
    CHECK(num::binomial_u64(20, 10) == 184756);
    CHECK(num::binomial_u64(0, 0) == 1);
    CHECK(num::binomial(19, 9) == doctest::Approx(92378.0));
    CHECK(num::binomial(5, 7) == 0.0);
}

TEST_CASE("hyp2f1 degenerate identity 2F1(1,b;b;x) = 1/(1-x)") {
    for (double x : {0.1, 0.5, 0.9}) {
        CHECK(num::hyp2f1_1bc(7.0, 7.0, x) == doctest::Approx(1.0 / (1.0 - x)).epsilon(1e-12));
    }
    CHECK(num::hyp2f1_1bc(3.0, 5.0, 0.0) == 1.0);
}

TEST_CASE("rng stream derivation is deterministic and seed-sensitive") {
    const std::uint64_t a = num::derive_stream_seed(42, 0);
    CHECK(a == num::derive_stream_seed(42, 0));
    CHECK(a != num::derive_stream_seed(42, 1));
    CHECK(a != num::derive_stream_seed(43, 0));
    num::Rng r1(a), r2(a);
    for (int i = 0; i < 100; ++i) {
        const double u = r1.u01();
        CHECK(u == r2.u01());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("kahan summation keeps 1e-12-scale accuracy over many tiny terms") {
    num::KahanSum acc;
    for (int i = 0; i < 1000000; ++i) acc.add(1e-10);
    CHECK(acc.value() == doctest::Approx(1e-4).epsilon(1e-13));
}
