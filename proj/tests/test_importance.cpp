#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "probest/estimators.hpp"
#include "probest/importance.hpp"
#include "probest/numeric.hpp"
#include "probest/oracle.hpp"
#include "test_util.hpp"

using namespace probest;
namespace est = probest::estimators;
namespace imp = probest::importance;

namespace {

ProbabilitySample make_is(std::initializer_list<std::tuple<OutcomeId, double, double>> draws) {
    std::vector<Draw> v;
    for (auto [id, x, y] : draws) v.push_back({id, x, y});
    return ProbabilitySample(std::move(v));
}

}  // namespace

TEST_CASE("pi0_is hand values and reduction") {
    const Event a({1});
    // all z = 1 -> k/n
    const auto same = make_is({{1, 0.3, 0.3}, {2, 0.7, 0.7}});
    CHECK(near(imp::pi0_is(same, a).estimate, 0.5, 1e-15));

    // in-event z = 2, out z = 1, k=1, n=2 -> 2/3
    const auto skew = make_is({{1, 0.6, 0.3}, {2, 0.4, 0.4}});
    CHECK(near(imp::pi0_is(skew, a).estimate, 2.0 / 3.0, 1e-15));

    CHECK(imp::pi0_is(make_is({{2, 0.4, 0.4}}), a).estimate == 0.0);
    CHECK_THROWS_AS(imp::pi0_is(ProbabilitySample({{1, 0.5, std::nullopt}}), a),
                    std::invalid_argument);
}

TEST_CASE("pi1_is hand value and reduction to pi1") {
    const Event a({1});
    // p=(0.3,0.7), p'=(0.5,0.5), n=2, both observed: 0.3/(1-0.25) = 0.4
    const auto s = make_is({{1, 0.3, 0.5}, {2, 0.7, 0.5}});
    CHECK(near(imp::pi1_is(s, a).estimate, 0.4, 1e-15));

    CHECK(imp::pi1_is(make_is({{2, 0.7, 0.5}}), a).estimate == 0.0);

    // p' = p gives the plain estimator to 1e-14 on identical draws
    const auto same = make_is({{1, 0.3, 0.3}, {2, 0.7, 0.7}});
    const ProbabilitySample plain({{1, 0.3, std::nullopt}, {2, 0.7, std::nullopt}});
    CHECK(near(imp::pi1_is(same, a).estimate, est::pi1(plain, a).estimate, 1e-14));
}

TEST_CASE("v1_is_exact against enumeration under a tilted measure") {
    const DiscreteDistribution target({1, 2, 3}, {0.5, 0.3, 0.2});
    const DiscreteDistribution sampling({1, 2, 3}, {0.2, 0.3, 0.5});
    const Event a({1, 2});
    const double pi = oracle::exact_pi(target, a);
    for (std::int64_t n = 1; n <= 4; ++n) {
        const auto moments = oracle::estimator_moments(
            target, sampling, a, n,
            [](const ProbabilitySample& s, const EventQuery& ev) {
                return std::optional<double>(imp::pi1_is(s, ev).estimate);
            },
            pi);
        CHECK(near(moments.bias, 0.0, 1e-12));
        CHECK(near(imp::v1_is_exact(target, sampling, a, n), moments.variance, 1e-12));
    }

    // reduction: sampling = target equals the plain v1
    for (std::int64_t n : {1, 3, 6}) {
        CHECK(near(imp::v1_is_exact(target, target, a, n), est::v1_exact(target, a, n),
                   1e-14));
    }
    CHECK(imp::v1_is_exact(target, sampling, Event({}), 3) == 0.0);
}

TEST_CASE("v1_is_hat is unbiased for n >= 2 under the sampling measure") {
    const DiscreteDistribution target({1, 2, 3}, {0.5, 0.3, 0.2});
    const DiscreteDistribution sampling({1, 2, 3}, {0.2, 0.3, 0.5});
    const Event a({1, 2});
    for (std::int64_t n = 2; n <= 4; ++n) {
        const double v = imp::v1_is_exact(target, sampling, a, n);
        const auto moments = oracle::estimator_moments(
            target, sampling, a, n,
            [](const ProbabilitySample& s, const EventQuery& ev) {
                return std::optional<double>(imp::v1_is_hat(s, ev));
            },
            v);
        CHECK(near(moments.bias, 0.0, 1e-12));
    }
}

TEST_CASE("pi2_is hand value and reductions") {
    const Event a({1, 2});
    // (x,y) = (0.5,0.4),(0.3,0.6), m=2: Z=1.75, W=4.1666..., estimate 0.84
    const auto s = make_is({{1, 0.5, 0.4}, {2, 0.3, 0.6}});
    const auto r = imp::pi2_is(s, a);
    CHECK(near(r.estimate, 0.84, 1e-14));

    // identical in-event draws -> m x
    const auto same = make_is({{1, 0.45, 0.2}, {1, 0.45, 0.2}});
    CHECK(near(imp::pi2_is(same, a).estimate, 2 * 0.45, 1e-15));

    // y = x reduces to the harmonic-mean form
    const auto reduce = make_is({{1, 0.5, 0.5}, {2, 0.3, 0.3}});
    const ProbabilitySample plain({{1, 0.5, std::nullopt}, {2, 0.3, std::nullopt}});
    CHECK(near(imp::pi2_is(reduce, a).estimate, est::pi2(plain, a).estimate, 1e-14));

    CHECK_THROWS_AS(imp::pi2_is(make_is({{3, 0.2, 0.9}}), a), NoInformationError);
}

TEST_CASE("v2_is_jackknife hand value and reduction") {
    const Event a({1, 2});
    const auto s = make_is({{1, 0.5, 0.4}, {2, 0.3, 0.6}});
    CHECK(near(imp::v2_is_jackknife(s, a), 0.0416, 1e-13));

    // identical in-event draws -> 0
    const auto same = make_is({{1, 0.45, 0.2}, {1, 0.45, 0.2}});
    CHECK(near(imp::v2_is_jackknife(same, a), 0.0, 1e-15));

    // y = x reduces to the plain jackknife
    const auto reduce = make_is({{1, 0.5, 0.5}, {2, 0.3, 0.3}});
    const ProbabilitySample plain({{1, 0.5, std::nullopt}, {2, 0.3, std::nullopt}});
    CHECK(near(imp::v2_is_jackknife(reduce, a), est::v2_jackknife(plain, a), 1e-14));

    CHECK_THROWS_AS(imp::v2_is_jackknife(make_is({{1, 0.5, 0.4}}), a), std::invalid_argument);
}

TEST_CASE("optimal_design structure") {
    // uniform target on the event keeps the design uniform (symmetry)
    const DiscreteDistribution uni({1, 2, 3, 4}, {0.25, 0.25, 0.25, 0.25});
    const auto d_uni = imp::optimal_design(uni, Event({1, 2, 3, 4}), 10);
    REQUIRE(d_uni.support.size() == 4);
    for (double w : d_uni.weights) CHECK(near(w, 0.25, 1e-12));

    // singleton event: point mass
    const DiscreteDistribution d3({1, 2, 3}, {0.5, 0.3, 0.2});
    const auto point = imp::optimal_design(d3, Event({2}), 10);
    REQUIRE(point.support.size() == 1);
    CHECK(point.support[0] == 2);
    CHECK(near(point.weights[0], 1.0, 1e-15));

    CHECK_THROWS_AS(imp::optimal_design(d3, Event({1}), 1), std::invalid_argument);
}

TEST_CASE("optimal_design invariants and grid comparison") {
    // log-spaced probabilities over two decades on a 4-outcome event
    std::vector<double> p = {0.001, 0.0046415888336127775, 0.021544346900318832, 0.1};
    const double rest = 1.0 - (p[0] + p[1] + p[2] + p[3]);
    const DiscreteDistribution dist({1, 2, 3, 4, 5}, {p[0], p[1], p[2], p[3], rest});
    const Event a({1, 2, 3, 4});
    const std::int64_t n = 10;
    const auto design = imp::optimal_design(dist, a, n);

    // valid distribution on its support
    double total = 0.0;
    for (double w : design.weights) {
        CHECK(w >= 0.0);
        total += w;
    }
    CHECK(near(total, 1.0, 1e-12));

    // the largest feasible support wins
    CHECK(design.feasible_sizes.size() >= 1);
    CHECK(design.support.size() == design.feasible_sizes.back());

    // excluded mass accounted for
    CHECK(design.support.size() + design.excluded.size() == a.cardinality());

    // the design never loses to uniform sampling on the same support
    imp::SamplingDesign uniform = design;
    uniform.weights.assign(design.support.size(),
                           1.0 / static_cast<double>(design.support.size()));
    CHECK(design.objective <= imp::design_objective(dist, a, uniform, n) + 1e-12);

    // spread of interior weights: max p' - min p' <= C (pmin^e - pmax^e)
    const double e = -2.0 / (static_cast<double>(n) - 1.0);
    const auto [mn, mx] = std::minmax_element(design.weights.begin(), design.weights.end());
    const double pmin_sup = dist.prob(design.support.back());
    const double pmax_sup = dist.prob(design.support.front());
    CHECK(*mx - *mn <=
          design.normalization * (std::pow(pmin_sup, e) - std::pow(pmax_sup, e)) + 1e-12);

    // beats the 0.02 simplex grid
    const auto grid = oracle::simplex_grid_search(dist, a, n, 0.02);
    CHECK(design.objective <= grid.objective + 1e-12);

    // serialization carries one line per event outcome
    std::ostringstream csv;
    design.to_csv(csv, dist);
    std::size_t lines = 0;
    for (char c : csv.str())
        if (c == '\n') ++lines;
    CHECK(lines == a.cardinality());
}
