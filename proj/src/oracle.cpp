#include "probest/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "probest/estimators.hpp"
#include "probest/numeric.hpp"

namespace probest::oracle {

using num::KahanSum;

std::string to_json(const MomentReport& report, const std::string& estimator,
                    std::int64_t n) {
    nlohmann::json j;
    j["estimator"] = estimator;
    j["n"] = n;
    j["mean"] = report.mean;
    j["variance"] = report.variance;
    j["bias"] = report.bias;
    j["defined_fraction"] = report.defined_fraction;
    return j.dump();
}

double exact_pi(const DiscreteDistribution& dist, const Event& event) {
    event.validate_against(dist);
    KahanSum acc;
    for (OutcomeId id : event.members()) acc.add(dist.prob(id));
    return acc.value();
}

MomentReport estimator_moments(const DiscreteDistribution& target,
                               const DiscreteDistribution& sampling, const Event& event,
                               std::int64_t n, const EstimatorFn& estimator, double truth,
                               const EnumerationBudget& budget) {
    if (n < 1) throw std::invalid_argument("estimator_moments: n must be >= 1");
    if (!estimator) throw std::invalid_argument("estimator_moments: null estimator");
    const std::size_t d = sampling.size();

    double planned = 1.0;
    for (std::int64_t i = 0; i < n; ++i) planned *= static_cast<double>(d);
    if (planned > static_cast<double>(budget.max_tuples))
        throw std::runtime_error("estimator_moments: enumeration budget exceeded");

    // target probabilities in sampling index order (x annotations); outcomes
    // the target does not list still need an annotation, which the sample
    // type rejects at 0 -- such outcomes are simply not part of the target
    // space and are rejected here.
    std::vector<double> x_of(d), y_of(d);
    for (std::size_t i = 0; i < d; ++i) {
        const OutcomeId id = sampling.outcome(i);
        if (!target.contains(id))
            throw std::invalid_argument("estimator_moments: sampling outcome absent from target");
        x_of[i] = target.prob(id);
        y_of[i] = sampling.weight(i);
    }
    // distinct sampling object => importance mode: draws carry y annotations
    const bool importance_mode = &sampling != &target;
    const EventQuery query(event);

    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<Draw> draws(static_cast<std::size_t>(n));
    KahanSum w_defined, w_mean, w_second;
    std::uint64_t tuples = 0;

    for (;;) {
        double w = 1.0;
        bool possible = true;
        for (std::int64_t i = 0; i < n; ++i) {
            const double yi = y_of[idx[static_cast<std::size_t>(i)]];
            if (yi <= 0.0) {
                possible = false;
                break;
            }
            w *= yi;
        }
        if (possible) {
            ++tuples;
            for (std::int64_t i = 0; i < n; ++i) {
                const std::size_t o = idx[static_cast<std::size_t>(i)];
                Draw& dr = draws[static_cast<std::size_t>(i)];
                dr.outcome = sampling.outcome(o);
                dr.x = x_of[o];
                if (importance_mode) dr.y = y_of[o];
                else dr.y.reset();
            }
            const ProbabilitySample sample{std::vector<Draw>(draws)};
            if (auto value = estimator(sample, query)) {
                w_defined.add(w);
                w_mean.add(w * *value);
                w_second.add(w * *value * *value);
            }
        }
        // mixed-radix odometer over outcome indices
        std::int64_t pos = n - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < d) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    MomentReport report;
    report.tuples = tuples;
    report.defined_fraction = w_defined.value();
    if (w_defined.value() > 0.0) {
        report.mean = w_mean.value() / w_defined.value();
        report.variance = w_second.value() / w_defined.value() - report.mean * report.mean;
        report.bias = report.mean - truth;
    } else {
        report.mean = report.variance = std::numeric_limits<double>::quiet_NaN();
        report.bias = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

MomentReport estimator_moments(const DiscreteDistribution& target, const Event& event,
                               std::int64_t n, const EstimatorFn& estimator,
                               const EnumerationBudget& budget) {
    return estimator_moments(target, target, event, n, estimator, exact_pi(target, event),
                             budget);
}

double variance_of_mu1_at_xi(const DiscreteDistribution& dist,
                             const std::unordered_map<OutcomeId, double>& values,
                             std::int64_t n, double xi, const EnumerationBudget& budget) {
    estimators::MeanProblem problem{values, xi};
    KahanSum mu;
    for (std::size_t i = 0; i < dist.size(); ++i)
        mu.add(dist.weight(i) * values.at(dist.outcome(i)));
    Event everything{dist.outcomes()};
    const EstimatorFn fn = [&problem](const ProbabilitySample& s, const EventQuery&) {
        return std::optional<double>(estimators::mu1(s, problem).estimate);
    };
    return estimator_moments(dist, dist, everything, n, fn, mu.value(), budget).variance;
}

double minimize_mu1_variance(const DiscreteDistribution& dist,
                             const std::unordered_map<OutcomeId, double>& values,
                             std::int64_t n, double lo, double hi, double tol,
                             const EnumerationBudget& budget) {
    if (!(lo < hi)) throw std::invalid_argument("minimize_mu1_variance: empty interval");
    auto f = [&](double xi) { return variance_of_mu1_at_xi(dist, values, n, xi, budget); };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

namespace {

void compositions(std::vector<std::uint32_t>& cells, std::size_t pos, std::uint32_t remaining,
                  const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
    if (pos + 1 == cells.size()) {
        cells[pos] = remaining;
        fn(cells);
        return;
    }
    for (std::uint32_t c = 0; c <= remaining; ++c) {
        cells[pos] = c;
        compositions(cells, pos + 1, remaining - c, fn);
    }
}

}  // namespace

GridSearchResult simplex_grid_search(const DiscreteDistribution& dist, const Event& event,
                                     std::int64_t n, double step,
                                     const EnumerationBudget& budget) {
    event.validate_against(dist);
    const std::size_t d = event.cardinality();
    if (d == 0) throw std::invalid_argument("simplex_grid_search: empty event");
    const double steps_f = 1.0 / step;
    const auto steps = static_cast<std::uint32_t>(std::llround(steps_f));
    if (std::abs(steps_f - static_cast<double>(steps)) > 1e-9)
        throw std::invalid_argument("simplex_grid_search: 1/step must be integral");

    // grid size C(steps + d - 1, d - 1)
    double planned = 1.0;
    for (std::size_t i = 1; i < d; ++i)
        planned *= static_cast<double>(steps + i) / static_cast<double>(i);
    if (planned > static_cast<double>(budget.max_tuples))
        throw std::runtime_error("simplex_grid_search: grid exceeds enumeration budget");

    std::vector<double> target_p;
    target_p.reserve(d);
    for (OutcomeId id : event.members()) target_p.push_back(dist.prob(id));

    GridSearchResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> cells(d, 0);
    compositions(cells, 0, steps, [&](const std::vector<std::uint32_t>& comp) {
        ++best.evaluated;
        double obj = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double pp = static_cast<double>(comp[i]) * step;
            obj += target_p[i] * target_p[i] * num::survival_pow(pp, n);
        }
        if (obj < best.objective) {
            best.objective = obj;
            best.weights.assign(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                best.weights[i] = static_cast<double>(comp[i]) * step;
        }
    });
    return best;
}

}  // namespace probest::oracle
