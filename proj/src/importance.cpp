#include "probest/importance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "probest/numeric.hpp"

namespace probest::importance {

using num::inclusion_prob;
using num::joint_excess;
using num::KahanSum;
using num::single_excess;
using num::survival_pow;

namespace {

void require_importance(const ProbabilitySample& sample, const char* who) {
    if (sample.empty())
        throw std::invalid_argument(std::string(who) + ": empty sample");
    if (!sample.has_importance_weights())
        throw std::invalid_argument(std::string(who) +
                                    ": every draw needs a sampling probability y");
}

}  // namespace

double SamplingDesign::prob(OutcomeId id) const {
    for (std::size_t i = 0; i < support.size(); ++i)
        if (support[i] == id) return weights[i];
    return 0.0;
}

void SamplingDesign::to_csv(std::ostream& out, const DiscreteDistribution& target) const {
    char buf[96];
    for (std::size_t i = 0; i < support.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g",
                      static_cast<unsigned long long>(support[i]), target.prob(support[i]),
                      weights[i]);
        out << buf << '\n';
    }
    for (OutcomeId id : excluded) {
        std::snprintf(buf, sizeof(buf), "%llu,%.17g,0",
                      static_cast<unsigned long long>(id), target.prob(id));
        out << buf << '\n';
    }
}

EstimateReport pi0_is(const ProbabilitySample& sample, const EventQuery& event) {
    require_importance(sample, "pi0_is");
    KahanSum z_in, z_all;
    std::size_t k = 0;
    for (const Draw& d : sample.draws()) {
        const double z = d.x / *d.y;
        z_all.add(z);
        if (event.contains(d.outcome)) {
            z_in.add(z);
            ++k;
        }
    }
    if (!(z_all.value() > 0.0))
        throw std::invalid_argument("pi0_is: total likelihood-ratio mass is zero");
    EstimateReport r{EstimatorId::pi0_is, z_in.value() / z_all.value(), std::nullopt,
                     sample.size(), k,
                     "self-normalized ratio estimate; asymptotically unbiased"};
    return r;
}

EstimateReport pi1_is(const ProbabilitySample& sample, const EventQuery& event) {
    require_importance(sample, "pi1_is");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    KahanSum acc;
    for (const Draw& d : observed_set(sample))
        if (event.contains(d.outcome))
            acc.add(d.x / inclusion_prob(*d.y, n));
    EstimateReport r{EstimatorId::pi1_is, acc.value(), v1_is_hat(sample, event),
                     sample.size(), count_in_event(sample, event), ""};
    return r;
}

namespace {

// Exact Var(pi1_is) over explicit (target, sampling) probability pairs.
double v1_is_exact_pairs(const std::vector<std::pair<double, double>>& members,
                         std::int64_t n) {
    if (n < 1) throw std::invalid_argument("v1_is_exact: n must be >= 1");
    KahanSum acc;
    for (const auto& [ai, bi] : members) {
        const double inc_i = inclusion_prob(bi, n);
        for (const auto& [aj, bj] : members) {
            acc.add(ai * aj * joint_excess(bi, bj, n) / (inc_i * inclusion_prob(bj, n)));
        }
        acc.add(ai * ai * single_excess(bi, n) / (inc_i * inc_i));
    }
    return acc.value();
}

}  // namespace

double v1_is_exact(const DiscreteDistribution& target, const DiscreteDistribution& sampling,
                   const Event& event, std::int64_t n) {
    event.validate_against(target);
    std::vector<std::pair<double, double>> members;
    for (OutcomeId id : event.members()) {
        const double b = sampling.contains(id) ? sampling.prob(id) : 0.0;
        if (b > 0.0) members.emplace_back(target.prob(id), b);
    }
    return v1_is_exact_pairs(members, n);
}

double v1_is_exact(const DiscreteDistribution& target, const SamplingDesign& design,
                   const Event& event, std::int64_t n) {
    event.validate_against(target);
    std::vector<std::pair<double, double>> members;
    for (std::size_t i = 0; i < design.support.size(); ++i)
        if (design.weights[i] > 0.0)
            members.emplace_back(target.prob(design.support[i]), design.weights[i]);
    return v1_is_exact_pairs(members, n);
}

double v1_is_hat(const ProbabilitySample& sample, const EventQuery& event) {
    require_importance(sample, "v1_is_hat");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    std::vector<Draw> obs;
    for (const Draw& d : observed_set(sample))
        if (event.contains(d.outcome)) obs.push_back(d);

    // same kernel as the plain v1_hat, but the inclusion terms use y
    KahanSum acc;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double inc_i = inclusion_prob(*obs[i].y, n);
        for (std::size_t j = i + 1; j < obs.size(); ++j) {
            const double inc_j = inclusion_prob(*obs[j].y, n);
            const double excess = joint_excess(*obs[i].y, *obs[j].y, n);
            const double joint = inc_i * inc_j + excess;
            acc.add(2.0 * obs[i].x * obs[j].x * excess / (inc_i * inc_j * joint));
        }
        acc.add(obs[i].x * obs[i].x * survival_pow(*obs[i].y, n) / (inc_i * inc_i));
    }
    return acc.value();
}

EstimateReport pi2_is(const ProbabilitySample& sample, const EventQuery& event) {
    require_importance(sample, "pi2_is");
    KahanSum z_sum, w_sum;
    std::size_t k = 0;
    for (const Draw& d : sample.draws()) {
        if (!event.contains(d.outcome)) continue;
        ++k;
        z_sum.add(d.x / *d.y);
        w_sum.add(1.0 / *d.y);
    }
    if (k == 0)
        throw NoInformationError("pi2_is: no draw fell in the event");
    const double m = static_cast<double>(event.cardinality());
    EstimateReport r{EstimatorId::pi2_is, m * z_sum.value() / w_sum.value(), std::nullopt,
                     sample.size(), k, ""};
    if (k >= 2) r.variance_estimate = v2_is_jackknife(sample, event);
    else r.notes = "k = 1: jackknife variance estimate unavailable";
    return r;
}

double v2_is_jackknife(const ProbabilitySample& sample, const EventQuery& event) {
    require_importance(sample, "v2_is_jackknife");
    std::vector<std::pair<double, double>> zw;  // (z, 1/y) per in-event draw
    for (const Draw& d : sample.draws())
        if (event.contains(d.outcome)) zw.emplace_back(d.x / *d.y, 1.0 / *d.y);
    const std::size_t k = zw.size();
    if (k < 2) throw std::invalid_argument("v2_is_jackknife: needs at least two event draws");

    KahanSum z_acc, w_acc;
    for (const auto& [z, iy] : zw) {
        z_acc.add(z);
        w_acc.add(iy);
    }
    const double Zs = z_acc.value(), Ws = w_acc.value();
    const double ratio = Zs / Ws;
    KahanSum dev;
    for (const auto& [z, iy] : zw) {
        const double loo = (Zs - z) / (Ws - iy);
        dev.add((ratio - loo) * (ratio - loo));
    }
    const double m = static_cast<double>(event.cardinality());
    const double kk = static_cast<double>(k);
    return m * m * (kk - 1.0) / kk * dev.value();
}

SamplingDesign optimal_design(const DiscreteDistribution& target, const Event& event,
                              std::int64_t n) {
    if (n < 2) throw std::invalid_argument("optimal_design: n must be >= 2");
    event.validate_against(target);
    if (event.cardinality() == 0) throw std::invalid_argument("optimal_design: empty event");

    // event outcomes sorted by target probability descending, ids ascending on ties
    std::vector<OutcomeId> order(event.members());
    std::stable_sort(order.begin(), order.end(), [&](OutcomeId a, OutcomeId b) {
        const double pa = target.prob(a), pb = target.prob(b);
        if (pa != pb) return pa > pb;
        return a < b;
    });

    const double expo = -2.0 / (static_cast<double>(n) - 1.0);
    SamplingDesign best;
    double running_pow_sum = 0.0;
    std::vector<double> pow_terms(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        pow_terms[i] = std::pow(target.prob(order[i]), expo);

    for (std::size_t j = 1; j <= order.size(); ++j) {
        if (target.prob(order[j - 1]) <= 0.0) break;  // zero-mass outcomes never enter
        running_pow_sum += pow_terms[j - 1];
        const double c = (static_cast<double>(j) - 1.0) / running_pow_sum;
        // feasibility is decided by the smallest probability in the support;
        // exact-boundary solutions are admitted up to rounding noise
        bool feasible = true;
        std::vector<double> weights(j);
        for (std::size_t i = 0; i < j; ++i) {
            weights[i] = std::max(0.0, 1.0 - c * pow_terms[i]);
            if (1.0 - c * pow_terms[i] < -1e-12) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;
        best.feasible_sizes.push_back(j);
        best.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(j));
        best.weights = std::move(weights);
        best.normalization = c;
        best.alpha = target.prob(order[j - 1]);
    }

    best.excluded.assign(order.begin() + static_cast<std::ptrdiff_t>(best.support.size()),
                         order.end());
    KahanSum excl;
    for (OutcomeId id : best.excluded) excl.add(target.prob(id));
    best.excluded_mass = excl.value();
    best.objective = design_objective(target, event, best, n);
    return best;
}

double design_objective(const DiscreteDistribution& target, const Event& event,
                        const SamplingDesign& design, std::int64_t n) {
    KahanSum acc;
    for (OutcomeId id : event.members()) {
        const double p = target.prob(id);
        acc.add(p * p * survival_pow(design.prob(id), n));
    }
    return acc.value();
}

}  // namespace probest::importance
