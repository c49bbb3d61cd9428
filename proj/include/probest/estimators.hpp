#ifndef PROBEST_ESTIMATORS_HPP
#define PROBEST_ESTIMATORS_HPP

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "probest/sample_space.hpp"

// Estimators of event probabilities and means for samples drawn from the
// target distribution itself, with their exact variances and unbiased
// variance estimators. Everything here is a pure function of (sample, event):
// randomness lives exclusively in the simulators, which is what makes these
// testable by exhaustive enumeration.

namespace probest::estimators {

// Equal probability mass pi/m on each of m event outcomes.
struct EqualMassSpec {
    double pi = 0.0;
    std::uint64_t m = 1;
    std::int64_t n = 1;
};

// Mean-estimation problem: an observable X per outcome and the free
// reference point xi the estimator is anchored at.
struct MeanProblem {
    std::unordered_map<OutcomeId, double> values;  // X
    double xi = 0.0;
};

// A run of event outcomes sharing one probability value. The exact-variance
// sums depend on the distribution only through these (value, count) groups,
// which keeps large symmetric event spaces (e.g. chain trajectories) cheap.
struct WeightGroup {
    double p = 0.0;
    double count = 1.0;
};

// --- relative-frequency benchmark ------------------------------------------

// k/n with plug-in variance estimate pi0(1-pi0)/n.
EstimateReport pi0(const ProbabilitySample& sample, const EventQuery& event);

// pi(1-pi)/n
double v0_exact(double pi, std::int64_t n);

// max(k/n, observed event mass). Biased; kept as the obvious but
// inadmissible-for-testing improvement.
EstimateReport pi0_max(const ProbabilitySample& sample, const EventQuery& event);

// --- inclusion-weighted estimators ------------------------------------------

// sum over distinct observed event outcomes of p / (1 - (1-p)^n);
// n is the full sample size. Variance estimate: v1_hat.
EstimateReport pi1(const ProbabilitySample& sample, const EventQuery& event);

// Exact Var(pi1) given the full distribution. O(|A|^2).
double v1_exact(const DiscreteDistribution& dist, const Event& event, std::int64_t n);

// Same, with the event's probability multiset given as groups.
double v1_exact_grouped(std::span<const WeightGroup> groups, std::int64_t n);

// Large-n approximation of v1 and its closed upper bound
// m^2 pmax^2 (1-2pmin)^n + m pmax^2 (1-pmin)^n. The bound dominates the
// approximation only when pmin <= 1/2.
struct AsymptoticV1 {
    double approx = 0.0;
    double bound = 0.0;
};
AsymptoticV1 v1_asymptotic_bound(const DiscreteDistribution& dist, const Event& event,
                                 std::int64_t n);
AsymptoticV1 v1_asymptotic_bound_grouped(std::span<const WeightGroup> groups, std::int64_t n);

// Closed form of v1 when the event mass is spread equally over m outcomes.
double v1_equal_mass(const EqualMassSpec& spec);

// Unbiased estimator of sum over the event of p^2 (1-p)^n.
double est_sum_p2qn(const ProbabilitySample& sample, const EventQuery& event);

// Unbiased estimator of v1. The pair sum runs over distinct observed pairs;
// the diagonal reduces to p^2 q^n / (1-q^n)^2 once the pair and single terms
// are combined (see the per-pair kernel in the implementation). May be
// negative on unlucky samples and is returned as-is; exact unbiasedness
// requires n >= 2 (with one draw no estimator can reach the pair terms).
double v1_hat(const ProbabilitySample& sample, const EventQuery& event);

// 1 - sum over observed non-event outcomes of p/(1-q^n); unbiased.
// Variance estimate: v1_hat over the complement of the event.
// `dist_support_unknown` only annotates the report: the dual relies on every
// positive-probability outcome being observable.
EstimateReport pi1_dual(const ProbabilitySample& sample, const EventQuery& event,
                        bool dist_support_unknown = false);

// Inverse-variance-weighted combination of pi0, pi1 and pi1_dual using their
// estimated variances. Components whose variance estimate is <= 0 or
// non-finite are excluded; if all three are excluded, falls back to pi1.
EstimateReport pi1_combined(const ProbabilitySample& sample, const EventQuery& event);

// --- mean estimation ---------------------------------------------------------

// xi + sum over observed outcomes of p (X - xi) / (1 - q^n);
// unbiased for every fixed xi.
EstimateReport mu1(const ProbabilitySample& sample, const MeanProblem& problem);

// Exact Var(mu1) at a fixed reference point, from the full distribution.
double var_mu1_exact(const DiscreteDistribution& dist,
                     const std::unordered_map<OutcomeId, double>& values, std::int64_t n,
                     double xi);

// The variance-minimizing reference point (closed form). The single-sum
// terms use p^2 X and p^2 weights; the printed form carries a stray factor
// there and this reading is the one that matches numeric minimization.
double optimal_xi(const DiscreteDistribution& dist,
                  const std::unordered_map<OutcomeId, double>& values, std::int64_t n);

// pi1 + [1 - sum over observed of p/(1-q^n)] * pi0: the control-variate form
// with plug-in reference point pi0. Not exactly unbiased (the reference point
// is data-dependent).
EstimateReport pi1_cv(const ProbabilitySample& sample, const EventQuery& event);

// --- harmonic-mean estimator ---------------------------------------------------

// m * k / sum of 1/x over in-event draws. Requires k >= 1: with no event
// draw the estimator carries no information and NoInformationError is thrown
// rather than returning 0. Variance estimate: leave-one-out jackknife when
// k >= 2.
EstimateReport pi2(const ProbabilitySample& sample, const EventQuery& event);

// Delta-method variance of pi2: (pi^2/(m^2 k)) [pi * sum 1/p - m^2].
// Large-k approximation. Returns +inf if some event outcome has p = 0.
double v2_exact(const DiscreteDistribution& dist, const Event& event, std::int64_t k);

enum class JackknifeForm { exact, large_k };

// Jackknife variance estimate of pi2; k >= 2 required.
double v2_jackknife(const ProbabilitySample& sample, const EventQuery& event,
                    JackknifeForm form = JackknifeForm::exact);

}  // namespace probest::estimators

#endif
