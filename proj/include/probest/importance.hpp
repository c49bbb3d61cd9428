#ifndef PROBEST_IMPORTANCE_HPP
#define PROBEST_IMPORTANCE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "probest/estimators.hpp"
#include "probest/sample_space.hpp"

// Generalization of the estimators to samples drawn from a sampling
// distribution different from the target, plus the optimal sampling-design
// construction. Samples here must carry y (the sampling probability) on
// every draw; z = x/y is the likelihood ratio.

namespace probest::importance {

// A sampling distribution supported on the event outcomes with the largest
// target probabilities. Outcomes below the threshold alpha get zero sampling
// mass; inside the support p' = 1 - C p^{-2/(n-1)}.
struct SamplingDesign {
    std::vector<OutcomeId> support;       // sorted by target probability, descending
    std::vector<double> weights;          // p' per support outcome, sums to 1
    std::vector<OutcomeId> excluded;      // event outcomes with zero sampling mass
    double excluded_mass = 0.0;           // target mass the design cannot see
    double alpha = 0.0;                   // support threshold: p >= alpha
    double normalization = 0.0;           // the constant C
    double objective = 0.0;               // sum over the event of p^2 (1-p')^n
    std::vector<std::size_t> feasible_sizes;  // every support size with all p' >= 0

    double prob(OutcomeId id) const;  // 0 outside the support

    // CSV, one "outcome_id,p,p_prime" line per event outcome (target
    // probabilities supplied by caller order: support then excluded).
    void to_csv(std::ostream& out, const DiscreteDistribution& target) const;
};

// Self-normalized ratio estimator: sum of in-event z over sum of all z.
// Only asymptotically unbiased.
EstimateReport pi0_is(const ProbabilitySample& sample, const EventQuery& event);

// Inclusion-weighted estimator with inclusion probabilities under the
// sampling distribution: sum over distinct observed event outcomes of
// p / (1 - (1-p')^n). Unbiased for the sampled part of the event; biased low
// by any excluded target mass.
EstimateReport pi1_is(const ProbabilitySample& sample, const EventQuery& event);

// Exact Var(pi1_is) when sampling from `sampling`; outcomes the sampling
// distribution cannot produce are skipped.
double v1_is_exact(const DiscreteDistribution& target, const DiscreteDistribution& sampling,
                   const Event& event, std::int64_t n);
double v1_is_exact(const DiscreteDistribution& target, const SamplingDesign& design,
                   const Event& event, std::int64_t n);

// Unbiased estimator of v1_is from one sample (n >= 2 for exactness).
double v1_is_hat(const ProbabilitySample& sample, const EventQuery& event);

// m Z / W with Z = sum of in-event z and W = sum of in-event 1/y.
// Reduces to the harmonic-mean form when y = x.
EstimateReport pi2_is(const ProbabilitySample& sample, const EventQuery& event);

// Leave-one-out jackknife for pi2_is; k >= 2 required.
double v2_is_jackknife(const ProbabilitySample& sample, const EventQuery& event);

// The boundary-ansatz design: sort event outcomes by target probability
// descending, grow the candidate support, keep the largest support for which
// every interior weight is nonnegative. n >= 2 required.
SamplingDesign optimal_design(const DiscreteDistribution& target, const Event& event,
                              std::int64_t n);

// The large-n surrogate objective sum over the event of p^2 (1-p')^n, with
// p' = 0 outside the design support.
double design_objective(const DiscreteDistribution& target, const Event& event,
                        const SamplingDesign& design, std::int64_t n);

}  // namespace probest::importance

#endif
