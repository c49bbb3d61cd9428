#ifndef PROBEST_ORACLE_HPP
#define PROBEST_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "probest/sample_space.hpp"

// Exhaustive-enumeration and brute-force oracles: exact expectations and
// variances of any estimator on small spaces. This is the ground truth the
// closed-form variance and unbiasedness claims are tested against, so it must
// stay independent of the estimator implementations it checks.

namespace probest::oracle {

struct EnumerationBudget {
    std::uint64_t max_tuples = 100'000'000;
};

// Exact event probability: sum of member weights.
double exact_pi(const DiscreteDistribution& dist, const Event& event);

// An estimator as seen by the engine: a pure function of the sample and the
// event, returning nothing when the sample carries no information for it.
using EstimatorFn =
    std::function<std::optional<double>(const ProbabilitySample&, const EventQuery&)>;

struct MomentReport {
    double mean = 0.0;
    double variance = 0.0;
    double bias = 0.0;              // mean - truth (conditional on definedness)
    double defined_fraction = 1.0;  // probability mass where the estimator is defined
    std::uint64_t tuples = 0;
};

// {"estimator": ..., "n": ..., "mean": ..., "variance": ..., "bias": ...,
//  "defined_fraction": ...}
std::string to_json(const MomentReport& report, const std::string& estimator,
                    std::int64_t n);

// Iterates every ordered n-tuple of outcomes, weights it by the product of
// sampling probabilities, runs the estimator on the annotated sample, and
// accumulates exact weighted moments (Kahan-compensated). Tuples where the
// estimator is undefined are excluded; their weight is reported through
// defined_fraction and the moments are conditional on definedness.
// Passing a sampling object distinct from the target puts the engine in
// importance mode: draws then carry y annotations.
MomentReport estimator_moments(const DiscreteDistribution& target,
                               const DiscreteDistribution& sampling, const Event& event,
                               std::int64_t n, const EstimatorFn& estimator, double truth,
                               const EnumerationBudget& budget = {});

// Convenience overload: sampling = target, truth = exact_pi(target, event).
MomentReport estimator_moments(const DiscreteDistribution& target, const Event& event,
                               std::int64_t n, const EstimatorFn& estimator,
                               const EnumerationBudget& budget = {});

// Exact Var(mu1) at a fixed reference point, by enumeration. Used to
// validate (and, if needed, overrule) the closed-form variance and its
// minimizer.
double variance_of_mu1_at_xi(const DiscreteDistribution& dist,
                             const std::unordered_map<OutcomeId, double>& values,
                             std::int64_t n, double xi,
                             const EnumerationBudget& budget = {});

// Golden-section argmin of the enumerated Var(mu1) over [lo, hi].
double minimize_mu1_variance(const DiscreteDistribution& dist,
                             const std::unordered_map<OutcomeId, double>& values,
                             std::int64_t n, double lo, double hi, double tol = 1e-9,
                             const EnumerationBudget& budget = {});

struct GridSearchResult {
    std::vector<double> weights;  // per event member, in Event::members() order
    double objective = 0.0;
    std::uint64_t evaluated = 0;
};

// Exhaustive search of the sampling simplex over the event members on the
// composition grid with the given step (1/step must be integral). Minimizes
// the large-n surrogate objective sum of p^2 (1-p')^n.
GridSearchResult simplex_grid_search(const DiscreteDistribution& dist, const Event& event,
                                     std::int64_t n, double step,
                                     const EnumerationBudget& budget = {});

}  // namespace probest::oracle

#endif
