#ifndef PROBEST_SAMPLE_SPACE_HPP
#define PROBEST_SAMPLE_SPACE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

// Core data model: finite probability spaces, events, and probability-
// annotated samples. All types are immutable after construction and safe to
// share across threads; the operations are pure.

namespace probest {

using OutcomeId = std::uint64_t;

// Thrown when an estimator is evaluated on a sample that carries no
// information about its target (e.g. the harmonic-mean estimator with no
// draw inside the event). Deliberately distinct from precondition errors so
// enumeration engines can condition on definedness.
class NoInformationError : public std::runtime_error {
public:
    explicit NoInformationError(const std::string& what) : std::runtime_error(what) {}
};

// A finite outcome set with probability weights. Weights must be >= 0 and
// sum to 1 within 1e-12; outcome ids must be unique.
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<OutcomeId> outcomes, std::vector<double> weights);

    std::size_t size() const { return outcomes_.size(); }
    OutcomeId outcome(std::size_t i) const { return outcomes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<OutcomeId>& outcomes() const { return outcomes_; }
    const std::vector<double>& weights() const { return weights_; }

    bool contains(OutcomeId id) const { return index_.count(id) != 0; }
    std::size_t index_of(OutcomeId id) const;
    double prob(OutcomeId id) const { return weights_[index_of(id)]; }

    // CSV, one "outcome_id,p" line per outcome.
    static DiscreteDistribution from_csv(std::istream& in);
    static DiscreteDistribution load_csv(const std::string& path);
    void to_csv(std::ostream& out) const;

private:
    std::vector<OutcomeId> outcomes_;
    std::vector<double> weights_;
    std::unordered_map<OutcomeId, std::size_t> index_;
};

// A subset of outcomes with known cardinality m = |A|.
class Event {
public:
    explicit Event(std::vector<OutcomeId> members);

    std::uint64_t cardinality() const { return members_.size(); }
    bool contains(OutcomeId id) const;
    const std::vector<OutcomeId>& members() const { return members_; }

    // every member must be an outcome of `dist`
    void validate_against(const DiscreteDistribution& dist) const;

private:
    std::vector<OutcomeId> members_;  // sorted, unique
};

// Membership view used by the estimators: a contains() oracle plus the known
// cardinality m. Convertible from an explicit Event; simulator-backed events
// (whose members are impractical to materialize) supply a predicate and an
// analytically computed m.
class EventQuery {
public:
    EventQuery(const Event& event);  // implicit by design
    EventQuery(std::uint64_t cardinality, std::function<bool(OutcomeId)> contains);

    bool contains(OutcomeId id) const { return contains_(id); }
    std::uint64_t cardinality() const { return m_; }

private:
    std::uint64_t m_;
    std::function<bool(OutcomeId)> contains_;
};

// One draw: outcome id, its probability x under the target distribution and
// optionally y under the sampling distribution. x = 0 is rejected (a drawn
// outcome has positive probability by definition, and 1/x appears downstream).
struct Draw {
    OutcomeId outcome = 0;
    double x = 0.0;
    std::optional<double> y;
};

// Ordered iid draws with their probability annotations.
class ProbabilitySample {
public:
    explicit ProbabilitySample(std::vector<Draw> draws);

    std::size_t size() const { return draws_.size(); }  // n
    const std::vector<Draw>& draws() const { return draws_; }
    const Draw& draw(std::size_t i) const { return draws_[i]; }
    bool empty() const { return draws_.empty(); }

    // true when every draw carries a sampling probability y
    bool has_importance_weights() const;

    static ProbabilitySample from_csv(std::istream& in);
    static ProbabilitySample load_csv(const std::string& path);
    void to_csv(std::ostream& out) const;

private:
    std::vector<Draw> draws_;
};

// Estimator identities used in reports, CSV output and CLI flags.
enum class EstimatorId {
    pi0,
    pi0_max,
    pi1,
    pi1_dual,
    pi1_combined,
    pi1_cv,
    mu1,
    pi2,
    pi0_is,
    pi1_is,
    pi2_is,
};

const char* to_string(EstimatorId id);
std::optional<EstimatorId> estimator_from_string(const std::string& name);

struct EstimateReport {
    EstimatorId estimator;
    double estimate = 0.0;
    std::optional<double> variance_estimate;  // may be absent; v1_hat may be negative
    std::size_t n = 0;
    std::size_t k = 0;
    std::string notes;
};

// O: each distinct observed outcome exactly once, in first-occurrence order,
// with its annotations.
std::vector<Draw> observed_set(const ProbabilitySample& sample);

// Partition of the draws into (in A, not in A), preserving relative order.
std::pair<ProbabilitySample, ProbabilitySample> event_split(const ProbabilitySample& sample,
                                                            const EventQuery& event);

// Count of draws falling in the event.
std::size_t count_in_event(const ProbabilitySample& sample, const EventQuery& event);

}  // namespace probest

#endif
