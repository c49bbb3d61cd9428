#ifndef PROBEST_EPIDEMIC_HPP
#define PROBEST_EPIDEMIC_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "probest/estimators.hpp"
#include "probest/numeric.hpp"
#include "probest/sample_space.hpp"

// Discrete-time SI epidemic simulator on networks with exact trajectory-
// probability tracking, sentinel tests, and the analytically solvable chain
// model. Updates are synchronous: the state at step t depends only on the
// state at t-1. The chain seeds at t = 0 only; general models may evaluate a
// base infection probability at every step.

namespace probest::epidemic {

struct SentinelTest {
    std::uint32_t node = 0;
    std::int64_t time = 0;
};

// Ordered list of (node, test time) infection checks; times must be <= the
// model horizon when paired with one.
struct SentinelSchedule {
    std::vector<SentinelTest> tests;

    static SentinelSchedule from_csv(std::istream& in);  // "node,time" per line
    static SentinelSchedule load_csv(const std::string& path);
};

// Undirected network SI model. Base infection probabilities p1(v,t) and
// transmission probabilities p2(v->v',t) default to constants with sparse
// per-entry overrides.
class SIModel {
public:
    SIModel(std::size_t node_count, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
            std::int64_t horizon);

    std::size_t node_count() const { return node_count_; }
    std::int64_t horizon() const { return horizon_; }
    const std::vector<std::uint32_t>& neighbors(std::uint32_t v) const { return adjacency_[v]; }

    void set_p1_constant(double p);
    void set_p1(std::uint32_t node, std::int64_t t, double p);
    void set_p2_constant(double p);
    void set_p2(std::uint32_t from, std::uint32_t to, std::int64_t t, double p);

    double p1(std::uint32_t node, std::int64_t t) const;
    double p2(std::uint32_t from, std::uint32_t to, std::int64_t t) const;

    // Edge-list text file, one "u v" pair per line.
    static SIModel load_edge_list(const std::string& path, std::int64_t horizon);

private:
    std::size_t node_count_;
    std::int64_t horizon_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
    double p1_default_ = 0.0;
    double p2_default_ = 0.0;
    std::map<std::pair<std::uint32_t, std::int64_t>, double> p1_overrides_;
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>, double> p2_overrides_;
};

// One realized infection history over times 0..T with the exact accumulated
// log-probability of the realized path. Infection is absorbing (SI).
class Trajectory {
public:
    Trajectory(std::size_t node_count, std::int64_t horizon);

    bool infected(std::uint32_t node, std::int64_t t) const;
    void mark_infected(std::uint32_t node, std::int64_t t);  // from t onward
    std::int64_t first_infection_time(std::uint32_t node) const;  // -1 if never

    double logp() const { return logp_; }
    void add_logp(double delta) { logp_ += delta; }

    std::size_t node_count() const { return node_count_; }
    std::int64_t horizon() const { return horizon_; }

    // Canonical serialization: node-major bit packing of the infection
    // matrix over times 0..T, prefixed by the dimensions.
    std::vector<std::uint8_t> packed() const;
    OutcomeId outcome_id() const;

    void dump(std::ostream& out) const;  // one 0/1 row per time step

private:
    std::size_t node_count_;
    std::int64_t horizon_;
    std::vector<std::int64_t> first_time_;  // -1 = never infected
    double logp_ = 0.0;
};

// Simulate one trajectory, multiplying the probability of each realized
// per-node event (infection hazard or survival) into logp. exp(logp) is the
// exact path probability under the model.
Trajectory simulate(const SIModel& model, num::Rng& rng);

// True iff some scheduled test finds its node infected at its test time.
bool detect(const Trajectory& trajectory, const SentinelSchedule& schedule);

// --- chain toy model ----------------------------------------------------------

// Chain of L+1 nodes 0..L; node 0 is seeded at t=0 with probability p1;
// infection travels along the chain with per-step probability p2.
struct ChainParams {
    std::int64_t L = 1;
    std::int64_t T = 1;
    double p1 = 0.5;
    double p2 = 0.5;
    double q2() const { return 1.0 - p2; }
};

void validate(const ChainParams& params);

// The SIModel realizing ChainParams (seeding only at t = 0).
SIModel chain_model(const ChainParams& params);

// Single sentinel test at (node L, time T): the detection event of the toy.
SentinelSchedule chain_schedule(const ChainParams& params);

// Probability of the full-spread outcome encoded by the first-infection
// times t_1 < ... < t_L: p1 * p2^L * q2^(t_L - L). Evaluated without forming
// (p2/q2)^L so p2 = 1 is exact.
double chain_outcome_prob(const ChainParams& params, const std::vector<std::int64_t>& times);

// P(node L infected by T) as the finite sum
// p1 p2^L sum_{s=L..T} C(s-1, L-1) q2^(s-L); returns 0 for T < L.
double chain_pi_analytic(const ChainParams& params);

// The same probability through the closed hypergeometric form
// p1 (1 - p2^L q2^(T+1-L) C(T, L-1) 2F1(1, T+1; T+2-L; q2)).
double chain_pi_2f1(const ChainParams& params);

// P(not A) = 1 - p1 + p1 p2^L sum_{s > T} C(s-1, L-1) q2^(s-L), the tail
// series truncated when the ratio-bounded remainder drops below 1e-14.
double chain_complement_prob(const ChainParams& params);

enum class ChainOutcomeKind : std::uint8_t {
    full,           // all L nodes infected by the horizon; encoded by times
    partial,        // seeded, spread stalled at j < L infected nodes
    no_seed,        // node 0 never seeded
    residual_lump,  // aggregated "t_L > t_max" class (lumped mode only)
};

struct ChainOutcome {
    ChainOutcomeKind kind = ChainOutcomeKind::full;
    std::vector<std::int64_t> times;  // first-infection times of nodes 1..j
    double prob = 0.0;
    OutcomeId id = 0;  // trajectory hash; 0 for the residual lump
};

enum class ResidualMode : std::uint8_t {
    expanded,  // every truncated trajectory listed individually
    lumped,    // one aggregate class carrying the tail mass
};

// All chain outcomes at horizon t_max: full tuples with t_L <= t_max, the
// no-seed outcome, and the residual mass either expanded into the partial
// trajectories or lumped. Zero-probability outcomes are dropped.
// Probabilities sum to 1 within 1e-12.
std::vector<ChainOutcome> enumerate_chain_outcomes(const ChainParams& params,
                                                   std::int64_t t_max,
                                                   ResidualMode mode = ResidualMode::expanded,
                                                   std::uint64_t budget = 20'000'000);

// Probability groups of the detection event A = {t_L <= T}: one group per
// t_L value, with multiplicity C(t_L - 1, L - 1). Feeds the grouped exact
// variance formulas at scales where member-by-member enumeration is wasteful.
std::vector<estimators::WeightGroup> chain_event_groups(const ChainParams& params);

// Probability groups of the complement of A at horizon T: the no-seed class
// plus, per stalled length j < L, the C(T, j) equally likely partials.
std::vector<estimators::WeightGroup> chain_complement_groups(const ChainParams& params);

// |A| at horizon T (number of full-spread trajectories) and its complement
// count; exact.
std::uint64_t chain_event_cardinality(const ChainParams& params);
std::uint64_t chain_complement_cardinality(const ChainParams& params);

}  // namespace probest::epidemic

#endif
