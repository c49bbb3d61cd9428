#ifndef PROBEST_HARNESS_HPP
#define PROBEST_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "probest/epidemic.hpp"
#include "probest/oracle.hpp"
#include "probest/sample_space.hpp"

// Experiment runner: variance-comparison sweeps over the chain model, the
// sentinel hypothesis test, and the enumeration verification suite, all with
// deterministic seeding. Identical config + seed gives byte-identical output.

namespace probest::harness {

struct ExperimentConfig {
    epidemic::ChainParams chain;          // model under study
    std::vector<std::int64_t> n_grid;     // sample sizes
    std::int64_t replications = 1000;     // R
    std::uint64_t seed = 1;               // master seed; streams derive from (seed, rep)
    std::vector<EstimatorId> estimators;  // empty = default set
    bool jackknife_exact = true;
    std::string out_path;                 // empty = stdout

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load_json(const std::string& path);
};

// One row of the comparison report (per estimator and sample size).
struct CompareRow {
    EstimatorId estimator;
    std::int64_t n = 0;
    std::int64_t rep_count = 0;  // replications where the estimator was defined
    double pi_true = 0.0;
    double est_mean = 0.0;
    std::optional<double> est_var_empirical;  // absent when rep_count < 2
    std::optional<double> var_exact;          // exact sampling variance, when known
    std::optional<double> var_estimate_mean;  // mean of the per-sample variance estimate
    double est_var_fourth_moment = 0.0;       // empirical 4th central moment (diagnostics)
};

std::vector<CompareRow> compare_rows(const ExperimentConfig& config);

// CSV with header estimator,n,rep_count,pi_true,est_mean,est_var_empirical,
// var_exact,var_estimate_mean. Deterministic formatting (%.17g).
std::string run_compare(const ExperimentConfig& config);

// Per-n chain analytics: pi by both routes, complement, v0 and v1 exact.
std::string run_chain_report(const epidemic::ChainParams& params,
                             const std::vector<std::int64_t>& n_grid);

// The (p1, p2) region sweep behind the toy-example claim: margin of
// v1 < v0 at the given n over a parameter grid. CSV p1,p2,pi,v0,v1,margin.
std::string run_chain_sweep(std::int64_t L, std::int64_t T, std::int64_t n, double step);

struct HypothesisTestResult {
    double pi_hat = 0.0;
    double variance_hat = 0.0;
    double level = 0.0;
    bool reject_point = false;         // pi_hat < level
    bool reject_conservative = false;  // pi_hat + 2 sqrt(var_hat) < level
    double upper_confidence_bound = 0.0;
    std::int64_t n = 0;
    std::int64_t k = 0;  // simulations with all tests negative
    std::string estimator_used;
    std::string notes;
};

// Simulates n outbreaks under the null model, estimates the probability that
// every scheduled test is negative, and applies both decision rules. The
// event cardinality (needed by pi2) must be supplied when the model is not a
// chain; for chains it is computed analytically.
HypothesisTestResult run_hypothesis_test(const epidemic::SIModel& model,
                                         const epidemic::SentinelSchedule& schedule,
                                         double level, std::int64_t n, EstimatorId estimator,
                                         std::uint64_t seed,
                                         std::optional<std::uint64_t> event_cardinality = {});

// Chain convenience wrapper: the all-tests-negative cardinality is exact.
HypothesisTestResult run_hypothesis_test(const epidemic::ChainParams& params,
                                         const epidemic::SentinelSchedule& schedule,
                                         double level, std::int64_t n, EstimatorId estimator,
                                         std::uint64_t seed);

struct OracleSuiteReport {
    std::string json;
    int checks = 0;
    int failures = 0;
};

// The full small-grid verification matrix: catalog distributions with 2-4
// outcomes, every nonempty proper event, n in 1..4, plain and importance
// sampling measures. Asserted claims fail the report; the known finite-k
// bias of pi2 and the n = 1 limitation of the v1 estimator are measured and
// recorded without failing.
OracleSuiteReport run_oracle_suite(const oracle::EnumerationBudget& budget = {});

// Fixed catalog of weight vectors driving the suite (exposed for tests).
std::vector<std::vector<double>> catalog_weight_vectors();

std::string format_g17(double v);

}  // namespace probest::harness

#endif
