#include "probest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "probest/estimators.hpp"
#include "probest/importance.hpp"
#include "probest/numeric.hpp"

namespace probest::harness {

namespace est = probest::estimators;
namespace epi = probest::epidemic;
using num::KahanSum;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        if (m.value("type", "chain") != std::string("chain"))
            throw std::invalid_argument("config: only chain models are configurable here");
        cfg.chain.L = m.value("L", cfg.chain.L);
        cfg.chain.T = m.value("T", cfg.chain.T);
        cfg.chain.p1 = m.value("p1", cfg.chain.p1);
        cfg.chain.p2 = m.value("p2", cfg.chain.p2);
    }
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<std::int64_t>>();
    cfg.replications = j.value("replications", cfg.replications);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("estimators")) {
        for (const auto& name : j.at("estimators")) {
            auto id = estimator_from_string(name.get<std::string>());
            if (!id) throw std::invalid_argument("config: unknown estimator " +
                                                 name.get<std::string>());
            cfg.estimators.push_back(*id);
        }
    }
    if (j.contains("jackknife")) cfg.jackknife_exact = j.at("jackknife") == "exact";
    cfg.out_path = j.value("out", cfg.out_path);
    if (cfg.n_grid.empty()) throw std::invalid_argument("config: empty n grid");
    if (cfg.replications < 1) throw std::invalid_argument("config: replications must be >= 1");
    return cfg;
}

ExperimentConfig ExperimentConfig::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

namespace {

std::vector<EstimatorId> default_estimators() {
    return {EstimatorId::pi0,      EstimatorId::pi0_max,  EstimatorId::pi1,
            EstimatorId::pi1_dual, EstimatorId::pi1_cv,   EstimatorId::pi1_combined,
            EstimatorId::pi2};
}

struct RunningMoments {
    KahanSum sum, sum2;
    std::int64_t count = 0;
    std::vector<double> values;  // kept for the central-moment diagnostics
    void add(double v) {
        sum.add(v);
        sum2.add(v * v);
        ++count;
        values.push_back(v);
    }
};

}  // namespace

std::vector<CompareRow> compare_rows(const ExperimentConfig& config) {
    epi::validate(config.chain);
    const std::vector<EstimatorId> chosen =
        config.estimators.empty() ? default_estimators() : config.estimators;

    const epi::SIModel model = epi::chain_model(config.chain);
    const epi::SentinelSchedule schedule = epi::chain_schedule(config.chain);
    const double pi_true = epi::chain_pi_analytic(config.chain);
    const auto groups = epi::chain_event_groups(config.chain);
    const std::uint64_t m_event = epi::chain_event_cardinality(config.chain);

    std::vector<CompareRow> rows;
    for (const std::int64_t n : config.n_grid) {
        if (n < 1) throw std::invalid_argument("compare: n must be >= 1");
        const double v1 = est::v1_exact_grouped(groups, n);
        const double v0 = est::v0_exact(pi_true, n);

        std::vector<RunningMoments> acc(chosen.size());
        std::vector<RunningMoments> var_acc(chosen.size());

        for (std::int64_t rep = 0; rep < config.replications; ++rep) {
            num::Rng rng(num::derive_stream_seed(config.seed,
                                                 static_cast<std::uint64_t>(rep)));
            std::vector<Draw> draws;
            std::vector<bool> in_event;
            draws.reserve(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) {
                const epi::Trajectory traj = epi::simulate(model, rng);
                draws.push_back({traj.outcome_id(), std::exp(traj.logp()), std::nullopt});
                in_event.push_back(epi::detect(traj, schedule));
            }
            // membership of any outcome id seen in this replication
            std::unordered_map<OutcomeId, bool> membership;
            for (std::size_t i = 0; i < draws.size(); ++i)
                membership.emplace(draws[i].outcome, in_event[i]);
            const ProbabilitySample sample{std::move(draws)};
            const EventQuery event(m_event, [&membership](OutcomeId id) {
                auto it = membership.find(id);
                return it != membership.end() && it->second;
            });

            for (std::size_t e = 0; e < chosen.size(); ++e) {
                try {
                    EstimateReport r;
                    switch (chosen[e]) {
                        case EstimatorId::pi0: r = est::pi0(sample, event); break;
                        case EstimatorId::pi0_max: r = est::pi0_max(sample, event); break;
                        case EstimatorId::pi1: r = est::pi1(sample, event); break;
                        case EstimatorId::pi1_dual: r = est::pi1_dual(sample, event); break;
                        case EstimatorId::pi1_cv: r = est::pi1_cv(sample, event); break;
                        case EstimatorId::pi1_combined:
                            r = est::pi1_combined(sample, event);
                            break;
                        case EstimatorId::pi2:
                            r = est::pi2(sample, event);
                            if (!config.jackknife_exact && r.k >= 2)
                                r.variance_estimate = est::v2_jackknife(
                                    sample, event, est::JackknifeForm::large_k);
                            break;
                        default:
                            throw std::invalid_argument(
                                "compare: estimator not applicable to plain sampling");
                    }
                    acc[e].add(r.estimate);
                    if (r.variance_estimate) var_acc[e].add(*r.variance_estimate);
                } catch (const NoInformationError&) {
                    // replication carries no information for this estimator; skip
                }
            }
        }

        for (std::size_t e = 0; e < chosen.size(); ++e) {
            CompareRow row;
            row.estimator = chosen[e];
            row.n = n;
            row.rep_count = acc[e].count;
            row.pi_true = pi_true;
            if (acc[e].count > 0) {
                const double mean = acc[e].sum.value() / static_cast<double>(acc[e].count);
                row.est_mean = mean;
                if (acc[e].count > 1) {
                    KahanSum c2, c4;
                    for (double v : acc[e].values) {
                        const double d = v - mean;
                        c2.add(d * d);
                        c4.add(d * d * d * d);
                    }
                    row.est_var_empirical =
                        c2.value() / static_cast<double>(acc[e].count - 1);
                    row.est_var_fourth_moment =
                        c4.value() / static_cast<double>(acc[e].count);
                }
            }
            if (var_acc[e].count > 0)
                row.var_estimate_mean =
                    var_acc[e].sum.value() / static_cast<double>(var_acc[e].count);
            if (chosen[e] == EstimatorId::pi0) row.var_exact = v0;
            if (chosen[e] == EstimatorId::pi1) row.var_exact = v1;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string run_compare(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "estimator,n,rep_count,pi_true,est_mean,est_var_empirical,var_exact,"
           "var_estimate_mean\n";
    for (const CompareRow& row : compare_rows(config)) {
        out << to_string(row.estimator) << ',' << row.n << ',' << row.rep_count << ','
            << format_g17(row.pi_true) << ',' << format_g17(row.est_mean) << ',';
        if (row.est_var_empirical) out << format_g17(*row.est_var_empirical);
        out << ',';
        if (row.var_exact) out << format_g17(*row.var_exact);
        out << ',';
        if (row.var_estimate_mean) out << format_g17(*row.var_estimate_mean);
        out << '\n';
    }
    return out.str();
}

std::string run_chain_report(const epi::ChainParams& params,
                             const std::vector<std::int64_t>& n_grid) {
    epi::validate(params);
    const double pi_sum = epi::chain_pi_analytic(params);
    const double pi_2f1 = epi::chain_pi_2f1(params);
    const double complement = epi::chain_complement_prob(params);
    const auto groups = epi::chain_event_groups(params);
    std::ostringstream out;
    out << "quantity,value\n";
    out << "pi_analytic," << format_g17(pi_sum) << '\n';
    out << "pi_2f1," << format_g17(pi_2f1) << '\n';
    out << "complement," << format_g17(complement) << '\n';
    out << "event_cardinality," << epi::chain_event_cardinality(params) << '\n';
    out << "n,v0,v1\n";
    for (std::int64_t n : n_grid) {
        out << n << ',' << format_g17(est::v0_exact(pi_sum, n)) << ','
            << format_g17(est::v1_exact_grouped(groups, n)) << '\n';
    }
    return out.str();
}

std::string run_chain_sweep(std::int64_t L, std::int64_t T, std::int64_t n, double step) {
    std::ostringstream out;
    out << "p1,p2,pi,v0,v1,margin\n";
    const auto cells = static_cast<std::int64_t>(std::llround(1.0 / step));
    for (std::int64_t i = 1; i <= cells; ++i) {
        for (std::int64_t j = 1; j <= cells; ++j) {
            epi::ChainParams params{L, T, static_cast<double>(i) * step,
                                    static_cast<double>(j) * step};
            const double pi = epi::chain_pi_analytic(params);
            if (pi <= 0.0 || pi >= 1.0) continue;
            const double v0 = est::v0_exact(pi, n);
            const double v1 = est::v1_exact_grouped(epi::chain_event_groups(params), n);
            out << format_g17(params.p1) << ',' << format_g17(params.p2) << ','
                << format_g17(pi) << ',' << format_g17(v0) << ',' << format_g17(v1) << ','
                << format_g17((v0 - v1) / v0) << '\n';
        }
    }
    return out.str();
}

HypothesisTestResult run_hypothesis_test(const epi::SIModel& model,
                                         const epi::SentinelSchedule& schedule, double level,
                                         std::int64_t n, EstimatorId estimator,
                                         std::uint64_t seed,
                                         std::optional<std::uint64_t> event_cardinality) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("hypothesis test: level must lie in (0,1)");
    if (n < 1) throw std::invalid_argument("hypothesis test: n must be >= 1");

    HypothesisTestResult result;
    result.level = level;
    result.n = n;

    // A = all scheduled tests negative
    std::vector<Draw> draws;
    std::unordered_map<OutcomeId, bool> membership;
    std::int64_t k = 0;
    num::Rng rng(num::derive_stream_seed(seed, 0));
    for (std::int64_t i = 0; i < n; ++i) {
        const epi::Trajectory traj = epi::simulate(model, rng);
        const bool all_negative = !epi::detect(traj, schedule);
        k += all_negative ? 1 : 0;
        draws.push_back({traj.outcome_id(), std::exp(traj.logp()), std::nullopt});
        membership.emplace(draws.back().outcome, all_negative);
    }
    result.k = k;
    const ProbabilitySample sample{std::move(draws)};
    const EventQuery event(event_cardinality.value_or(0), [membership](OutcomeId id) {
        auto it = membership.find(id);
        return it != membership.end() && it->second;
    });

    EstimateReport report;
    switch (estimator) {
        case EstimatorId::pi0: report = est::pi0(sample, event); break;
        case EstimatorId::pi1: report = est::pi1(sample, event); break;
        case EstimatorId::pi2:
            if (!event_cardinality)
                throw std::invalid_argument("hypothesis test: pi2 needs the event cardinality");
            try {
                report = est::pi2(sample, event);
            } catch (const NoInformationError&) {
                report = est::pi1(sample, event);
                result.notes = "pi2 undefined (no all-negative simulation); fell back to pi1";
            }
            break;
        default:
            throw std::invalid_argument("hypothesis test: unsupported estimator choice");
    }
    result.estimator_used = to_string(report.estimator);
    result.pi_hat = report.estimate;
    result.variance_hat = report.variance_estimate.value_or(0.0);
    const double spread = result.variance_hat > 0.0 ? 2.0 * std::sqrt(result.variance_hat) : 0.0;
    result.upper_confidence_bound = result.pi_hat + spread;
    result.reject_point = result.pi_hat < level;
    result.reject_conservative = result.upper_confidence_bound < level;
    return result;
}

HypothesisTestResult run_hypothesis_test(const epi::ChainParams& params,
                                         const epi::SentinelSchedule& schedule, double level,
                                         std::int64_t n, EstimatorId estimator,
                                         std::uint64_t seed) {
    // for the canonical single-sentinel schedule the all-negative cardinality
    // is known exactly
    const epi::SentinelSchedule canonical = epi::chain_schedule(params);
    std::optional<std::uint64_t> m;
    if (schedule.tests.size() == 1 && schedule.tests[0].node == canonical.tests[0].node &&
        schedule.tests[0].time == canonical.tests[0].time)
        m = epi::chain_complement_cardinality(params);
    return run_hypothesis_test(epi::chain_model(params), schedule, level, n, estimator, seed,
                               m);
}

// ---- oracle suite -------------------------------------------------------------

std::vector<std::vector<double>> catalog_weight_vectors() {
    return {
        {0.5, 0.5},
        {0.7, 0.3},
        {0.5, 0.3, 0.2},
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
        {0.4, 0.3, 0.2, 0.1},
        {0.25, 0.25, 0.25, 0.25},
    };
}

namespace {

// importance-sampling measures paired with each catalog size
std::vector<double> tilted_weights(std::size_t size) {
    switch (size) {
        case 2: return {0.2, 0.8};
        case 3: return {0.2, 0.3, 0.5};
        default: return {0.1, 0.2, 0.3, 0.4};
    }
}

struct Check {
    std::string name;
    double discrepancy = 0.0;
    double tolerance = 0.0;
    bool asserted = true;  // informational entries never fail the suite
    bool pass = true;
    std::string moments_json;  // oracle moment payload, when the check has one
};

}  // namespace

OracleSuiteReport run_oracle_suite(const oracle::EnumerationBudget& budget) {
    std::vector<Check> checks;
    auto record = [&](std::string name, double discrepancy, double tol, bool asserted = true,
                      std::string moments_json = {}) {
        Check c;
        c.name = std::move(name);
        c.discrepancy = discrepancy;
        c.tolerance = tol;
        c.asserted = asserted;
        c.pass = !asserted || std::abs(discrepancy) < tol;
        c.moments_json = std::move(moments_json);
        checks.push_back(std::move(c));
    };

    int dist_index = 0;
    for (const auto& weights : catalog_weight_vectors()) {
        ++dist_index;
        std::vector<OutcomeId> ids(weights.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i + 1;
        const DiscreteDistribution dist(ids, weights);
        const DiscreteDistribution sampling(ids, tilted_weights(weights.size()));

        // every nonempty proper event
        for (std::uint64_t mask = 1; mask + 1 < (1ULL << ids.size()); ++mask) {
            std::vector<OutcomeId> members;
            for (std::size_t i = 0; i < ids.size(); ++i)
                if (mask & (1ULL << i)) members.push_back(ids[i]);
            const Event event{members};
            const double pi = oracle::exact_pi(dist, event);
            const std::string cell = "d" + std::to_string(dist_index) + "/A" +
                                     std::to_string(mask) + "/n";

            for (std::int64_t n = 1; n <= 4; ++n) {
                const std::string tag = cell + std::to_string(n);

                const auto pi0_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi0(s, ev).estimate);
                };
                const auto pi1_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi1(s, ev).estimate);
                };
                const auto dual_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi1_dual(s, ev).estimate);
                };
                const auto v1hat_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::v1_hat(s, ev));
                };
                const auto sum_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::est_sum_p2qn(s, ev));
                };
                const auto pi2_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    std::size_t k = count_in_event(s, ev);
                    if (k == 0) return std::optional<double>();
                    return std::optional<double>(est::pi2(s, ev).estimate);
                };

                const auto m_pi0 = oracle::estimator_moments(dist, event, n, pi0_fn, budget);
                record(tag + "/E[pi0]", m_pi0.bias, 1e-12, true,
                       oracle::to_json(m_pi0, "pi0", n));
                record(tag + "/Var[pi0]", m_pi0.variance - est::v0_exact(pi, n), 1e-12);

                const auto m_pi1 = oracle::estimator_moments(dist, event, n, pi1_fn, budget);
                record(tag + "/E[pi1]", m_pi1.bias, 1e-12, true,
                       oracle::to_json(m_pi1, "pi1", n));
                const double v1 = est::v1_exact(dist, event, n);
                record(tag + "/Var[pi1]", m_pi1.variance - v1, 1e-12);

                const auto m_dual = oracle::estimator_moments(dist, event, n, dual_fn, budget);
                record(tag + "/E[pi1_dual]", m_dual.bias, 1e-12, true,
                       oracle::to_json(m_dual, "pi1_dual", n));

                // mu1 with the indicator observable at xi in {0,1}
                for (const double xi : {0.0, 1.0}) {
                    est::MeanProblem problem;
                    problem.xi = xi;
                    for (std::size_t i = 0; i < ids.size(); ++i)
                        problem.values[ids[i]] = event.contains(ids[i]) ? 1.0 : 0.0;
                    const auto mu_fn = [&problem](const ProbabilitySample& s,
                                                  const EventQuery&) {
                        return std::optional<double>(est::mu1(s, problem).estimate);
                    };
                    const auto m_mu = oracle::estimator_moments(dist, dist, event, n, mu_fn,
                                                                pi, budget);
                    record(tag + "/E[mu1 xi=" + format_g17(xi) + "]", m_mu.bias, 1e-12);
                }

                // E[v1_hat] = v1 requires n >= 2: a single draw cannot reach
                // the pair terms of the variance, so the n = 1 cell is
                // recorded without being asserted.
                const auto m_v1hat =
                    oracle::estimator_moments(dist, dist, event, n, v1hat_fn, v1, budget);
                record(tag + "/E[v1_hat]", m_v1hat.bias, 1e-12, n >= 2,
                       oracle::to_json(m_v1hat, "v1_hat", n));

                double sum_p2qn = 0.0;
                for (OutcomeId id : event.members())
                    sum_p2qn += dist.prob(id) * dist.prob(id) *
                                num::survival_pow(dist.prob(id), n);
                const auto m_sum =
                    oracle::estimator_moments(dist, dist, event, n, sum_fn, sum_p2qn, budget);
                record(tag + "/E[est_sum_p2qn]", m_sum.bias, 1e-12);

                // pi2 finite-k bias: measured, never asserted
                const auto m_pi2 = oracle::estimator_moments(dist, event, n, pi2_fn, budget);
                record(tag + "/E[pi2|defined]", m_pi2.bias, 0.0, false,
                       oracle::to_json(m_pi2, "pi2", n));

                // equal-mass closed form on uniform events
                bool uniform = true;
                for (OutcomeId id : event.members())
                    uniform = uniform && dist.prob(id) == dist.prob(event.members()[0]);
                if (uniform) {
                    const double closed = est::v1_equal_mass(
                        {pi, event.cardinality(), n});
                    record(tag + "/v1_equal_mass", closed - v1, 1e-12);
                }

                // importance sampling: unbiasedness and exact variance under
                // a tilted sampling measure
                const auto pi1_is_fn = [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(importance::pi1_is(s, ev).estimate);
                };
                const auto v1_is_hat_fn = [](const ProbabilitySample& s,
                                             const EventQuery& ev) {
                    return std::optional<double>(importance::v1_is_hat(s, ev));
                };
                const auto m_is =
                    oracle::estimator_moments(dist, sampling, event, n, pi1_is_fn, pi, budget);
                record(tag + "/E[pi1_is]", m_is.bias, 1e-12, true,
                       oracle::to_json(m_is, "pi1_is", n));
                const double v1_is = importance::v1_is_exact(dist, sampling, event, n);
                record(tag + "/Var[pi1_is]", m_is.variance - v1_is, 1e-12);
                const auto m_is_hat = oracle::estimator_moments(dist, sampling, event, n,
                                                                v1_is_hat_fn, v1_is, budget);
                record(tag + "/E[v1_is_hat]", m_is_hat.bias, 1e-12, n >= 2);
            }
        }
    }

    OracleSuiteReport report;
    nlohmann::json out = nlohmann::json::array();
    for (const Check& c : checks) {
        report.checks += 1;
        if (c.asserted && !c.pass) report.failures += 1;
        nlohmann::json entry = {{"check", c.name},
                                {"discrepancy", c.discrepancy},
                                {"tolerance", c.tolerance},
                                {"asserted", c.asserted},
                                {"pass", c.pass}};
        if (!c.moments_json.empty()) entry["moments"] = nlohmann::json::parse(c.moments_json);
        out.push_back(std::move(entry));
    }
    nlohmann::json top;
    top["checks"] = report.checks;
    top["failures"] = report.failures;
    top["results"] = out;
    report.json = top.dump(2);
    return report;
}

}  // namespace probest::harness
