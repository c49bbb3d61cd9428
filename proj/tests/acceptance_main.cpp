// Acceptance suite: runs every stated criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Returns nonzero if any asserted
// criterion fails. Pass the CLI binary path as --cli <path> to include the
// end-to-end byte-identity check in criterion 10 (the ctest registration
// does); without it criterion 10 covers the library-level writers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "probest/epidemic.hpp"
#include "probest/estimators.hpp"
#include "probest/harness.hpp"
#include "probest/importance.hpp"
#include "probest/numeric.hpp"
#include "probest/oracle.hpp"

using namespace probest;
namespace est = probest::estimators;
namespace imp = probest::importance;
namespace epi = probest::epidemic;
namespace hrn = probest::harness;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s  criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass) ++g_failures;
}

struct Cell {
    DiscreteDistribution dist;
    DiscreteDistribution sampling;
    Event event;
    double pi;
};

std::vector<Cell> small_grid() {
    std::vector<Cell> cells;
    const auto catalog = hrn::catalog_weight_vectors();
    const std::vector<std::vector<double>> tilts = {
        {0.2, 0.8},  {0.2, 0.8},  {0.2, 0.3, 0.5},
        {0.2, 0.3, 0.5}, {0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4}};
    for (std::size_t c = 0; c < catalog.size(); ++c) {
        const auto& weights = catalog[c];
        std::vector<OutcomeId> ids(weights.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i + 1;
        DiscreteDistribution dist(ids, weights);
        DiscreteDistribution sampling(ids, tilts[c]);
        for (std::uint64_t mask = 1; mask + 1 < (1ULL << ids.size()); ++mask) {
            std::vector<OutcomeId> members;
            for (std::size_t i = 0; i < ids.size(); ++i)
                if (mask & (1ULL << i)) members.push_back(ids[i]);
            Event event{members};
            const double pi = oracle::exact_pi(dist, event);
            cells.push_back({dist, sampling, std::move(event), pi});
        }
    }
    return cells;
}

oracle::EstimatorFn wrap(double (*fn)(const ProbabilitySample&, const EventQuery&)) {
    return [fn](const ProbabilitySample& s, const EventQuery& ev) {
        return std::optional<double>(fn(s, ev));
    };
}

// ---- criterion 1: exact unbiasedness ------------------------------------------

void criterion_1(const std::vector<Cell>& cells) {
    double worst = 0.0;
    double worst_v1hat_n1 = 0.0;
    std::string worst_name = "-";
    auto track = [&](const std::string& name, double discrepancy) {
        if (std::abs(discrepancy) > std::abs(worst)) {
            worst = discrepancy;
            worst_name = name;
        }
    };

    for (const Cell& cell : cells) {
        for (std::int64_t n = 1; n <= 4; ++n) {
            const auto m_pi1 = oracle::estimator_moments(
                cell.dist, cell.event, n,
                [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi1(s, ev).estimate);
                });
            track("E[pi1]", m_pi1.bias);

            const auto m_dual = oracle::estimator_moments(
                cell.dist, cell.event, n,
                [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi1_dual(s, ev).estimate);
                });
            track("E[pi1_dual]", m_dual.bias);

            for (const double xi : {0.0, 1.0}) {
                est::MeanProblem problem;
                problem.xi = xi;
                for (std::size_t i = 0; i < cell.dist.size(); ++i) {
                    const OutcomeId id = cell.dist.outcome(i);
                    problem.values[id] = cell.event.contains(id) ? 1.0 : 0.0;
                }
                const auto m_mu = oracle::estimator_moments(
                    cell.dist, cell.dist, cell.event, n,
                    [&problem](const ProbabilitySample& s, const EventQuery&) {
                        return std::optional<double>(est::mu1(s, problem).estimate);
                    },
                    cell.pi);
                track("E[mu1]", m_mu.bias);
            }

            const double v1 = est::v1_exact(cell.dist, cell.event, n);
            const auto m_v1hat = oracle::estimator_moments(
                cell.dist, cell.dist, cell.event, n, wrap(&est::v1_hat), v1);
            if (n >= 2)
                track("E[v1_hat]", m_v1hat.bias);
            else
                worst_v1hat_n1 = std::max(worst_v1hat_n1, std::abs(m_v1hat.bias));

            double sum_truth = 0.0;
            for (OutcomeId id : cell.event.members())
                sum_truth += cell.dist.prob(id) * cell.dist.prob(id) *
                             num::survival_pow(cell.dist.prob(id), n);
            const auto m_sum = oracle::estimator_moments(
                cell.dist, cell.dist, cell.event, n, wrap(&est::est_sum_p2qn), sum_truth);
            track("E[est_sum_p2qn]", m_sum.bias);
        }
    }
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "exact unbiasedness on the small grid: max |bias| = %.3e (%s) < 1e-12; "
                  "E[v1_hat] asserted for n>=2 (n=1 unattainable for any estimator, max "
                  "measured gap %.3e; see README notes)",
                  std::abs(worst), worst_name.c_str(), worst_v1hat_n1);
    report(1, std::abs(worst) < 1e-12, buf);
}

// ---- criterion 2: variance-formula equivalence --------------------------------

void criterion_2(const std::vector<Cell>& cells) {
    double worst = 0.0;
    std::string worst_name = "-";
    auto track = [&](const std::string& name, double discrepancy) {
        if (std::abs(discrepancy) > std::abs(worst)) {
            worst = discrepancy;
            worst_name = name;
        }
    };

    for (const Cell& cell : cells) {
        for (std::int64_t n = 1; n <= 4; ++n) {
            const auto m_pi1 = oracle::estimator_moments(
                cell.dist, cell.event, n,
                [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi1(s, ev).estimate);
                });
            const double v1 = est::v1_exact(cell.dist, cell.event, n);
            track("v1_exact", m_pi1.variance - v1);

            bool uniform = true;
            for (OutcomeId id : cell.event.members())
                uniform = uniform &&
                          cell.dist.prob(id) == cell.dist.prob(cell.event.members()[0]);
            if (uniform)
                track("v1_equal_mass",
                      est::v1_equal_mass({cell.pi, cell.event.cardinality(), n}) - v1);

            const auto m_is = oracle::estimator_moments(
                cell.dist, cell.sampling, cell.event, n,
                [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(imp::pi1_is(s, ev).estimate);
                },
                cell.pi);
            track("v1_is_exact",
                  m_is.variance - imp::v1_is_exact(cell.dist, cell.sampling, cell.event, n));
        }
    }
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "v1_exact, v1_equal_mass and v1_is_exact match enumerated variances: "
                  "max discrepancy = %.3e (%s) < 1e-12",
                  std::abs(worst), worst_name.c_str());
    report(2, std::abs(worst) < 1e-12, buf);
}

// ---- criterion 3: engine self-test ---------------------------------------------

void criterion_3(const std::vector<Cell>& cells) {
    double worst = 0.0;
    for (const Cell& cell : cells) {
        for (std::int64_t n = 1; n <= 4; ++n) {
            const auto m = oracle::estimator_moments(
                cell.dist, cell.event, n,
                [](const ProbabilitySample& s, const EventQuery& ev) {
                    return std::optional<double>(est::pi0(s, ev).estimate);
                });
            worst = std::max(worst, std::abs(m.variance - est::v0_exact(cell.pi, n)));
            worst = std::max(worst, std::abs(m.bias));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "enumerated Var(pi0) = pi(1-pi)/n everywhere: max discrepancy = %.3e < 1e-12",
                  worst);
    report(3, worst < 1e-12, buf);
}

// ---- criterion 4: exponential decay --------------------------------------------

void criterion_4() {
    const DiscreteDistribution dist({1, 2, 3}, {0.5, 0.3, 0.2});
    const Event a({1, 2});
    const double pi = 0.8;
    const std::int64_t n_max = 201;
    std::vector<double> v1(n_max + 1, 0.0);
    for (std::int64_t n = 1; n <= n_max; ++n) v1[n] = est::v1_exact(dist, a, n);

    // smallest n0 with v1 < v0 from n0 on
    std::int64_t n0 = -1;
    for (std::int64_t n = n_max; n >= 1; --n) {
        if (v1[n] < est::v0_exact(pi, n))
            n0 = n;
        else
            break;
    }
    bool decreasing = true;
    for (std::int64_t n = std::max<std::int64_t>(n0, 2); n < n_max; ++n)
        decreasing = decreasing && v1[n + 1] < v1[n];
    const double ratio = v1[201] / v1[200];
    const double target = 0.7;  // 1 - pmin over the event
    const bool ratio_ok = std::abs(ratio / target - 1.0) <= 0.02;

    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "v1 < v0 for all n >= n0 = %lld (through n=201), log v1 decreasing, "
                  "ratio at n=200 = %.6f vs 1-pmin = %.1f (within 2%%)",
                  static_cast<long long>(n0), ratio, target);
    report(4, n0 > 0 && decreasing && ratio_ok, buf);
}

// ---- criterion 5: toy-example reproduction -------------------------------------

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    const epi::ChainParams params{10, 20, 0.3, 0.6};  // shipped defaults
    const auto groups = epi::chain_event_groups(params);
    const double pi = epi::chain_pi_analytic(params);
    const double v0 = est::v0_exact(pi, 10);
    const double v1 = est::v1_exact_grouped(groups, 10);

    const std::string sweep = hrn::run_chain_sweep(10, 20, 10, 0.05);
    std::ofstream("chain_sweep_n10.csv") << sweep;
    std::size_t holds = 0, total = 0;
    std::istringstream lines(sweep);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++total;
        const auto last_comma = line.find_last_of(',');
        if (std::stod(line.substr(last_comma + 1)) > 0.0) ++holds;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "chain L=10 T=20, defaults p1=0.3 p2=0.6: v1 = %.6e < v0 = %.6e at n=10 "
                  "(pi = %.4f); sweep: claim holds in %zu/%zu grid cells "
                  "(chain_sweep_n10.csv); %.1fs < 5min",
                  v1, v0, pi, holds, total, secs);
    report(5, v1 < v0 && secs < 300.0, buf);
}

// ---- criterion 6: closed-form cross-validation ----------------------------------

void criterion_6() {
    double worst_pair = 0.0, worst_complement = 0.0;
    int points = 0;
    for (int i = 0; i < 100; ++i) {
        const std::int64_t L = 1 + (i % 12);
        const std::int64_t T = L + ((i * 7) % (31 - L));
        const double p2 = 0.05 + 0.90 * (static_cast<double>(i) / 99.0);
        const double p1 = 0.10 + 0.80 * (static_cast<double>((i * 13) % 100) / 99.0);
        const epi::ChainParams params{L, std::min<std::int64_t>(T, 30), p1, p2};
        const double a = epi::chain_pi_analytic(params);
        const double b = epi::chain_pi_2f1(params);
        const double c = epi::chain_complement_prob(params);
        worst_pair = std::max(worst_pair, std::abs(a - b));
        worst_complement = std::max(worst_complement, std::abs(a + c - 1.0));
        ++points;
    }
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "%d-point (L<=12, T<=30, p2 in [0.05,0.95]) grid: "
                  "max |pi_2f1 - pi_analytic| = %.3e <= 1e-10, "
                  "max |pi + complement - 1| = %.3e <= 1e-12",
                  points, worst_pair, worst_complement);
    report(6, worst_pair <= 1e-10 && worst_complement <= 1e-12, buf);
}

// ---- criterion 7: simulator fidelity --------------------------------------------

void criterion_7() {
    const epi::ChainParams params{2, 3, 0.3, 0.4};
    const auto model = epi::chain_model(params);
    const auto outcomes = epi::enumerate_chain_outcomes(params, 3);
    std::map<OutcomeId, double> analytic;
    for (const auto& oc : outcomes) analytic[oc.id] = oc.prob;

    const std::int64_t runs = 1'000'000;
    std::map<OutcomeId, std::int64_t> counts;
    double worst_logp = 0.0;
    num::Rng rng(num::derive_stream_seed(20240501, 0));
    for (std::int64_t i = 0; i < runs; ++i) {
        const auto traj = epi::simulate(model, rng);
        const auto it = analytic.find(traj.outcome_id());
        if (it == analytic.end()) {
            report(7, false, "simulated trajectory missing from the enumerated outcome space");
            return;
        }
        worst_logp = std::max(worst_logp, std::abs(std::exp(traj.logp()) - it->second));
        counts[traj.outcome_id()]++;
    }
    bool freq_ok = true;
    double worst_se = 0.0;
    for (const auto& oc : outcomes) {
        const double freq = static_cast<double>(counts[oc.id]) / static_cast<double>(runs);
        const double se = std::sqrt(oc.prob * (1 - oc.prob) / static_cast<double>(runs));
        const double devs = std::abs(freq - oc.prob) / se;
        worst_se = std::max(worst_se, devs);
        freq_ok = freq_ok && devs <= 4.0;
    }
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "chain L=2 T=3 p1=0.3 p2=0.4, 1e6 runs: all %zu outcome frequencies within "
                  "4 SE (worst %.2f); max |exp(logp) - analytic| = %.2e <= 1e-12",
                  outcomes.size(), worst_se, worst_logp);
    report(7, freq_ok && worst_logp <= 1e-12, buf);
}

// ---- criterion 8: harmonic-mean estimator ---------------------------------------

void criterion_8() {
    // jackknife exactly zero on an equal-probability event
    const Event eq_event({1, 2});
    std::vector<Draw> eq_draws;
    for (int i = 0; i < 6; ++i)
        eq_draws.push_back({static_cast<OutcomeId>(1 + i % 2), 0.25, std::nullopt});
    const double jk_equal = est::v2_jackknife(ProbabilitySample(eq_draws), eq_event);

    // Monte Carlo variance of pi2 at k = 1e5 vs the delta-method v2, sampling
    // from the conditional distribution on the event
    const DiscreteDistribution dist({1, 2, 3}, {0.5, 0.3, 0.2});
    const Event a({1, 2});
    const std::int64_t k = 100'000;
    const double v2 = est::v2_exact(dist, a, k);
    const std::int64_t reps = 300;
    std::vector<double> estimates;
    num::Rng rng(num::derive_stream_seed(777, 3));
    for (std::int64_t r = 0; r < reps; ++r) {
        // conditional probabilities 0.625 / 0.375 for x = 0.5 / 0.3
        num::KahanSum inv;
        for (std::int64_t i = 0; i < k; ++i)
            inv.add(rng.u01() < 0.625 ? 2.0 : 1.0 / 0.3);
        estimates.push_back(2.0 * static_cast<double>(k) / inv.value());
    }
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(reps);
    double var = 0.0, m4 = 0.0;
    for (double e : estimates) {
        const double d = e - mean;
        var += d * d;
        m4 += d * d * d * d;
    }
    var /= static_cast<double>(reps - 1);
    m4 /= static_cast<double>(reps);
    const double r = static_cast<double>(reps);
    const double se_var = std::sqrt(std::max(0.0, m4 - var * var * (r - 3) / (r - 1)) / r);
    const bool mc_ok = std::abs(var - v2) <= 3.0 * se_var;

    // finite-k bias, measured by enumeration and reported
    std::ostringstream biases;
    for (std::int64_t n = 1; n <= 4; ++n) {
        const auto m = oracle::estimator_moments(
            dist, a, n, [](const ProbabilitySample& s, const EventQuery& ev) {
                if (count_in_event(s, ev) == 0) return std::optional<double>();
                return std::optional<double>(est::pi2(s, ev).estimate);
            });
        biases << (n > 1 ? " " : "") << "n" << n << ":" << std::scientific << m.bias;
    }

    char buf[400];
    std::snprintf(buf, sizeof(buf),
                  "v2_jackknife on equal probabilities = %.1e (exact); MC Var(pi2) at k=1e5 "
                  "= %.4e vs v2 = %.4e (within 3 SE = %.1e); finite-k conditional bias "
                  "(reported, not asserted): %s",
                  jk_equal, var, v2, 3.0 * se_var, biases.str().c_str());
    report(8, jk_equal <= 1e-26 && mc_ok, buf);
}

// ---- criterion 9: importance-sampling reduction and design ----------------------

void criterion_9() {
    // reduction p' = p on shared draws
    num::Rng rng(num::derive_stream_seed(31337, 0));
    const std::vector<double> p = {0.5, 0.3, 0.2};
    const Event a({1, 2});
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Draw> plain_draws, is_draws;
        const std::size_t n = 2 + rng.raw() % 6;
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<OutcomeId>(1 + rng.raw() % 3);
            plain_draws.push_back({id, p[id - 1], std::nullopt});
            is_draws.push_back({id, p[id - 1], p[id - 1]});
        }
        const ProbabilitySample plain(plain_draws), is_sample(is_draws);
        worst = std::max(worst, std::abs(imp::pi0_is(is_sample, a).estimate -
                                         est::pi0(plain, a).estimate));
        worst = std::max(worst, std::abs(imp::pi1_is(is_sample, a).estimate -
                                         est::pi1(plain, a).estimate));
        worst = std::max(worst,
                         std::abs(imp::v1_is_hat(is_sample, a) - est::v1_hat(plain, a)));
        if (count_in_event(plain, a) >= 2) {
            worst = std::max(worst, std::abs(imp::pi2_is(is_sample, a).estimate -
                                             est::pi2(plain, a).estimate));
            worst = std::max(worst, std::abs(imp::v2_is_jackknife(is_sample, a) -
                                             est::v2_jackknife(plain, a)));
        }
    }

    // design vs exhaustive simplex grid, |A| = 4, n = 10
    const std::vector<double> pa = {0.001, 0.0046415888336127775, 0.021544346900318832, 0.1};
    const double rest = 1.0 - (pa[0] + pa[1] + pa[2] + pa[3]);
    const DiscreteDistribution dist({1, 2, 3, 4, 5}, {pa[0], pa[1], pa[2], pa[3], rest});
    const Event ev({1, 2, 3, 4});
    const auto design = imp::optimal_design(dist, ev, 10);
    const auto grid = oracle::simplex_grid_search(dist, ev, 10, 0.02);
    const bool design_ok = design.objective <= grid.objective + 1e-12;

    char buf[280];
    std::snprintf(buf, sizeof(buf),
                  "IS estimators with p'=p match plain counterparts: max gap = %.2e <= 1e-14; "
                  "design objective %.6e <= grid best %.6e (|A|=4, n=10, step 0.02)",
                  worst, design.objective, grid.objective);
    report(9, worst <= 1e-14 && design_ok, buf);
}

// ---- criterion 10: determinism ---------------------------------------------------

void criterion_10(const std::string& cli_path) {
    hrn::ExperimentConfig cfg;
    cfg.chain = {4, 8, 0.3, 0.6};
    cfg.n_grid = {2, 6};
    cfg.replications = 100;
    cfg.seed = 555;
    const bool lib_ok = hrn::run_compare(cfg) == hrn::run_compare(cfg);

    bool cli_ok = true;
    std::string cli_note = "CLI check: covered by the cli_determinism ctest entry";
    if (!cli_path.empty()) {
        const std::string base = "acceptance_det";
        const std::string cmd = "\"" + cli_path +
                                "\" compare --L 4 --T 8 --p1 0.3 --p2 0.6 --n 2,6 --reps 100 "
                                "--seed 555 --out " +
                                base;
        cli_ok = std::system((cmd + "1.csv").c_str()) == 0 &&
                 std::system((cmd + "2.csv").c_str()) == 0;
        if (cli_ok) {
            std::ifstream f1(base + "1.csv", std::ios::binary);
            std::ifstream f2(base + "2.csv", std::ios::binary);
            std::stringstream s1, s2;
            s1 << f1.rdbuf();
            s2 << f2.rdbuf();
            cli_ok = !s1.str().empty() && s1.str() == s2.str();
        }
        cli_note = cli_ok ? "CLI rerun byte-identical" : "CLI rerun differs";
    }
    report(10, lib_ok && cli_ok,
           std::string("identical config + seed give byte-identical reports; ") + cli_note);
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli_path;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli_path = argv[i + 1];

    const auto cells = small_grid();
    criterion_1(cells);
    criterion_2(cells);
    criterion_3(cells);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(cli_path);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
