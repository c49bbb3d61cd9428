// probest command-line harness: variance comparisons, chain analytics, the
// sentinel hypothesis test, the enumeration verification suite, and optimal
// sampling designs. Exit codes: 0 success, 1 usage error, 2 verification
// failure in `oracle`.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "probest/estimators.hpp"
#include "probest/harness.hpp"
#include "probest/importance.hpp"
#include "probest/oracle.hpp"

namespace {

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << text;
}

std::vector<std::int64_t> parse_n_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probability-informed estimators of rare-event probabilities"};
    app.require_subcommand(1);

    std::string config_path, out_path, estimators_csv, n_list = "10";
    std::uint64_t seed = 1;
    std::int64_t L = 10, T = 20, n_single = 500, reps = 1000;
    double p1 = 0.3, p2 = 0.6, level = 0.01, grid_step = 0.05;

    auto add_chain_flags = [&](CLI::App* cmd) {
        cmd->add_option("--L", L, "chain length (nodes 0..L)");
        cmd->add_option("--T", T, "time horizon");
        cmd->add_option("--p1", p1, "seeding probability");
        cmd->add_option("--p2", p2, "transmission probability");
    };

    CLI::App* compare = app.add_subcommand(
        "compare", "empirical and exact estimator variances over an n grid");
    compare->add_option("--config", config_path, "JSON config file");
    compare->add_option("--seed", seed, "master seed");
    compare->add_option("--out", out_path, "output CSV path (default stdout)");
    compare->add_option("--reps", reps, "replications per n");
    compare->add_option("--n", n_list, "comma-separated sample sizes");
    compare->add_option("--estimators", estimators_csv, "comma-separated estimator names");
    add_chain_flags(compare);

    CLI::App* chain = app.add_subcommand("chain", "analytic chain-model report");
    chain->add_option("--out", out_path, "output path (default stdout)");
    chain->add_option("--n", n_list, "comma-separated sample sizes for v0/v1");
    chain->add_flag("--sweep", "emit the (p1,p2) margin sweep instead");
    chain->add_option("--sweep-step", grid_step, "sweep grid step");
    add_chain_flags(chain);

    CLI::App* hyptest = app.add_subcommand(
        "hyptest", "test the outbreak hypothesis from all-negative sentinel tests");
    hyptest->add_option("--seed", seed, "master seed");
    hyptest->add_option("--out", out_path, "output path (default stdout)");
    hyptest->add_option("--n", n_single, "number of simulated outbreaks");
    hyptest->add_option("--level", level, "test level");
    std::string estimator_name = "pi1", graph_path, schedule_path;
    hyptest->add_option("--estimator", estimator_name, "pi0, pi1 or pi2");
    hyptest->add_option("--graph", graph_path, "edge-list file (general SI model)");
    hyptest->add_option("--schedule", schedule_path, "sentinel schedule CSV (node,time)");
    add_chain_flags(hyptest);

    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle", "run the enumeration verification suite (exit 2 on failure)");
    oracle_cmd->add_option("--out", out_path, "JSON report path (default stdout)");
    std::uint64_t budget = 100'000'000;
    oracle_cmd->add_option("--budget", budget, "tuple enumeration budget");

    CLI::App* design = app.add_subcommand(
        "design", "optimal sampling design for an event of a known distribution");
    std::string dist_path, event_csv;
    design->add_option("--dist", dist_path, "distribution CSV (outcome_id,p)")->required();
    design->add_option("--event", event_csv, "comma-separated event outcome ids")->required();
    design->add_option("--n", n_single, "sample size the design is tuned for");
    design->add_option("--out", out_path, "output CSV path (default stdout)");
    design->add_flag("--check", "compare against the simplex grid search");
    design->add_option("--grid-step", grid_step, "grid step for --check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1; --help exits 0
    }

    try {
        if (compare->parsed()) {
            probest::harness::ExperimentConfig cfg;
            if (!config_path.empty()) {
                cfg = probest::harness::ExperimentConfig::load_json(config_path);
            } else {
                cfg.chain = {L, T, p1, p2};
                cfg.seed = seed;
                cfg.replications = reps;
                cfg.n_grid = parse_n_list(n_list);
            }
            if (compare->count("--L")) cfg.chain.L = L;
            if (compare->count("--T")) cfg.chain.T = T;
            if (compare->count("--p1")) cfg.chain.p1 = p1;
            if (compare->count("--p2")) cfg.chain.p2 = p2;
            if (compare->count("--seed")) cfg.seed = seed;
            if (compare->count("--reps")) cfg.replications = reps;
            if (compare->count("--n")) cfg.n_grid = parse_n_list(n_list);
            if (compare->count("--estimators")) {
                cfg.estimators.clear();
                std::stringstream ss(estimators_csv);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    auto id = probest::estimator_from_string(item);
                    if (!id) throw std::invalid_argument("unknown estimator: " + item);
                    cfg.estimators.push_back(*id);
                }
            }
            if (compare->count("--out")) cfg.out_path = out_path;
            write_output(probest::harness::run_compare(cfg), cfg.out_path);
        } else if (chain->parsed()) {
            if (chain->count("--sweep")) {
                write_output(probest::harness::run_chain_sweep(L, T, 10, grid_step), out_path);
            } else {
                probest::epidemic::ChainParams params{L, T, p1, p2};
                write_output(probest::harness::run_chain_report(params, parse_n_list(n_list)),
                             out_path);
            }
        } else if (hyptest->parsed()) {
            auto id = probest::estimator_from_string(estimator_name);
            if (!id) throw std::invalid_argument("unknown estimator: " + estimator_name);
            probest::harness::HypothesisTestResult result;
            if (!graph_path.empty()) {
                auto model = probest::epidemic::SIModel::load_edge_list(graph_path, T);
                model.set_p1_constant(p1);
                model.set_p2_constant(p2);
                if (schedule_path.empty())
                    throw std::invalid_argument("--graph requires --schedule");
                auto schedule = probest::epidemic::SentinelSchedule::load_csv(schedule_path);
                result = probest::harness::run_hypothesis_test(model, schedule, level,
                                                               n_single, *id, seed);
            } else {
                probest::epidemic::ChainParams params{L, T, p1, p2};
                auto schedule = schedule_path.empty()
                                    ? probest::epidemic::chain_schedule(params)
                                    : probest::epidemic::SentinelSchedule::load_csv(
                                          schedule_path);
                result = probest::harness::run_hypothesis_test(params, schedule, level,
                                                               n_single, *id, seed);
            }
            std::ostringstream out;
            out << "pi_hat," << probest::harness::format_g17(result.pi_hat) << '\n'
                << "variance_hat," << probest::harness::format_g17(result.variance_hat) << '\n'
                << "upper_confidence_bound,"
                << probest::harness::format_g17(result.upper_confidence_bound) << '\n'
                << "level," << probest::harness::format_g17(result.level) << '\n'
                << "n," << result.n << '\n'
                << "k_all_negative," << result.k << '\n'
                << "estimator," << result.estimator_used << '\n'
                << "decision_point," << (result.reject_point ? "reject" : "retain") << '\n'
                << "decision_conservative,"
                << (result.reject_conservative ? "reject" : "retain") << '\n';
            if (!result.notes.empty()) out << "notes," << result.notes << '\n';
            write_output(out.str(), out_path);
        } else if (oracle_cmd->parsed()) {
            probest::oracle::EnumerationBudget b{budget};
            const auto report = probest::harness::run_oracle_suite(b);
            write_output(report.json + "\n", out_path);
            if (report.failures > 0) {
                std::cerr << report.failures << " of " << report.checks
                          << " asserted checks failed\n";
                return 2;
            }
        } else if (design->parsed()) {
            auto dist = probest::DiscreteDistribution::load_csv(dist_path);
            std::vector<probest::OutcomeId> members;
            std::stringstream ss(event_csv);
            std::string item;
            while (std::getline(ss, item, ',')) members.push_back(std::stoull(item));
            probest::Event event{members};
            const auto d = probest::importance::optimal_design(dist, event, n_single);
            std::ostringstream out;
            d.to_csv(out, dist);
            out << "objective," << probest::harness::format_g17(d.objective) << '\n';
            out << "alpha," << probest::harness::format_g17(d.alpha) << '\n';
            out << "excluded_mass," << probest::harness::format_g17(d.excluded_mass) << '\n';
            if (design->count("--check")) {
                const auto grid = probest::oracle::simplex_grid_search(dist, event, n_single,
                                                                       grid_step);
                out << "grid_best_objective,"
                    << probest::harness::format_g17(grid.objective) << '\n';
                out << "grid_points," << grid.evaluated << '\n';
            }
            write_output(out.str(), out_path);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
