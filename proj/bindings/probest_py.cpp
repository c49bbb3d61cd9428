// Python bindings for the probest core: distributions, samples, estimators,
// the chain analytics, the SI simulator, and the enumeration oracles.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "probest/epidemic.hpp"
#include "probest/estimators.hpp"
#include "probest/harness.hpp"
#include "probest/importance.hpp"
#include "probest/numeric.hpp"
#include "probest/oracle.hpp"

namespace py = pybind11;
using namespace probest;
namespace est = probest::estimators;
namespace imp = probest::importance;
namespace epi = probest::epidemic;

namespace {

ProbabilitySample sample_from_tuples(
    const std::vector<std::tuple<OutcomeId, double, py::object>>& rows) {
    std::vector<Draw> draws;
    draws.reserve(rows.size());
    for (const auto& [id, x, y] : rows) {
        Draw d{id, x, std::nullopt};
        if (!y.is_none()) d.y = y.cast<double>();
        draws.push_back(d);
    }
    return ProbabilitySample(std::move(draws));
}

est::MeanProblem mean_problem(const std::unordered_map<OutcomeId, double>& values, double xi) {
    return est::MeanProblem{values, xi};
}

}  // namespace

PYBIND11_MODULE(probest, m) {
    m.doc() = "probability-informed estimators of rare-event probabilities and means";

    py::register_exception<NoInformationError>(m, "NoInformationError");

    py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
        .def(py::init<std::vector<OutcomeId>, std::vector<double>>(), py::arg("outcomes"),
             py::arg("weights"))
        .def("prob", &DiscreteDistribution::prob)
        .def("contains", &DiscreteDistribution::contains)
        .def_property_readonly("outcomes", &DiscreteDistribution::outcomes)
        .def_property_readonly("weights", &DiscreteDistribution::weights)
        .def("__len__", &DiscreteDistribution::size);

    py::class_<Event>(m, "Event")
        .def(py::init<std::vector<OutcomeId>>(), py::arg("members"))
        .def("contains", &Event::contains)
        .def_property_readonly("members", &Event::members)
        .def_property_readonly("cardinality", &Event::cardinality);

    py::class_<EventQuery>(m, "EventQuery")
        .def(py::init<const Event&>())
        .def(py::init<std::uint64_t, std::function<bool(OutcomeId)>>(),
             py::arg("cardinality"), py::arg("contains"))
        .def("contains", &EventQuery::contains)
        .def_property_readonly("cardinality", &EventQuery::cardinality);
    py::implicitly_convertible<Event, EventQuery>();

    py::class_<ProbabilitySample>(m, "ProbabilitySample")
        .def(py::init(&sample_from_tuples), py::arg("draws"),
             "draws: list of (outcome_id, x) or (outcome_id, x, y) tuples")
        .def("__len__", &ProbabilitySample::size)
        .def("to_csv",
             [](const ProbabilitySample& s) {
                 std::ostringstream out;
                 s.to_csv(out);
                 return out.str();
             })
        .def_property_readonly("draws", [](const ProbabilitySample& s) {
            std::vector<std::tuple<OutcomeId, double, py::object>> rows;
            for (const Draw& d : s.draws())
                rows.emplace_back(d.outcome, d.x,
                                  d.y ? py::cast(*d.y) : py::object(py::none()));
            return rows;
        });

    py::class_<EstimateReport>(m, "EstimateReport")
        .def_property_readonly("estimator",
                               [](const EstimateReport& r) { return to_string(r.estimator); })
        .def_readonly("estimate", &EstimateReport::estimate)
        .def_property_readonly("variance_estimate",
                               [](const EstimateReport& r) -> py::object {
                                   if (!r.variance_estimate) return py::none();
                                   return py::cast(*r.variance_estimate);
                               })
        .def_readonly("n", &EstimateReport::n)
        .def_readonly("k", &EstimateReport::k)
        .def_readonly("notes", &EstimateReport::notes)
        .def("__repr__", [](const EstimateReport& r) {
            std::ostringstream out;
            out << "EstimateReport(" << to_string(r.estimator) << ", estimate=" << r.estimate
                << ")";
            return out.str();
        });

    // ---- estimators ------------------------------------------------------------
    m.def("pi0", &est::pi0, py::arg("sample"), py::arg("event"));
    m.def("v0_exact", &est::v0_exact, py::arg("pi"), py::arg("n"));
    m.def("pi0_max", &est::pi0_max, py::arg("sample"), py::arg("event"));
    m.def("pi1", &est::pi1, py::arg("sample"), py::arg("event"));
    m.def("v1_exact", &est::v1_exact, py::arg("dist"), py::arg("event"), py::arg("n"));
    m.def(
        "v1_exact_grouped",
        [](const std::vector<std::pair<double, double>>& groups, std::int64_t n) {
            std::vector<est::WeightGroup> g;
            for (auto [p, c] : groups) g.push_back({p, c});
            return est::v1_exact_grouped(g, n);
        },
        py::arg("groups"), py::arg("n"), "groups: list of (probability, count) pairs");
    m.def(
        "v1_asymptotic_bound",
        [](const DiscreteDistribution& d, const Event& a, std::int64_t n) {
            const auto r = est::v1_asymptotic_bound(d, a, n);
            return std::make_pair(r.approx, r.bound);
        },
        py::arg("dist"), py::arg("event"), py::arg("n"));
    m.def(
        "v1_equal_mass",
        [](double pi, std::uint64_t m_card, std::int64_t n) {
            return est::v1_equal_mass({pi, m_card, n});
        },
        py::arg("pi"), py::arg("m"), py::arg("n"));
    m.def("est_sum_p2qn", &est::est_sum_p2qn, py::arg("sample"), py::arg("event"));
    m.def("v1_hat", &est::v1_hat, py::arg("sample"), py::arg("event"));
    m.def("pi1_dual", &est::pi1_dual, py::arg("sample"), py::arg("event"),
          py::arg("dist_support_unknown") = false);
    m.def("pi1_combined", &est::pi1_combined, py::arg("sample"), py::arg("event"));
    m.def(
        "mu1",
        [](const ProbabilitySample& s, const std::unordered_map<OutcomeId, double>& values,
           double xi) { return est::mu1(s, mean_problem(values, xi)); },
        py::arg("sample"), py::arg("values"), py::arg("xi"));
    m.def("var_mu1_exact", &est::var_mu1_exact, py::arg("dist"), py::arg("values"),
          py::arg("n"), py::arg("xi"));
    m.def("optimal_xi", &est::optimal_xi, py::arg("dist"), py::arg("values"), py::arg("n"));
    m.def("pi1_cv", &est::pi1_cv, py::arg("sample"), py::arg("event"));
    m.def("pi2", &est::pi2, py::arg("sample"), py::arg("event"));
    m.def("v2_exact", &est::v2_exact, py::arg("dist"), py::arg("event"), py::arg("k"));
    m.def(
        "v2_jackknife",
        [](const ProbabilitySample& s, const EventQuery& ev, bool exact) {
            return est::v2_jackknife(
                s, ev, exact ? est::JackknifeForm::exact : est::JackknifeForm::large_k);
        },
        py::arg("sample"), py::arg("event"), py::arg("exact") = true);

    // ---- importance sampling -----------------------------------------------------
    m.def("pi0_is", &imp::pi0_is, py::arg("sample"), py::arg("event"));
    m.def("pi1_is", &imp::pi1_is, py::arg("sample"), py::arg("event"));
    m.def("v1_is_exact",
          py::overload_cast<const DiscreteDistribution&, const DiscreteDistribution&,
                            const Event&, std::int64_t>(&imp::v1_is_exact),
          py::arg("target"), py::arg("sampling"), py::arg("event"), py::arg("n"));
    m.def("v1_is_hat", &imp::v1_is_hat, py::arg("sample"), py::arg("event"));
    m.def("pi2_is", &imp::pi2_is, py::arg("sample"), py::arg("event"));
    m.def("v2_is_jackknife", &imp::v2_is_jackknife, py::arg("sample"), py::arg("event"));

    py::class_<imp::SamplingDesign>(m, "SamplingDesign")
        .def_readonly("support", &imp::SamplingDesign::support)
        .def_readonly("weights", &imp::SamplingDesign::weights)
        .def_readonly("excluded", &imp::SamplingDesign::excluded)
        .def_readonly("excluded_mass", &imp::SamplingDesign::excluded_mass)
        .def_readonly("alpha", &imp::SamplingDesign::alpha)
        .def_readonly("objective", &imp::SamplingDesign::objective)
        .def_readonly("feasible_sizes", &imp::SamplingDesign::feasible_sizes)
        .def("prob", &imp::SamplingDesign::prob)
        .def("to_csv", [](const imp::SamplingDesign& d, const DiscreteDistribution& target) {
            std::ostringstream out;
            d.to_csv(out, target);
            return out.str();
        });
    m.def("optimal_design", &imp::optimal_design, py::arg("target"), py::arg("event"),
          py::arg("n"));
    m.def("design_objective", &imp::design_objective, py::arg("target"), py::arg("event"),
          py::arg("design"), py::arg("n"));

    // ---- epidemic ------------------------------------------------------------------
    py::class_<epi::ChainParams>(m, "ChainParams")
        .def(py::init([](std::int64_t L, std::int64_t T, double p1, double p2) {
                 epi::ChainParams p{L, T, p1, p2};
                 epi::validate(p);
                 return p;
             }),
             py::arg("L"), py::arg("T"), py::arg("p1"), py::arg("p2"))
        .def_readonly("L", &epi::ChainParams::L)
        .def_readonly("T", &epi::ChainParams::T)
        .def_readonly("p1", &epi::ChainParams::p1)
        .def_readonly("p2", &epi::ChainParams::p2);

    py::class_<epi::SentinelSchedule>(m, "SentinelSchedule")
        .def(py::init([](const std::vector<std::pair<std::uint32_t, std::int64_t>>& tests) {
                 epi::SentinelSchedule s;
                 for (auto [node, time] : tests) s.tests.push_back({node, time});
                 return s;
             }),
             py::arg("tests"));

    py::class_<epi::SIModel>(m, "SIModel")
        .def(py::init<std::size_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>,
                      std::int64_t>(),
             py::arg("node_count"), py::arg("edges"), py::arg("horizon"))
        .def("set_p1_constant", &epi::SIModel::set_p1_constant)
        .def("set_p1", &epi::SIModel::set_p1)
        .def("set_p2_constant", &epi::SIModel::set_p2_constant)
        .def("set_p2", &epi::SIModel::set_p2)
        .def_property_readonly("node_count", &epi::SIModel::node_count)
        .def_property_readonly("horizon", &epi::SIModel::horizon);

    py::class_<epi::Trajectory>(m, "Trajectory")
        .def("infected", &epi::Trajectory::infected)
        .def("first_infection_time", &epi::Trajectory::first_infection_time)
        .def_property_readonly("logp", &epi::Trajectory::logp)
        .def_property_readonly("outcome_id", &epi::Trajectory::outcome_id);

    m.def("chain_model", &epi::chain_model, py::arg("params"));
    m.def("chain_schedule", &epi::chain_schedule, py::arg("params"));
    m.def(
        "simulate",
        [](const epi::SIModel& model, std::uint64_t seed) {
            num::Rng rng(seed);
            return epi::simulate(model, rng);
        },
        py::arg("model"), py::arg("seed"));
    m.def(
        "simulate_many",
        [](const epi::SIModel& model, std::uint64_t seed, std::int64_t count) {
            num::Rng rng(seed);
            std::vector<epi::Trajectory> out;
            out.reserve(static_cast<std::size_t>(count));
            for (std::int64_t i = 0; i < count; ++i) out.push_back(epi::simulate(model, rng));
            return out;
        },
        py::arg("model"), py::arg("seed"), py::arg("count"));
    m.def("detect", &epi::detect, py::arg("trajectory"), py::arg("schedule"));
    m.def("chain_outcome_prob", &epi::chain_outcome_prob, py::arg("params"), py::arg("times"));
    m.def("chain_pi_analytic", &epi::chain_pi_analytic, py::arg("params"));
    m.def("chain_pi_2f1", &epi::chain_pi_2f1, py::arg("params"));
    m.def("chain_complement_prob", &epi::chain_complement_prob, py::arg("params"));
    m.def(
        "enumerate_chain_outcomes",
        [](const epi::ChainParams& params, std::int64_t t_max, bool expand_residuals,
           std::uint64_t budget) {
            const auto outcomes = epi::enumerate_chain_outcomes(
                params, t_max,
                expand_residuals ? epi::ResidualMode::expanded : epi::ResidualMode::lumped,
                budget);
            py::list out;
            for (const auto& oc : outcomes) {
                py::dict d;
                switch (oc.kind) {
                    case epi::ChainOutcomeKind::full: d["kind"] = "full"; break;
                    case epi::ChainOutcomeKind::partial: d["kind"] = "partial"; break;
                    case epi::ChainOutcomeKind::no_seed: d["kind"] = "no_seed"; break;
                    case epi::ChainOutcomeKind::residual_lump: d["kind"] = "residual"; break;
                }
                d["times"] = oc.times;
                d["prob"] = oc.prob;
                d["id"] = oc.id;
                out.append(d);
            }
            return out;
        },
        py::arg("params"), py::arg("t_max"), py::arg("expand_residuals") = true,
        py::arg("budget") = 20'000'000);
    m.def(
        "chain_event_groups",
        [](const epi::ChainParams& params) {
            std::vector<std::pair<double, double>> out;
            for (const auto& g : epi::chain_event_groups(params))
                out.emplace_back(g.p, g.count);
            return out;
        },
        py::arg("params"));
    m.def("chain_event_cardinality", &epi::chain_event_cardinality, py::arg("params"));

    // ---- oracle ----------------------------------------------------------------------
    m.def("exact_pi", &oracle::exact_pi, py::arg("dist"), py::arg("event"));
    m.def(
        "estimator_moments",
        [](const DiscreteDistribution& target, const DiscreteDistribution& sampling,
           const Event& event, std::int64_t n, const py::function& estimator, double truth,
           std::uint64_t budget) {
            const oracle::EstimatorFn fn = [&estimator](const ProbabilitySample& s,
                                                        const EventQuery& ev) {
                py::object r = estimator(s, ev);
                if (r.is_none()) return std::optional<double>();
                return std::optional<double>(r.cast<double>());
            };
            const auto rep = oracle::estimator_moments(target, sampling, event, n, fn, truth,
                                                       {budget});
            py::dict d;
            d["mean"] = rep.mean;
            d["variance"] = rep.variance;
            d["bias"] = rep.bias;
            d["defined_fraction"] = rep.defined_fraction;
            d["tuples"] = rep.tuples;
            return d;
        },
        py::arg("target"), py::arg("sampling"), py::arg("event"), py::arg("n"),
        py::arg("estimator"), py::arg("truth"), py::arg("budget") = 100'000'000);
    m.def("variance_of_mu1_at_xi",
          [](const DiscreteDistribution& d, const std::unordered_map<OutcomeId, double>& x,
             std::int64_t n, double xi) { return oracle::variance_of_mu1_at_xi(d, x, n, xi); },
          py::arg("dist"), py::arg("values"), py::arg("n"), py::arg("xi"));
    m.def(
        "simplex_grid_search",
        [](const DiscreteDistribution& d, const Event& a, std::int64_t n, double step) {
            const auto r = oracle::simplex_grid_search(d, a, n, step);
            py::dict out;
            out["weights"] = r.weights;
            out["objective"] = r.objective;
            out["evaluated"] = r.evaluated;
            return out;
        },
        py::arg("dist"), py::arg("event"), py::arg("n"), py::arg("step"));

    // ---- harness ------------------------------------------------------------------------
    m.def(
        "run_compare",
        [](const std::string& config_json) {
            return harness::run_compare(harness::ExperimentConfig::from_json(config_json));
        },
        py::arg("config_json"));
    m.def(
        "run_oracle_suite",
        [](std::uint64_t budget) {
            const auto rep = harness::run_oracle_suite({budget});
            py::dict d;
            d["json"] = rep.json;
            d["checks"] = rep.checks;
            d["failures"] = rep.failures;
            return d;
        },
        py::arg("budget") = 100'000'000);
    m.def(
        "run_hypothesis_test",
        [](const epi::ChainParams& params, double level, std::int64_t n,
           const std::string& estimator, std::uint64_t seed) {
            const auto id = estimator_from_string(estimator);
            if (!id) throw std::invalid_argument("unknown estimator: " + estimator);
            const auto r = harness::run_hypothesis_test(params, epi::chain_schedule(params),
                                                        level, n, *id, seed);
            py::dict d;
            d["pi_hat"] = r.pi_hat;
            d["variance_hat"] = r.variance_hat;
            d["level"] = r.level;
            d["reject_point"] = r.reject_point;
            d["reject_conservative"] = r.reject_conservative;
            d["upper_confidence_bound"] = r.upper_confidence_bound;
            d["n"] = r.n;
            d["k"] = r.k;
            d["estimator"] = r.estimator_used;
            d["notes"] = r.notes;
            return d;
        },
        py::arg("params"), py::arg("level"), py::arg("n"), py::arg("estimator"),
        py::arg("seed"));
}
