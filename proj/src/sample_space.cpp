#include "probest/sample_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "probest/numeric.hpp"

namespace probest {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<OutcomeId> outcomes,
                                           std::vector<double> weights)
    : outcomes_(std::move(outcomes)), weights_(std::move(weights)) {
    if (outcomes_.size() != weights_.size())
        throw std::invalid_argument("distribution: outcome/weight size mismatch");
    if (outcomes_.empty())
        throw std::invalid_argument("distribution: empty outcome set");
    num::KahanSum total;
    index_.reserve(outcomes_.size());
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        if (!(weights_[i] >= 0.0))
            throw std::invalid_argument("distribution: negative or NaN weight");
        if (!index_.emplace(outcomes_[i], i).second)
            throw std::invalid_argument("distribution: duplicate outcome id");
        total.add(weights_[i]);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw std::invalid_argument("distribution: weights sum to " + fmt17(total.value()) +
                                    ", expected 1 within 1e-12");
}

std::size_t DiscreteDistribution::index_of(OutcomeId id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw std::invalid_argument("distribution: unknown outcome id " + std::to_string(id));
    return it->second;
}

DiscreteDistribution DiscreteDistribution::from_csv(std::istream& in) {
    std::vector<OutcomeId> ids;
    std::vector<double> ws;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id_field, p_field;
        if (!std::getline(row, id_field, ',') || !std::getline(row, p_field, ','))
            throw std::invalid_argument("distribution csv: expected 'outcome_id,p': " + line);
        ids.push_back(std::stoull(id_field));
        ws.push_back(std::stod(p_field));
    }
    return DiscreteDistribution(std::move(ids), std::move(ws));
}

DiscreteDistribution DiscreteDistribution::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open distribution file: " + path);
    return from_csv(in);
}

void DiscreteDistribution::to_csv(std::ostream& out) const {
    for (std::size_t i = 0; i < outcomes_.size(); ++i)
        out << outcomes_[i] << ',' << fmt17(weights_[i]) << '\n';
}

Event::Event(std::vector<OutcomeId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    auto dup = std::adjacent_find(members_.begin(), members_.end());
    if (dup != members_.end())
        throw std::invalid_argument("event: duplicate member id " + std::to_string(*dup));
}

bool Event::contains(OutcomeId id) const {
    return std::binary_search(members_.begin(), members_.end(), id);
}

void Event::validate_against(const DiscreteDistribution& dist) const {
    for (OutcomeId id : members_)
        if (!dist.contains(id))
            throw std::invalid_argument("event member " + std::to_string(id) +
                                        " is not an outcome of the distribution");
}

EventQuery::EventQuery(const Event& event)
    : m_(event.cardinality()),
      contains_([members = std::make_shared<Event>(event)](OutcomeId id) {
          return members->contains(id);
      }) {}

EventQuery::EventQuery(std::uint64_t cardinality, std::function<bool(OutcomeId)> contains)
    : m_(cardinality), contains_(std::move(contains)) {
    if (!contains_) throw std::invalid_argument("event query: null membership predicate");
}

ProbabilitySample::ProbabilitySample(std::vector<Draw> draws) : draws_(std::move(draws)) {
    std::unordered_map<OutcomeId, std::size_t> first_seen;
    for (std::size_t i = 0; i < draws_.size(); ++i) {
        const Draw& d = draws_[i];
        if (!(d.x > 0.0) || d.x > 1.0)
            throw std::invalid_argument("sample: draw probability x must lie in (0,1]");
        if (d.y && (!(*d.y > 0.0) || *d.y > 1.0))
            throw std::invalid_argument("sample: sampling probability y must lie in (0,1]");
        auto [it, inserted] = first_seen.emplace(d.outcome, i);
        if (!inserted) {
            const Draw& prev = draws_[it->second];
            if (prev.x != d.x || prev.y.has_value() != d.y.has_value() ||
                (prev.y && *prev.y != *d.y))
                throw std::invalid_argument(
                    "sample: outcome " + std::to_string(d.outcome) +
                    " appears with inconsistent probability annotations");
        }
    }
}

bool ProbabilitySample::has_importance_weights() const {
    return std::all_of(draws_.begin(), draws_.end(),
                       [](const Draw& d) { return d.y.has_value(); });
}

ProbabilitySample ProbabilitySample::from_csv(std::istream& in) {
    std::vector<Draw> draws;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        Draw d;
        if (!std::getline(row, field, ',')) throw std::invalid_argument("sample csv: " + line);
        d.outcome = std::stoull(field);
        if (!std::getline(row, field, ',')) throw std::invalid_argument("sample csv: " + line);
        d.x = std::stod(field);
        if (std::getline(row, field, ',')) d.y = std::stod(field);
        draws.push_back(d);
    }
    return ProbabilitySample(std::move(draws));
}

ProbabilitySample ProbabilitySample::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sample file: " + path);
    return from_csv(in);
}

void ProbabilitySample::to_csv(std::ostream& out) const {
    for (const Draw& d : draws_) {
        out << d.outcome << ',' << fmt17(d.x);
        if (d.y) out << ',' << fmt17(*d.y);
        out << '\n';
    }
}

const char* to_string(EstimatorId id) {
    switch (id) {
        case EstimatorId::pi0: return "pi0";
        case EstimatorId::pi0_max: return "pi0_max";
        case EstimatorId::pi1: return "pi1";
        case EstimatorId::pi1_dual: return "pi1_dual";
        case EstimatorId::pi1_combined: return "pi1_combined";
        case EstimatorId::pi1_cv: return "pi1_cv";
        case EstimatorId::mu1: return "mu1";
        case EstimatorId::pi2: return "pi2";
        case EstimatorId::pi0_is: return "pi0_is";
        case EstimatorId::pi1_is: return "pi1_is";
        case EstimatorId::pi2_is: return "pi2_is";
    }
    return "?";
}

std::optional<EstimatorId> estimator_from_string(const std::string& name) {
    static const std::pair<const char*, EstimatorId> table[] = {
        {"pi0", EstimatorId::pi0},
        {"pi0_max", EstimatorId::pi0_max},
        {"pi1", EstimatorId::pi1},
        {"pi1_dual", EstimatorId::pi1_dual},
        {"pi1_combined", EstimatorId::pi1_combined},
        {"pi1_cv", EstimatorId::pi1_cv},
        {"mu1", EstimatorId::mu1},
        {"pi2", EstimatorId::pi2},
        {"pi0_is", EstimatorId::pi0_is},
        {"pi1_is", EstimatorId::pi1_is},
        {"pi2_is", EstimatorId::pi2_is},
    };
    for (const auto& [token, id] : table)
        if (name == token) return id;
    return std::nullopt;
}

std::vector<Draw> observed_set(const ProbabilitySample& sample) {
    std::vector<Draw> out;
    std::unordered_map<OutcomeId, std::size_t> seen;
    out.reserve(sample.size());
    for (const Draw& d : sample.draws()) {
        auto [it, inserted] = seen.emplace(d.outcome, out.size());
        if (inserted) {
            out.push_back(d);
        } else {
            const Draw& prev = out[it->second];
            if (prev.x != d.x)
                throw std::invalid_argument("observed_set: outcome " + std::to_string(d.outcome) +
                                            " appears with different x values");
        }
    }
    return out;
}

std::pair<ProbabilitySample, ProbabilitySample> event_split(const ProbabilitySample& sample,
                                                            const EventQuery& event) {
    std::vector<Draw> in_a, out_a;
    for (const Draw& d : sample.draws())
        (event.contains(d.outcome) ? in_a : out_a).push_back(d);
    return {ProbabilitySample(std::move(in_a)), ProbabilitySample(std::move(out_a))};
}

std::size_t count_in_event(const ProbabilitySample& sample, const EventQuery& event) {
    std::size_t k = 0;
    for (const Draw& d : sample.draws())
        if (event.contains(d.outcome)) ++k;
    return k;
}

}  // namespace probest
