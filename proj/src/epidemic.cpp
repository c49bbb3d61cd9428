#include "probest/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace probest::epidemic {

using num::KahanSum;

SentinelSchedule SentinelSchedule::from_csv(std::istream& in) {
    SentinelSchedule s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string node_field, time_field;
        if (!std::getline(row, node_field, ',') || !std::getline(row, time_field, ','))
            throw std::invalid_argument("schedule csv: expected 'node,time': " + line);
        s.tests.push_back({static_cast<std::uint32_t>(std::stoul(node_field)),
                           std::stoll(time_field)});
    }
    return s;
}

SentinelSchedule SentinelSchedule::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schedule file: " + path);
    return from_csv(in);
}

SIModel::SIModel(std::size_t node_count,
                 std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                 std::int64_t horizon)
    : node_count_(node_count), horizon_(horizon), adjacency_(node_count) {
    if (node_count == 0) throw std::invalid_argument("SI model: empty node set");
    if (horizon < 0) throw std::invalid_argument("SI model: negative horizon");
    for (auto [u, v] : edges) {
        if (u >= node_count || v >= node_count)
            throw std::invalid_argument("SI model: edge references unknown node");
        if (u == v) throw std::invalid_argument("SI model: self loop");
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

namespace {

void check_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " outside [0,1]");
}

}  // namespace

void SIModel::set_p1_constant(double p) {
    check_prob(p, "p1");
    p1_default_ = p;
}

void SIModel::set_p1(std::uint32_t node, std::int64_t t, double p) {
    check_prob(p, "p1");
    p1_overrides_[{node, t}] = p;
}

void SIModel::set_p2_constant(double p) {
    check_prob(p, "p2");
    p2_default_ = p;
}

void SIModel::set_p2(std::uint32_t from, std::uint32_t to, std::int64_t t, double p) {
    check_prob(p, "p2");
    p2_overrides_[{from, to, t}] = p;
}

double SIModel::p1(std::uint32_t node, std::int64_t t) const {
    auto it = p1_overrides_.find({node, t});
    return it != p1_overrides_.end() ? it->second : p1_default_;
}

double SIModel::p2(std::uint32_t from, std::uint32_t to, std::int64_t t) const {
    auto it = p2_overrides_.find({from, to, t});
    return it != p2_overrides_.end() ? it->second : p2_default_;
}

SIModel SIModel::load_edge_list(const std::string& path, std::int64_t horizon) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::uint32_t max_node = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::uint32_t u, v;
        if (!(row >> u >> v))
            throw std::invalid_argument("edge list: expected 'u v': " + line);
        edges.emplace_back(u, v);
        max_node = std::max({max_node, u, v});
    }
    return SIModel(static_cast<std::size_t>(max_node) + 1, std::move(edges), horizon);
}

Trajectory::Trajectory(std::size_t node_count, std::int64_t horizon)
    : node_count_(node_count), horizon_(horizon), first_time_(node_count, -1) {}

bool Trajectory::infected(std::uint32_t node, std::int64_t t) const {
    const std::int64_t ft = first_time_[node];
    return ft >= 0 && ft <= t;
}

void Trajectory::mark_infected(std::uint32_t node, std::int64_t t) {
    if (first_time_[node] >= 0)
        throw std::logic_error("trajectory: node infected twice");
    first_time_[node] = t;
}

std::int64_t Trajectory::first_infection_time(std::uint32_t node) const {
    return first_time_[node];
}

std::vector<std::uint8_t> Trajectory::packed() const {
    const std::int64_t cols = horizon_ + 1;  // times 0..T
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + (node_count_ * static_cast<std::size_t>(cols) + 7) / 8);
    auto push_u64 = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    };
    push_u64(node_count_);
    push_u64(static_cast<std::uint64_t>(cols));
    std::uint8_t cur = 0;
    int fill = 0;
    for (std::uint32_t v = 0; v < node_count_; ++v) {
        for (std::int64_t t = 0; t < cols; ++t) {
            cur = static_cast<std::uint8_t>((cur << 1) | (infected(v, t) ? 1 : 0));
            if (++fill == 8) {
                bytes.push_back(cur);
                cur = 0;
                fill = 0;
            }
        }
    }
    if (fill > 0) bytes.push_back(static_cast<std::uint8_t>(cur << (8 - fill)));
    return bytes;
}

OutcomeId Trajectory::outcome_id() const {
    const auto bytes = packed();
    return num::fnv1a64(bytes.data(), bytes.size());
}

void Trajectory::dump(std::ostream& out) const {
    for (std::int64_t t = 0; t <= horizon_; ++t) {
        for (std::uint32_t v = 0; v < node_count_; ++v)
            out << (infected(v, t) ? '1' : '0');
        out << '\n';
    }
}

Trajectory simulate(const SIModel& model, num::Rng& rng) {
    const std::size_t nodes = model.node_count();
    Trajectory traj(nodes, model.horizon());

    // t = 0: only base infection acts (nothing is infected yet)
    for (std::uint32_t v = 0; v < nodes; ++v) {
        const double h = model.p1(v, 0);
        if (h <= 0.0) continue;  // certain survival, log-factor 0
        if (rng.u01() < h) {
            traj.mark_infected(v, 0);
            traj.add_logp(std::log(h));
        } else {
            traj.add_logp(std::log1p(-h));
        }
    }

    for (std::int64_t t = 1; t <= model.horizon(); ++t) {
        // synchronous update: hazards depend on the state at t-1 only
        std::vector<std::uint32_t> newly;
        for (std::uint32_t v = 0; v < nodes; ++v) {
            if (traj.infected(v, t - 1)) continue;
            // 1 - h = (1 - p1(v,t)) prod over infected neighbors of (1 - p2)
            double log_surv = std::log1p(-std::min(model.p1(v, t), 1.0));
            bool certain = model.p1(v, t) >= 1.0;
            for (std::uint32_t u : model.neighbors(v)) {
                if (!traj.infected(u, t - 1)) continue;
                const double p2 = model.p2(u, v, t);
                if (p2 >= 1.0) certain = true;
                else log_surv += std::log1p(-p2);
            }
            if (certain) {
                newly.push_back(v);  // hazard 1, log-factor 0
                continue;
            }
            const double h = -std::expm1(log_surv);
            if (h <= 0.0) continue;  // no exposure, log-factor 0
            if (rng.u01() < h) {
                newly.push_back(v);
                traj.add_logp(std::log(h));
            } else {
                traj.add_logp(log_surv);
            }
        }
        for (std::uint32_t v : newly) traj.mark_infected(v, t);
    }
    return traj;
}

bool detect(const Trajectory& trajectory, const SentinelSchedule& schedule) {
    for (const SentinelTest& test : schedule.tests)
        if (test.node < trajectory.node_count() && trajectory.infected(test.node, test.time))
            return true;
    return false;
}

void validate(const ChainParams& params) {
    if (params.L < 1) throw std::invalid_argument("chain: L must be >= 1");
    if (params.T < 0) throw std::invalid_argument("chain: T must be >= 0");
    if (!(params.p1 > 0.0 && params.p1 <= 1.0))
        throw std::invalid_argument("chain: p1 must lie in (0,1]");
    if (!(params.p2 > 0.0 && params.p2 <= 1.0))
        throw std::invalid_argument("chain: p2 must lie in (0,1]");
}

SIModel chain_model(const ChainParams& params) {
    validate(params);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::int64_t v = 0; v < params.L; ++v)
        edges.emplace_back(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v + 1));
    SIModel model(static_cast<std::size_t>(params.L) + 1, std::move(edges), params.T);
    model.set_p2_constant(params.p2);
    model.set_p1(0, 0, params.p1);  // seeding happens at t = 0 only
    return model;
}

SentinelSchedule chain_schedule(const ChainParams& params) {
    SentinelSchedule s;
    s.tests.push_back({static_cast<std::uint32_t>(params.L), params.T});
    return s;
}

double chain_outcome_prob(const ChainParams& params, const std::vector<std::int64_t>& times) {
    validate(params);
    if (static_cast<std::int64_t>(times.size()) != params.L)
        throw std::invalid_argument("chain outcome: expected one time per node 1..L");
    std::int64_t prev = 0;
    for (std::size_t v = 0; v < times.size(); ++v) {
        if (times[v] <= prev)
            throw std::invalid_argument("chain outcome: times must be strictly increasing");
        if (times[v] < static_cast<std::int64_t>(v) + 1)
            throw std::invalid_argument("chain outcome: node v cannot be infected before t = v");
        prev = times[v];
    }
    const std::int64_t waits = times.back() - params.L;  // total failed transmissions
    return params.p1 * num::pow_int(params.p2, params.L) * num::pow_int(params.q2(), waits);
}

double chain_pi_analytic(const ChainParams& params) {
    validate(params);
    if (params.T < params.L) return 0.0;
    const double q2 = params.q2();
    KahanSum acc;
    double coeff = 1.0;  // C(s-1, L-1) q2^(s-L), updated iteratively
    for (std::int64_t s = params.L; s <= params.T; ++s) {
        if (s > params.L) {
            coeff *= static_cast<double>(s - 1) / static_cast<double>(s - params.L) * q2;
        }
        acc.add(coeff);
    }
    return params.p1 * num::pow_int(params.p2, params.L) * acc.value();
}

double chain_pi_2f1(const ChainParams& params) {
    validate(params);
    if (params.T < params.L) return 0.0;
    const double q2 = params.q2();
    if (q2 == 0.0) return params.p1;  // deterministic spread
    const double prefactor = num::pow_int(params.p2, params.L) *
                             num::pow_int(q2, params.T + 1 - params.L) *
                             num::binomial(params.T, params.L - 1);
    const double f = num::hyp2f1_1bc(static_cast<double>(params.T + 1),
                                     static_cast<double>(params.T + 2 - params.L), q2);
    return params.p1 * (1.0 - prefactor * f);
}

double chain_complement_prob(const ChainParams& params) {
    validate(params);
    const double q2 = params.q2();
    const std::int64_t start = std::max(params.T + 1, params.L);
    if (q2 == 0.0)
        return (params.T < params.L) ? 1.0 : 1.0 - params.p1;

    // a_s = C(s-1, L-1) q2^(s-L), ratio a_{s+1}/a_s = s/(s-L+1) * q2,
    // decreasing in s; once it is < 1 the remainder is bounded by a geometric
    // series.
    double a = num::binomial(start - 1, params.L - 1) * num::pow_int(q2, start - params.L);
    KahanSum tail;
    std::int64_t s = start;
    for (;;) {
        tail.add(a);
        const double ratio = static_cast<double>(s) / static_cast<double>(s - params.L + 1) * q2;
        if (ratio < 1.0 && a * ratio / (1.0 - ratio) < 1e-14) break;
        if (s - start > 100'000'000)
            throw std::runtime_error("chain complement: tail series failed to converge");
        a *= ratio;
        ++s;
    }
    return 1.0 - params.p1 +
           params.p1 * num::pow_int(params.p2, params.L) * tail.value();
}

namespace {

// Trajectory realizing a (possibly partial) chain encoding at a horizon.
Trajectory chain_trajectory(const ChainParams& params, std::int64_t horizon, bool seeded,
                            const std::vector<std::int64_t>& times) {
    Trajectory traj(static_cast<std::size_t>(params.L) + 1, horizon);
    if (seeded) {
        traj.mark_infected(0, 0);
        for (std::size_t v = 0; v < times.size(); ++v)
            traj.mark_infected(static_cast<std::uint32_t>(v + 1), times[v]);
    }
    return traj;
}

// All strictly increasing j-tuples from {1..t_max}; the v-th smallest entry
// of any such tuple is automatically >= v.
template <typename Fn>
void for_each_increasing_tuple(std::int64_t j, std::int64_t t_max, Fn&& fn) {
    if (j == 0) {
        fn(std::vector<std::int64_t>{});
        return;
    }
    std::vector<std::int64_t> tuple(static_cast<std::size_t>(j));
    for (std::int64_t i = 0; i < j; ++i) tuple[static_cast<std::size_t>(i)] = i + 1;
    for (;;) {
        fn(tuple);
        std::int64_t i = j - 1;
        while (i >= 0 && tuple[static_cast<std::size_t>(i)] == t_max - (j - 1 - i)) --i;
        if (i < 0) break;
        ++tuple[static_cast<std::size_t>(i)];
        for (std::int64_t l = i + 1; l < j; ++l)
            tuple[static_cast<std::size_t>(l)] = tuple[static_cast<std::size_t>(l - 1)] + 1;
    }
}

}  // namespace

std::vector<ChainOutcome> enumerate_chain_outcomes(const ChainParams& params,
                                                   std::int64_t t_max, ResidualMode mode,
                                                   std::uint64_t budget) {
    validate(params);
    if (t_max < params.L)
        throw std::invalid_argument("enumerate_chain_outcomes: t_max must be >= L");

    double planned = num::binomial(t_max, params.L);
    if (mode == ResidualMode::expanded)
        for (std::int64_t j = 0; j < params.L; ++j) planned += num::binomial(t_max, j);
    if (planned > static_cast<double>(budget))
        throw std::runtime_error("enumerate_chain_outcomes: enumeration budget exceeded");

    const double q2 = params.q2();
    std::vector<ChainOutcome> out;

    // no-seed outcome
    if (params.p1 < 1.0) {
        ChainOutcome none;
        none.kind = ChainOutcomeKind::no_seed;
        none.prob = 1.0 - params.p1;
        none.id = chain_trajectory(params, t_max, false, {}).outcome_id();
        out.push_back(std::move(none));
    }

    // full-spread outcomes, t_L <= t_max
    const double p2L = num::pow_int(params.p2, params.L);
    for_each_increasing_tuple(params.L, t_max, [&](const std::vector<std::int64_t>& times) {
        const double prob = params.p1 * p2L * num::pow_int(q2, times.back() - params.L);
        if (prob <= 0.0) return;
        ChainOutcome oc;
        oc.kind = ChainOutcomeKind::full;
        oc.times = times;
        oc.prob = prob;
        oc.id = chain_trajectory(params, t_max, true, times).outcome_id();
        out.push_back(std::move(oc));
    });

    if (mode == ResidualMode::expanded) {
        // seeded trajectories whose spread reached only j < L nodes by t_max;
        // each has probability p1 p2^j q2^(t_max - j) independent of the times
        for (std::int64_t j = 0; j < params.L; ++j) {
            const double prob = params.p1 * num::pow_int(params.p2, j) *
                                num::pow_int(q2, t_max - j);
            if (prob <= 0.0) continue;
            for_each_increasing_tuple(j, t_max, [&](const std::vector<std::int64_t>& times) {
                ChainOutcome oc;
                oc.kind = ChainOutcomeKind::partial;
                oc.times = times;
                oc.prob = prob;
                oc.id = chain_trajectory(params, t_max, true, times).outcome_id();
                out.push_back(std::move(oc));
            });
        }
    } else {
        ChainParams at_horizon = params;
        at_horizon.T = t_max;
        const double tail = params.p1 - chain_pi_analytic(at_horizon);
        if (tail > 0.0) {
            ChainOutcome lump;
            lump.kind = ChainOutcomeKind::residual_lump;
            lump.prob = tail;
            lump.id = 0;
            out.push_back(std::move(lump));
        }
    }
    return out;
}

std::vector<estimators::WeightGroup> chain_event_groups(const ChainParams& params) {
    validate(params);
    std::vector<estimators::WeightGroup> groups;
    if (params.T < params.L) return groups;
    const double p2L = num::pow_int(params.p2, params.L);
    for (std::int64_t s = params.L; s <= params.T; ++s) {
        const double p = params.p1 * p2L * num::pow_int(params.q2(), s - params.L);
        if (p <= 0.0) continue;
        groups.push_back({p, num::binomial(s - 1, params.L - 1)});
    }
    return groups;
}

std::vector<estimators::WeightGroup> chain_complement_groups(const ChainParams& params) {
    validate(params);
    std::vector<estimators::WeightGroup> groups;
    if (params.p1 < 1.0) groups.push_back({1.0 - params.p1, 1.0});
    const std::int64_t reach = std::min(params.L - 1, params.T);
    for (std::int64_t j = 0; j <= reach; ++j) {
        const double p =
            params.p1 * num::pow_int(params.p2, j) * num::pow_int(params.q2(), params.T - j);
        if (p <= 0.0) continue;
        groups.push_back({p, num::binomial(params.T, j)});
    }
    return groups;
}

std::uint64_t chain_event_cardinality(const ChainParams& params) {
    validate(params);
    if (params.T < params.L) return 0;
    // sum over s of C(s-1, L-1) telescopes to C(T, L)
    return num::binomial_u64(params.T, params.L);
}

std::uint64_t chain_complement_cardinality(const ChainParams& params) {
    validate(params);
    std::uint64_t count = 1;  // no-seed
    const std::int64_t reach = std::min(params.L - 1, params.T);
    for (std::int64_t j = 0; j <= reach; ++j) count += num::binomial_u64(params.T, j);
    return count;
}

}  // namespace probest::epidemic
