#include "probest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "probest/numeric.hpp"

namespace probest::estimators {

using num::inclusion_prob;
using num::joint_excess;
using num::KahanSum;
using num::single_excess;
using num::survival_pow;

namespace {

void require_nonempty(const ProbabilitySample& sample, const char* who) {
    if (sample.empty())
        throw std::invalid_argument(std::string(who) + ": empty sample");
}

// Distinct observed outcomes lying in the event.
std::vector<Draw> observed_in(const ProbabilitySample& sample, const EventQuery& event) {
    std::vector<Draw> in;
    for (const Draw& d : observed_set(sample))
        if (event.contains(d.outcome)) in.push_back(d);
    return in;
}

std::vector<Draw> observed_out(const ProbabilitySample& sample, const EventQuery& event) {
    std::vector<Draw> out;
    for (const Draw& d : observed_set(sample))
        if (!event.contains(d.outcome)) out.push_back(d);
    return out;
}

// Event-member probability groups of a (dist, event) pair, zero-mass members
// dropped (they never occur and contribute nothing).
std::vector<WeightGroup> event_groups(const DiscreteDistribution& dist, const Event& event) {
    std::vector<WeightGroup> groups;
    groups.reserve(event.cardinality());
    for (OutcomeId id : event.members()) {
        double p = dist.prob(id);
        if (p > 0.0) groups.push_back({p, 1.0});
    }
    return groups;
}

// Unbiased v1 estimator evaluated on an explicit list of distinct observed
// outcomes known to lie in the target event (shared by v1_hat, the dual's
// variance estimate, and the importance-sampling variant). `prob_of` selects
// the per-draw sampling probability the inclusion terms are built from: x
// under plain sampling, y under importance sampling.
double v1_hat_on(const std::vector<Draw>& obs, std::int64_t n,
                 double (*prob_of)(const Draw&)) {
    KahanSum acc;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double target_i = obs[i].x;
        const double bi = prob_of(obs[i]);
        const double inc_i = inclusion_prob(bi, n);
        for (std::size_t j = i + 1; j < obs.size(); ++j) {
            const double target_j = obs[j].x;
            const double bj = prob_of(obs[j]);
            const double inc_j = inclusion_prob(bj, n);
            // 1/(Ii Ij) - 1/J written as (J - Ii Ij)/(Ii Ij J): the numerator
            // is the covariance kernel, which would cancel away if the two
            // reciprocals were subtracted directly.
            const double excess = joint_excess(bi, bj, n);
            const double joint = inc_i * inc_j + excess;  // P(both observed)
            const double term = target_i * target_j * excess / (inc_i * inc_j * joint);
            acc.add(2.0 * term);  // ordered pairs
        }
        // diagonal: p^2 q^n / (1-q^n)^2
        acc.add(target_i * target_i * survival_pow(bi, n) / (inc_i * inc_i));
    }
    return acc.value();
}

double plain_prob(const Draw& d) { return d.x; }

}  // namespace

EstimateReport pi0(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "pi0");
    const std::size_t n = sample.size();
    const std::size_t k = count_in_event(sample, event);
    const double est = static_cast<double>(k) / static_cast<double>(n);
    EstimateReport r{EstimatorId::pi0, est, est * (1.0 - est) / static_cast<double>(n), n, k, ""};
    return r;
}

double v0_exact(double pi, std::int64_t n) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("v0_exact: pi outside [0,1]");
    if (n < 1) throw std::invalid_argument("v0_exact: n must be >= 1");
    return pi * (1.0 - pi) / static_cast<double>(n);
}

EstimateReport pi0_max(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "pi0_max");
    const std::size_t n = sample.size();
    const std::size_t k = count_in_event(sample, event);
    KahanSum mass;
    for (const Draw& d : observed_in(sample, event)) mass.add(d.x);
    const double rel = static_cast<double>(k) / static_cast<double>(n);
    EstimateReport r{EstimatorId::pi0_max, std::max(rel, mass.value()), std::nullopt, n, k,
                     "biased upward; max of relative frequency and observed event mass"};
    return r;
}

EstimateReport pi1(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "pi1");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    KahanSum acc;
    for (const Draw& d : observed_in(sample, event))
        acc.add(d.x / inclusion_prob(d.x, n));
    EstimateReport r{EstimatorId::pi1, acc.value(), v1_hat(sample, event),
                     sample.size(), count_in_event(sample, event), ""};
    return r;
}

double v1_exact_grouped(std::span<const WeightGroup> groups, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("v1_exact: n must be >= 1");
    KahanSum acc;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& [pi_i, ci] = groups[i];
        if (pi_i <= 0.0) continue;
        const double inc_i = inclusion_prob(pi_i, n);
        for (std::size_t j = 0; j < groups.size(); ++j) {
            const auto& [pj, cj] = groups[j];
            if (pj <= 0.0) continue;
            const double inc_j = inclusion_prob(pj, n);
            acc.add(ci * cj * pi_i * pj * joint_excess(pi_i, pj, n) / (inc_i * inc_j));
        }
        acc.add(ci * pi_i * pi_i * single_excess(pi_i, n) / (inc_i * inc_i));
    }
    return acc.value();
}

double v1_exact(const DiscreteDistribution& dist, const Event& event, std::int64_t n) {
    event.validate_against(dist);
    return v1_exact_grouped(event_groups(dist, event), n);
}

AsymptoticV1 v1_asymptotic_bound_grouped(std::span<const WeightGroup> groups, std::int64_t n) {
    double pmin = std::numeric_limits<double>::infinity();
    double pmax = 0.0;
    double m = 0.0;
    KahanSum approx;
    for (const auto& [p, c] : groups) {
        if (p <= 0.0) continue;
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
        m += c;
        approx.add(c * p * p * survival_pow(p, n));
        for (const auto& [p2, c2] : groups) {
            if (p2 <= 0.0) continue;
            approx.add(c * c2 * p * p2 * num::pow_int(1.0 - p - p2, n));
        }
    }
    if (m == 0.0) throw std::invalid_argument("v1_asymptotic_bound: empty event");
    AsymptoticV1 out;
    out.approx = approx.value();
    out.bound = m * m * pmax * pmax * num::pow_int(1.0 - 2.0 * pmin, n) +
                m * pmax * pmax * survival_pow(pmin, n);
    return out;
}

AsymptoticV1 v1_asymptotic_bound(const DiscreteDistribution& dist, const Event& event,
                                 std::int64_t n) {
    event.validate_against(dist);
    return v1_asymptotic_bound_grouped(event_groups(dist, event), n);
}

double v1_equal_mass(const EqualMassSpec& spec) {
    if (spec.m < 1 || spec.n < 1) throw std::invalid_argument("v1_equal_mass: m, n must be >= 1");
    if (!(spec.pi >= 0.0 && spec.pi <= 1.0))
        throw std::invalid_argument("v1_equal_mass: pi outside [0,1]");
    if (spec.pi == 0.0) return 0.0;
    const double m = static_cast<double>(spec.m);
    const std::int64_t n = spec.n;
    const double per = spec.pi / m;
    const double qn = survival_pow(per, n);
    const double inc = inclusion_prob(per, n);
    const double numer = (m - 1.0) * num::pow_int(1.0 - 2.0 * per, n) - m * qn * qn + qn;
    return spec.pi * spec.pi * numer / (m * inc * inc);
}

double est_sum_p2qn(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "est_sum_p2qn");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    KahanSum acc;
    for (const Draw& d : observed_in(sample, event))
        acc.add(d.x * d.x * survival_pow(d.x, n) / inclusion_prob(d.x, n));
    return acc.value();
}

double v1_hat(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "v1_hat");
    return v1_hat_on(observed_in(sample, event), static_cast<std::int64_t>(sample.size()),
                     plain_prob);
}

EstimateReport pi1_dual(const ProbabilitySample& sample, const EventQuery& event,
                        bool dist_support_unknown) {
    require_nonempty(sample, "pi1_dual");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    const std::vector<Draw> out_obs = observed_out(sample, event);
    KahanSum acc;
    for (const Draw& d : out_obs) acc.add(d.x / inclusion_prob(d.x, n));
    EstimateReport r{EstimatorId::pi1_dual, 1.0 - acc.value(),
                     v1_hat_on(out_obs, n, plain_prob), sample.size(),
                     count_in_event(sample, event), ""};
    if (dist_support_unknown)
        r.notes = "support unknown: dual estimate assumes all complement mass was observable";
    return r;
}

EstimateReport pi1_combined(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "pi1_combined");
    const EstimateReport r0 = pi0(sample, event);
    const EstimateReport r1 = pi1(sample, event);
    const EstimateReport rd = pi1_dual(sample, event);

    double wsum = 0.0, esum = 0.0;
    int used = 0;
    auto include = [&](const EstimateReport& r) {
        if (!r.variance_estimate) return;
        const double v = *r.variance_estimate;
        if (!std::isfinite(v) || v <= 0.0) return;
        wsum += 1.0 / v;
        esum += r.estimate / v;
        ++used;
    };
    include(r0);
    include(r1);
    include(rd);

    EstimateReport out{EstimatorId::pi1_combined, 0.0, std::nullopt, sample.size(), r0.k, ""};
    if (used == 0) {
        out.estimate = r1.estimate;
        out.notes = "all component variance estimates degenerate; fell back to pi1";
        return out;
    }
    out.estimate = esum / wsum;
    out.notes = "components used: " + std::to_string(used) + " of 3";
    return out;
}

EstimateReport mu1(const ProbabilitySample& sample, const MeanProblem& problem) {
    require_nonempty(sample, "mu1");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    KahanSum acc;
    for (const Draw& d : observed_set(sample)) {
        auto it = problem.values.find(d.outcome);
        if (it == problem.values.end())
            throw std::invalid_argument("mu1: observable undefined for outcome " +
                                        std::to_string(d.outcome));
        acc.add(d.x * (it->second - problem.xi) / inclusion_prob(d.x, n));
    }
    EstimateReport r{EstimatorId::mu1, problem.xi + acc.value(), std::nullopt,
                     sample.size(), 0, ""};
    return r;
}

namespace {

// Shared accumulation for var_mu1_exact and optimal_xi. Computes the
// centered pair sums
//   S[a] = sum_{w,w'} p X^a p' X'^b kernel(w,w')   and the diagonal sums
//   D[a] = sum_w p^2 X^a single_kernel(w)
// needed by both the variance at fixed xi and its minimizer.
struct MuSums {
    double s_xx = 0, s_x1 = 0, s_11 = 0;  // pair sums weighted by XX', X, 1
    double d_xx = 0, d_x1 = 0, d_11 = 0;  // diagonal sums weighted by X^2, X, 1
    double mu = 0;
};

MuSums mu_sums(const DiscreteDistribution& dist,
               const std::unordered_map<OutcomeId, double>& values, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("mu sums: n must be >= 1");
    const std::size_t d = dist.size();
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) {
        auto it = values.find(dist.outcome(i));
        if (it == values.end())
            throw std::invalid_argument("observable undefined for outcome " +
                                        std::to_string(dist.outcome(i)));
        x[i] = it->second;
    }
    MuSums s;
    KahanSum mu, sxx, sx1, s11, dxx, dx1, d11;
    for (std::size_t i = 0; i < d; ++i) {
        const double pi_i = dist.weight(i);
        if (pi_i <= 0.0) continue;
        mu.add(pi_i * x[i]);
        const double inc_i = inclusion_prob(pi_i, n);
        for (std::size_t j = 0; j < d; ++j) {
            const double pj = dist.weight(j);
            if (pj <= 0.0) continue;
            const double kern =
                pi_i * pj * joint_excess(pi_i, pj, n) / (inc_i * inclusion_prob(pj, n));
            sxx.add(kern * x[i] * x[j]);
            sx1.add(kern * x[i]);
            s11.add(kern);
        }
        const double diag = pi_i * pi_i * single_excess(pi_i, n) / (inc_i * inc_i);
        dxx.add(diag * x[i] * x[i]);
        dx1.add(diag * x[i]);
        d11.add(diag);
    }
    s.mu = mu.value();
    s.s_xx = sxx.value(); s.s_x1 = sx1.value(); s.s_11 = s11.value();
    s.d_xx = dxx.value(); s.d_x1 = dx1.value(); s.d_11 = d11.value();
    return s;
}

}  // namespace

double var_mu1_exact(const DiscreteDistribution& dist,
                     const std::unordered_map<OutcomeId, double>& values, std::int64_t n,
                     double xi) {
    const MuSums s = mu_sums(dist, values, n);
    return (s.s_xx - 2.0 * xi * s.s_x1 + xi * xi * s.s_11) +
           (s.d_xx - 2.0 * xi * s.d_x1 + xi * xi * s.d_11);
}

double optimal_xi(const DiscreteDistribution& dist,
                  const std::unordered_map<OutcomeId, double>& values, std::int64_t n) {
    const MuSums s = mu_sums(dist, values, n);
    const double num = s.s_x1 + s.d_x1;
    const double den = s.s_11 + s.d_11;
    if (den == 0.0)
        throw std::domain_error("optimal_xi: degenerate problem (variance independent of xi)");
    return num / den;
}

EstimateReport pi1_cv(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "pi1_cv");
    const std::int64_t n = static_cast<std::int64_t>(sample.size());
    KahanSum covered;
    for (const Draw& d : observed_set(sample))
        covered.add(d.x / inclusion_prob(d.x, n));
    const EstimateReport r0 = pi0(sample, event);
    const EstimateReport r1 = pi1(sample, event);
    EstimateReport r{EstimatorId::pi1_cv,
                     r1.estimate + (1.0 - covered.value()) * r0.estimate, std::nullopt,
                     sample.size(), r0.k,
                     "control-variate form with plug-in reference point pi0; not exactly unbiased"};
    return r;
}

EstimateReport pi2(const ProbabilitySample& sample, const EventQuery& event) {
    require_nonempty(sample, "pi2");
    KahanSum inv;
    std::size_t k = 0;
    for (const Draw& d : sample.draws()) {
        if (!event.contains(d.outcome)) continue;
        ++k;
        inv.add(1.0 / d.x);
    }
    if (k == 0)
        throw NoInformationError("pi2: no draw fell in the event; harmonic-mean estimate undefined");
    const double m = static_cast<double>(event.cardinality());
    EstimateReport r{EstimatorId::pi2, m * static_cast<double>(k) / inv.value(), std::nullopt,
                     sample.size(), k, ""};
    if (k >= 2) r.variance_estimate = v2_jackknife(sample, event);
    else r.notes = "k = 1: jackknife variance estimate unavailable";
    return r;
}

double v2_exact(const DiscreteDistribution& dist, const Event& event, std::int64_t k) {
    if (k < 1) throw std::invalid_argument("v2_exact: k must be >= 1");
    event.validate_against(dist);
    const double m = static_cast<double>(event.cardinality());
    KahanSum pi_acc, inv_acc;
    for (OutcomeId id : event.members()) {
        const double p = dist.prob(id);
        if (p == 0.0) return std::numeric_limits<double>::infinity();
        pi_acc.add(p);
        inv_acc.add(1.0 / p);
    }
    const double pi = pi_acc.value();
    // sum over A of 1/p' with p' = p/pi equals pi * sum 1/p
    return pi * pi / (m * m * static_cast<double>(k)) * (pi * inv_acc.value() - m * m);
}

double v2_jackknife(const ProbabilitySample& sample, const EventQuery& event,
                    JackknifeForm form) {
    std::vector<double> xs;
    for (const Draw& d : sample.draws())
        if (event.contains(d.outcome)) xs.push_back(d.x);
    const std::size_t k = xs.size();
    if (k < 2) throw std::invalid_argument("v2_jackknife: needs at least two event draws");

    KahanSum inv;
    for (double x : xs) inv.add(1.0 / x);
    const double w = inv.value();
    const double xi_hat = static_cast<double>(k) / w;
    const double m = static_cast<double>(event.cardinality());

    KahanSum dev;
    if (form == JackknifeForm::exact) {
        for (double x : xs) {
            const double loo = (static_cast<double>(k) - 1.0) / (w - 1.0 / x);
            dev.add((xi_hat - loo) * (xi_hat - loo));
        }
        return m * m * (static_cast<double>(k) - 1.0) / static_cast<double>(k) * dev.value();
    }
    for (double x : xs) {
        const double t = 1.0 - xi_hat / x;
        dev.add(t * t);
    }
    const double kk = static_cast<double>(k);
    return m * m * (kk - 1.0) / (kk * kk * kk) * dev.value() * xi_hat * xi_hat;
}

}  // namespace probest::estimators
