#ifndef PROBEST_NUMERIC_HPP
#define PROBEST_NUMERIC_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

// Low-level kernels shared by the estimator and analytic-chain code.
//
// Powers of survival probabilities are evaluated through expm1/log1p so that
// quantities like (1-p)^n and 1-(1-p)^n keep full relative precision for
// small p and large n, where naive powering rounds to 1 or 0.

namespace probest::num {

// b^n for integer n >= 0; b may be negative or zero.
inline double pow_int(double base, std::int64_t n) {
    if (n == 0) return 1.0;
    if (base == 0.0) return 0.0;
    double mag = std::exp(static_cast<double>(n) * std::log(std::abs(base)));
    return (base < 0.0 && (n & 1)) ? -mag : mag;
}

// (1-p)^n
inline double survival_pow(double p, std::int64_t n) {
    if (n == 0) return 1.0;
    if (p >= 1.0) return 0.0;
    return std::exp(static_cast<double>(n) * std::log1p(-p));
}

// 1 - (1-p)^n, the probability that an outcome of probability p
// appears at least once among n iid draws.
inline double inclusion_prob(double p, std::int64_t n) {
    if (n == 0) return 0.0;
    if (p >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}

// (1-pa-pb)^n - (1-pa)^n (1-pb)^n.
// This is the covariance kernel E[1a 1b] - E[1a]E[1b] of the joint
// inclusion indicators, written so both branches stay accurate when the
// two power terms agree to many digits.
inline double joint_excess(double pa, double pb, std::int64_t n) {
    if (n == 0) return 0.0;
    if (pa == 0.0 || pb == 0.0) return 0.0;
    const double s = pa + pb;
    const double qq = survival_pow(pa, n) * survival_pow(pb, n);
    if (s < 1.0) {
        const double log_ratio = std::log1p(-s) - std::log1p(-pa) - std::log1p(-pb);
        return qq * std::expm1(static_cast<double>(n) * log_ratio);
    }
    return pow_int(1.0 - s, n) - qq;
}

// (1-p)^n - (1-2p)^n, the diagonal kernel of the exact variance of the
// inclusion-weighted estimator.
inline double single_excess(double p, std::int64_t n) {
    if (n == 0 || p == 0.0) return 0.0;
    const double v = 1.0 - 2.0 * p;
    if (v > 0.0) {
        const double log_ratio = std::log1p(-2.0 * p) - std::log1p(-p);
        return -survival_pow(p, n) * std::expm1(static_cast<double>(n) * log_ratio);
    }
    return survival_pow(p, n) - pow_int(v, n);
}

// Compensated accumulator for long sums of small weighted terms.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Binomial coefficient as a double (multiplicities can exceed 2^64 in the
// long analytic tail sums).
inline double binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double r = 1.0;
    for (std::int64_t i = 1; i <= k; ++i)
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// Exact binomial coefficient; throws if the value cannot fit in 64 bits.
inline std::uint64_t binomial_u64(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;  // wide intermediates: r * (n-k+i) can top 2^64
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
        if (r > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("binomial_u64: coefficient exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

// Gauss series for 2F1(1, b; c; x), |x| < 1, c not a nonpositive integer.
// Terms may grow before they decay (b > c), so termination requires the
// term ratio to fall below one first.
inline double hyp2f1_1bc(double b, double c, double x, double rel_tol = 1e-15) {
    if (x == 0.0) return 1.0;
    KahanSum acc;
    double term = 1.0;
    acc.add(term);
    for (std::int64_t k = 0; k < 20'000'000; ++k) {
        const double ratio = (b + static_cast<double>(k)) / (c + static_cast<double>(k)) * x;
        term *= ratio;
        acc.add(term);
        if (std::abs(ratio) < 1.0 && std::abs(term) < rel_tol * std::abs(acc.value()))
            return acc.value();
    }
    return acc.value();  // |x| >= 1 never reaches here under the stated preconditions
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream seed for replication `index` under `master`; fixed function so
// results do not depend on scheduling.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0xA0761D6478BD642FULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

// mt19937_64 with a fixed uint64 -> [0,1) mapping. std::uniform_real_distribution
// is implementation-defined, so it is avoided for reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t raw() { return eng_(); }
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t len,
                             std::uint64_t seed = 0xCBF29CE484222325ULL) {
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace probest::num

#endif
