#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/trigamma.hpp>

#include "cf_core.hpp"
#include "errors.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "phi.hpp"

namespace cfdim {

struct TailSum {
    double value = 0.0;
    double ratio = 0.0;
};

inline constexpr double kTailSumMaxK = 1e5;
inline constexpr int kTailSumMaxD = 4;

namespace detail {

// tails[m] = sum_{a >= m} a^{-2} for 1 <= m <= top.
inline std::vector<double> one_dim_tails(long top) {
    std::vector<double> tails(static_cast<std::size_t>(top) + 1, 0.0);
    for (long m = 1; m <= top; ++m) {
        tails[m] = boost::math::trigamma(static_cast<double>(m));
    }
    return tails;
}

// sum over d-tuples with product >= K of prod a_i^{-2}.
inline double product_tail(int d, double K, const std::vector<double>& tails, double zeta2) {
    if (K <= 1.0) {
        return std::pow(zeta2, d);
    }
    const long m = static_cast<long>(std::ceil(K));
    if (d == 1) {
        return tails[m];
    }
    // a >= K: every completion counts.
    double acc = std::pow(zeta2, d - 1) * tails[m];
    double head = 0.0;
    for (long a = 1; a < m; ++a) {
        const double ad = static_cast<double>(a);
        head += product_tail(d - 1, K / ad, tails, zeta2) / (ad * ad);
    }
    return acc + head;
}

} // namespace detail

// Sum of prod a_i^{-2} over d-tuples of positive integers with a_1...a_d >= K,
// and its ratio to log^{d-1}(K)/K.
inline TailSum tail_sum(int d, double K) {
    if (d < 1 || !(K >= 1.0)) {
        throw DomainError("tail_sum requires d >= 1 and K >= 1");
    }
    if (d > kTailSumMaxD || K > kTailSumMaxK) {
        throw BudgetExceeded("tail_sum budget is d <= 4, K <= 1e5");
    }
    const double zeta2 = std::acos(-1.0) * std::acos(-1.0) / 6.0;
    const auto tails = detail::one_dim_tails(static_cast<long>(std::ceil(K)));
    TailSum out;
    out.value = detail::product_tail(d, K, tails, zeta2);
    const double scale = (d == 1 ? 1.0 : std::pow(std::log(K), d - 1)) / K;
    out.ratio = scale > 0.0 ? out.value / scale : std::numeric_limits<double>::infinity();
    return out;
}

struct MeasureBracket {
    double lower = 0.0;
    double upper = 1.0;
    double sum_lower = 0.0; // enclosure of the constrained product sum
    double sum_upper = 0.0;
};

// Lebesgue measure of {x : a_{i_1}(x) ... a_{i_d}(x) >= K} for any d distinct
// positions. Given any prefix, P(a_k = a) = (1+r)/((a+r)(a+1+r)) with r in
// [0,1], which lies in [1/(3a^2), 2/a^2]; chaining over the d positions gives
// [S/3^d, 2^d S] with S the constrained product sum. Beyond the tail_sum
// budget S is enclosed by [1/(K+1), e (1 + log K)^d / K].
inline MeasureBracket event_measure_bracket(int d, double K) {
    if (d < 1 || !(K >= 1.0)) {
        throw DomainError("measure bracket requires d >= 1 and K >= 1");
    }
    MeasureBracket out;
    if (d <= kTailSumMaxD && K <= kTailSumMaxK) {
        const double v = tail_sum(d, K).value;
        out.sum_lower = v;
        out.sum_upper = v;
    } else {
        out.sum_lower = 1.0 / (K + 1.0);
        out.sum_upper = std::exp(1.0) * std::pow(1.0 + std::log(K), d) / K;
    }
    out.lower = std::clamp(out.sum_lower / std::pow(3.0, d), 0.0, 1.0);
    out.upper = std::clamp(out.sum_upper * std::pow(2.0, d), 0.0, 1.0);
    return out;
}

// Bracket for the level set {a_1 a_{n+1} ... a_{(d-1)n+1} >= threshold}.
inline MeasureBracket level_set_measure(int d, int n, double threshold) {
    if (d < 1 || d > 3) {
        throw DomainError("level_set_measure supports 1 <= d <= 3");
    }
    if (n < 1) {
        throw DomainError("level_set_measure requires n >= 1");
    }
    return event_measure_bracket(d, std::max(1.0, threshold));
}

enum class SeriesVerdict { Convergent, Divergent, Unknown };

inline std::string to_string(SeriesVerdict v) {
    switch (v) {
    case SeriesVerdict::Convergent:
        return "convergent";
    case SeriesVerdict::Divergent:
        return "divergent";
    case SeriesVerdict::Unknown:
        break;
    }
    return "unknown";
}

// Convergence of sum log^{d-1}Phi(n) / Phi(n).
inline SeriesVerdict series_test(int d, const PhiDescriptor& phi) {
    if (d < 1) {
        throw DomainError("d must be >= 1");
    }
    switch (phi.family) {
    case PhiFamily::Pow:
        // B = 1 gives Phi = 1: the event always holds.
        return phi.p1 > 1.0 ? SeriesVerdict::Convergent : SeriesVerdict::Divergent;
    case PhiFamily::DoubExp:
        return SeriesVerdict::Convergent;
    case PhiFamily::Poly:
        return phi.p2 > 1.0 ? SeriesVerdict::Convergent : SeriesVerdict::Divergent;
    case PhiFamily::NLogK:
        return phi.p2 > d ? SeriesVerdict::Convergent : SeriesVerdict::Divergent;
    case PhiFamily::Table:
        break;
    }
    return SeriesVerdict::Unknown;
}

namespace detail {

inline Integer progression_product(const DigitSeq& seq, int d, long n) {
    if (d < 1 || n < 1) {
        throw DomainError("event requires d >= 1 and n >= 1");
    }
    if (seq.size() < static_cast<std::size_t>(d) * static_cast<std::size_t>(n)) {
        throw LengthError("digit sequence shorter than d*n");
    }
    Integer prod = 1;
    for (int j = 1; j <= d; ++j) {
        prod *= seq.at(static_cast<std::size_t>(j) * n);
    }
    return prod;
}

} // namespace detail

// a_n a_{2n} ... a_{dn} >= threshold, compared exactly.
inline bool event_occurs(const DigitSeq& seq, int d, long n, double threshold) {
    const Integer prod = detail::progression_product(seq, d, n);
    if (!std::isfinite(threshold)) {
        return false;
    }
    return Rational(prod) >= rational_from_double(threshold);
}

inline bool event_occurs(const DigitSeq& seq, int d, long n, const PhiDescriptor& phi) {
    return at_least_phi(detail::progression_product(seq, d, n), phi, n);
}

struct HitStats {
    long samples = 0;       // requested
    long valid = 0;         // certified to d*n_max digits
    long dropped = 0;       // precision budget exceeded
    long n_max = 0;
    std::vector<long> per_n_hits;  // index n-1
    std::vector<long> first_hit;   // index n-1: samples whose first hit is at n
    long never_hit = 0;
    std::vector<double> frac_hit_by; // index n-1
    long total_hits = 0;
    long total_hits_sq = 0; // sum over samples of (hits per sample)^2
    unsigned long start_bits = 0;
    unsigned long max_bits_used = 0;

    double mean_hits() const { return valid > 0 ? static_cast<double>(total_hits) / valid : 0.0; }

    double stderr_hits() const {
        if (valid < 2) {
            return 0.0;
        }
        const double m = mean_hits();
        const double var = (static_cast<double>(total_hits_sq) - valid * m * m) / (valid - 1);
        return std::sqrt(std::max(0.0, var) / valid);
    }

    double hit_rate(long n) const {
        return valid > 0 ? static_cast<double>(per_n_hits.at(n - 1)) / valid : 0.0;
    }

    double hit_rate_stderr(long n) const {
        if (valid < 1) {
            return 0.0;
        }
        const double p = hit_rate(n);
        return std::sqrt(p * (1 - p) / valid);
    }
};

struct MonteCarloOptions {
    unsigned long start_bits = 0; // 0 means ceil(4 d n_max)
    bool adaptive = true;         // double the precision on failure
    unsigned long max_bits = 1ul << 20;
};

namespace detail {

// Prefix-stable stream of uniform bits for one sample.
class BitStream {
public:
    BitStream(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    // Integer formed by the first `bits` bits.
    Integer leading(unsigned long bits) {
        const std::size_t need = (bits + 63) / 64;
        while (words_.size() < need) {
            words_.push_back(engine_());
        }
        Integer z;
        mpz_import(z.get_mpz_t(), need, 1, sizeof(std::uint64_t), 0, 0, words_.data());
        const unsigned long extra = need * 64 - bits;
        if (extra > 0) {
            mpz_fdiv_q_2exp(z.get_mpz_t(), z.get_mpz_t(), extra);
        }
        return z;
    }

private:
    std::mt19937_64 engine_;
    std::vector<std::uint64_t> words_;
};

struct SampleOutcome {
    bool ok = false;
    unsigned long bits = 0;
    std::vector<long> hits; // values of n with the event
};

inline SampleOutcome run_sample(int d, const PhiDescriptor& phi, long n_max, std::uint64_t seed,
                                std::uint64_t index, const MonteCarloOptions& opt,
                                unsigned long start_bits) {
    BitStream stream(seed, index);
    const std::size_t need = static_cast<std::size_t>(d) * static_cast<std::size_t>(n_max);
    unsigned long bits = start_bits;
    SampleOutcome out;
    while (true) {
        const auto sample = RealSample::from_grid_cell(stream.leading(bits), bits);
        const DigitSeq digits = certified_prefix(sample, need);
        if (digits.size() >= need) {
            out.ok = true;
            out.bits = bits;
            for (long n = 1; n <= n_max; ++n) {
                if (event_occurs(digits, d, n, phi)) {
                    out.hits.push_back(n);
                }
            }
            return out;
        }
        if (!opt.adaptive || bits * 2 > opt.max_bits) {
            out.bits = bits;
            return out;
        }
        bits *= 2;
    }
}

} // namespace detail

// Uniform reals drawn bit by bit from a per-sample generator seeded by
// (seed, index); digits are certified before any event is evaluated.
inline HitStats monte_carlo(int d, const PhiDescriptor& phi, long samples, long n_max,
                            std::uint64_t seed, const MonteCarloOptions& opt = {}) {
    if (d < 1 || samples < 1 || n_max < 1) {
        throw DomainError("monte_carlo requires d >= 1, samples >= 1, n_max >= 1");
    }
    if (static_cast<std::size_t>(n_max) > phi.max_index()) {
        throw DomainError("Phi table is shorter than n_max");
    }
    const unsigned long start_bits =
        opt.start_bits > 0 ? opt.start_bits : static_cast<unsigned long>(4L * d * n_max);
    if (start_bits > opt.max_bits) {
        throw BudgetExceeded("starting precision exceeds the precision cap");
    }
    HitStats stats;
    stats.samples = samples;
    stats.n_max = n_max;
    stats.start_bits = start_bits;
    stats.per_n_hits.assign(n_max, 0);
    stats.first_hit.assign(n_max, 0);

    const long chunk = 256;
    const long chunks = (samples + chunk - 1) / chunk;
    auto results = parallel_map(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        std::vector<detail::SampleOutcome> part;
        const long lo = static_cast<long>(c) * chunk;
        const long hi = std::min(samples, lo + chunk);
        part.reserve(hi - lo);
        for (long i = lo; i < hi; ++i) {
            part.push_back(detail::run_sample(d, phi, n_max, seed, static_cast<std::uint64_t>(i), opt,
                                              start_bits));
        }
        return part;
    });
    for (const auto& part : results) {
        for (const auto& s : part) {
            stats.max_bits_used = std::max(stats.max_bits_used, s.bits);
            if (!s.ok) {
                ++stats.dropped;
                continue;
            }
            ++stats.valid;
            for (long n : s.hits) {
                ++stats.per_n_hits[n - 1];
            }
            if (s.hits.empty()) {
                ++stats.never_hit;
            } else {
                ++stats.first_hit[s.hits.front() - 1];
            }
            const long h = static_cast<long>(s.hits.size());
            stats.total_hits += h;
            stats.total_hits_sq += h * h;
        }
    }
    stats.frac_hit_by.assign(n_max, 0.0);
    long cumulative = 0;
    for (long n = 1; n <= n_max; ++n) {
        cumulative += stats.first_hit[n - 1];
        stats.frac_hit_by[n - 1] =
            stats.valid > 0 ? static_cast<double>(cumulative) / stats.valid : 0.0;
    }
    return stats;
}

} // namespace cfdim
