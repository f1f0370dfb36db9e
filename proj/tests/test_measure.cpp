#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "cfdim/measure.hpp"
#include "oracles.hpp"

using namespace cfdim;

namespace {

const double kZeta2 = std::acos(-1.0) * std::acos(-1.0) / 6.0;

// zeta(2)^d minus the finite sum over tuples with product below K.
double tail_reference(int d, long K) {
    double below = 0.0;
    std::function<void(int, long, double)> rec = [&](int depth, long prod, double w) {
        if (depth == d) {
            below += w;
            return;
        }
        for (long x = 1; prod * x < K; ++x) {
            rec(depth + 1, prod * x, w / (static_cast<double>(x) * x));
        }
    };
    rec(0, 1, 1.0);
    return std::pow(kZeta2, d) - below;
}

DigitSeq seq(std::initializer_list<long> v) {
    return DigitSeq(v);
}

} // namespace

TEST(TailSum, SingleDigitAnchors) {
    const TailSum t = tail_sum(1, 2);
    EXPECT_NEAR(t.value, kZeta2 - 1.0, 1e-12);
    EXPECT_NEAR(t.value, 0.6449341, 1e-7);
    EXPECT_NEAR(t.ratio, 1.2898681, 1e-7);
    EXPECT_NEAR(tail_sum(1, 3).value, kZeta2 - 1.25, 1e-12);
    EXPECT_NEAR(tail_sum(1, 1).value, kZeta2, 1e-12);
}

TEST(TailSum, PairAnchors) {
    EXPECT_NEAR(tail_sum(2, 2).value, kZeta2 * kZeta2 - 1.0, 1e-12);
    EXPECT_NEAR(tail_sum(2, 2).value, 1.7058081, 1e-7);
    EXPECT_NEAR(tail_sum(2, 3).value, kZeta2 * kZeta2 - 1.5, 1e-12);
}

TEST(TailSum, MatchesFiniteComplement) {
    for (int d = 1; d <= 3; ++d) {
        for (long K : {5L, 17L, 100L, 1000L}) {
            EXPECT_NEAR(tail_sum(d, static_cast<double>(K)).value, tail_reference(d, K), 1e-10)
                << d << " " << K;
        }
    }
}

TEST(TailSum, RatioStaysBounded) {
    for (int d = 2; d <= 3; ++d) {
        double lo = 1e300;
        double hi = 0.0;
        for (double K : {1e2, 1e3, 1e4}) {
            const double r = tail_sum(d, K).ratio;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        EXPECT_LE(hi / lo, 2.0) << d;
    }
}

TEST(TailSum, BudgetAndDomain) {
    EXPECT_THROW(tail_sum(0, 5), DomainError);
    EXPECT_THROW(tail_sum(2, 0.5), DomainError);
    EXPECT_THROW(tail_sum(5, 10), BudgetExceeded);
    EXPECT_THROW(tail_sum(2, 1e6), BudgetExceeded);
}

TEST(LevelMeasure, SingleDigitContainsExactMeasure) {
    for (int K = 2; K <= 100; ++K) {
        const MeasureBracket b = level_set_measure(1, 1, K);
        const double exact = 1.0 / std::ceil(static_cast<double>(K));
        EXPECT_LE(b.lower, exact) << K;
        EXPECT_GE(b.upper, exact) << K;
    }
}

TEST(LevelMeasure, PairContainsExhaustiveCylinderMeasure) {
    // {a_1 a_3 >= 2} is the complement of {a_1 = 1, a_3 = 1}; sum the depth-3
    // cylinders (1, a_2, 1) for a_2 <= 1000 and bound the rest.
    mpq_class inside = 0;
    for (long a2 = 1; a2 <= 1000; ++a2) {
        inside += oracle::cylinder_length({mpz_class(1), mpz_class(a2), mpz_class(1)});
    }
    // remaining cylinders lie inside the cylinder of (1) with a_2 > 1000
    const double rest = oracle::cylinder_length({mpz_class(1)}).get_d() * 2.0 / 1001.0;
    const double measure_hi = 1.0 - inside.get_d();
    const double measure_lo = measure_hi - rest;
    const MeasureBracket b = level_set_measure(2, 2, 2);
    EXPECT_LE(b.lower, measure_lo);
    EXPECT_GE(b.upper, measure_hi);
}

TEST(LevelMeasure, BracketSanity) {
    for (int d = 1; d <= 3; ++d) {
        for (double K : {1.0, 2.0, 37.5, 1e3, 1e7, 1e12}) {
            const MeasureBracket b = level_set_measure(d, 5, K);
            EXPECT_LE(b.lower, b.upper);
            EXPECT_GE(b.lower, 0.0);
            EXPECT_LE(b.upper, 1.0);
        }
    }
    EXPECT_THROW(level_set_measure(4, 1, 10), DomainError);
    EXPECT_THROW(level_set_measure(2, 0, 10), DomainError);
}

TEST(SeriesTest, Classification) {
    EXPECT_EQ(series_test(2, PhiDescriptor::pow(2)), SeriesVerdict::Convergent);
    EXPECT_EQ(series_test(1, PhiDescriptor::nlogk(1, 1)), SeriesVerdict::Divergent);
    EXPECT_EQ(series_test(2, PhiDescriptor::nlogk(1, 2)), SeriesVerdict::Divergent);
    EXPECT_EQ(series_test(2, PhiDescriptor::nlogk(1, 3)), SeriesVerdict::Convergent);
    EXPECT_EQ(series_test(2, PhiDescriptor::poly(1, 2)), SeriesVerdict::Convergent);
    EXPECT_EQ(series_test(2, PhiDescriptor::poly(1, 1)), SeriesVerdict::Divergent);
    EXPECT_EQ(series_test(3, PhiDescriptor::doubexp(2, 1)), SeriesVerdict::Convergent);
    EXPECT_EQ(series_test(2, PhiDescriptor::from_table({1, 2, 3})), SeriesVerdict::Unknown);
}

TEST(EventOccurs, ProgressionProducts) {
    const DigitSeq s = seq({1, 2, 3, 4, 5, 6});
    EXPECT_TRUE(event_occurs(s, 2, 2, 8.0));
    EXPECT_FALSE(event_occurs(s, 3, 2, 49.0));
    EXPECT_TRUE(event_occurs(s, 3, 2, 48.0));
    for (int n = 1; n <= 2; ++n) {
        EXPECT_TRUE(event_occurs(s, 3, n, 1.0));
    }
    EXPECT_THROW(event_occurs(s, 3, 3, 1.0), LengthError);
}

TEST(MonteCarlo, ThresholdOneAlwaysHits) {
    const HitStats h = monte_carlo(2, PhiDescriptor::poly(1, 0), 300, 8, 1);
    EXPECT_EQ(h.valid, 300);
    for (double f : h.frac_hit_by) {
        EXPECT_EQ(f, 1.0);
    }
    EXPECT_EQ(h.total_hits, 300 * 8);
}

TEST(MonteCarlo, SameSeedSameStatistics) {
    const auto phi = PhiDescriptor::pow(3);
    const HitStats a = monte_carlo(2, phi, 500, 30, 42);
    const HitStats b = monte_carlo(2, phi, 500, 30, 42);
    EXPECT_EQ(a.per_n_hits, b.per_n_hits);
    EXPECT_EQ(a.first_hit, b.first_hit);
    EXPECT_EQ(a.max_bits_used, b.max_bits_used);
    const HitStats c = monte_carlo(2, phi, 500, 30, 43);
    EXPECT_NE(a.per_n_hits, c.per_n_hits);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
    const auto phi = PhiDescriptor::pow(2);
    setenv("CFDIM_THREADS", "1", 1);
    const HitStats one = monte_carlo(1, phi, 700, 12, 9);
    setenv("CFDIM_THREADS", "4", 1);
    const HitStats four = monte_carlo(1, phi, 700, 12, 9);
    unsetenv("CFDIM_THREADS");
    EXPECT_EQ(one.per_n_hits, four.per_n_hits);
    EXPECT_EQ(one.total_hits_sq, four.total_hits_sq);
}

TEST(MonteCarlo, DigitFrequencyMatchesGaussMeasure) {
    const double p = std::log(1.1) / std::log(2.0);
    const HitStats h = monte_carlo(1, PhiDescriptor::poly(10, 0), 20000, 6, 2024);
    for (long n : {1L, 6L}) {
        EXPECT_NEAR(h.hit_rate(n), n == 1 ? 0.1 : p, 4.0 * h.hit_rate_stderr(n)) << n;
    }
}

TEST(MonteCarlo, FixedPrecisionDropsSamples) {
    MonteCarloOptions opt;
    opt.start_bits = 8;
    opt.adaptive = false;
    const HitStats h = monte_carlo(1, PhiDescriptor::pow(2), 200, 20, 3, opt);
    EXPECT_GT(h.dropped, 0);
    EXPECT_EQ(h.valid + h.dropped, 200);
}

TEST(MonteCarlo, ArgumentChecks) {
    EXPECT_THROW(monte_carlo(0, PhiDescriptor::pow(2), 10, 5, 1), DomainError);
    EXPECT_THROW(monte_carlo(1, PhiDescriptor::from_table({1, 2}), 10, 5, 1), DomainError);
    MonteCarloOptions opt;
    opt.max_bits = 16;
    EXPECT_THROW(monte_carlo(1, PhiDescriptor::pow(2), 10, 5, 1, opt), BudgetExceeded);
}
