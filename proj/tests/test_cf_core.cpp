#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cfdim/cf_core.hpp"
#include "oracles.hpp"

using namespace cfdim;

namespace {

Rational q(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

DigitSeq to_seq(const std::vector<mpz_class>& v) {
    return DigitSeq(std::vector<Integer>(v.begin(), v.end()));
}

} // namespace

TEST(DigitSeq, RejectsNonPositiveDigits) {
    EXPECT_THROW(DigitSeq({1, 0, 2}), DomainError);
    EXPECT_THROW(DigitSeq(std::vector<Integer>{Integer(-3)}), DomainError);
    DigitSeq s{1, 2};
    EXPECT_THROW(s.push_back(Integer(0)), DomainError);
}

TEST(DigitSeq, OneBasedAccessAndPrefix) {
    DigitSeq s{4, 5, 6};
    EXPECT_EQ(s.at(1), 4);
    EXPECT_EQ(s.at(3), 6);
    EXPECT_EQ(s.prefix(2), (DigitSeq{4, 5}));
    EXPECT_EQ(s.appended(Integer(7)).size(), 4u);
}

TEST(Expand, SmallRational) {
    EXPECT_EQ(expand(q(5, 7), 10), (DigitSeq{1, 2, 2}));
}

TEST(Expand, ZeroHasEmptyExpansion) {
    EXPECT_TRUE(expand(Rational(0), 10).empty());
}

TEST(Expand, RoundTripIsExact) {
    const Rational x = q(461, 900);
    // 461/900 = [1, 1, 19, 1, 21] terminates before six digits
    const DigitSeq first = expand(x, 6);
    EXPECT_EQ(first, (DigitSeq{1, 1, 19, 1, 21}));
    const DigitSeq full = expand(x, 1000);
    EXPECT_EQ(evaluate(full), x);
    EXPECT_EQ(full, first);
    EXPECT_EQ(expand(x, 3), full.prefix(3));
    EXPECT_THROW(full.prefix(6), LengthError);
}

TEST(Expand, RejectsOutOfRange) {
    EXPECT_THROW(expand(Rational(1), 5), DomainError);
    EXPECT_THROW(expand(q(-1, 2), 5), DomainError);
}

TEST(Expand, RandomRationalsRoundTrip) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto digits = oracle::random_digits(rng, 1 + rng() % 30, 1000);
        const Rational x = oracle::backward_value(digits);
        if (x == 1) {
            continue;
        }
        const DigitSeq got = expand(x, 100);
        EXPECT_EQ(evaluate(got), x);
    }
}

TEST(Certified, SampleNearFiveSevenths) {
    // 0.7142857 sits inside I_3(1,2,2) = (7/10, 5/7], about 1.4e-8 below 5/7
    const RealSample sample{q(7142857, 10000000), 60};
    const auto digits = expand_certified(sample, 3);
    ASSERT_TRUE(digits.has_value());
    EXPECT_EQ(*digits, (DigitSeq{1, 2, 2}));
    EXPECT_TRUE(cylinder(*digits).contains(IntervalQ{sample.lo(), sample.hi(), false, false}));
}

TEST(Certified, StraddlingCylinderEndpointIsRejected) {
    const RealSample sample{q(1, 2), 20};
    EXPECT_FALSE(expand_certified(sample, 1).has_value());
}

TEST(Certified, ZeroDigitsRequestedIsAnError) {
    EXPECT_THROW(expand_certified(RealSample{q(1, 3), 30}, 0), DomainError);
}

TEST(Certified, CertifiedCylinderContainsSampleInterval) {
    std::mt19937_64 rng(5);
    gmp_randclass gen(gmp_randinit_mt);
    gen.seed(5);
    for (int trial = 0; trial < 300; ++trial) {
        const unsigned long bits = 20 + rng() % 200;
        const Integer m = gen.get_z_bits(bits);
        const RealSample sample = RealSample::from_grid_cell(m, bits);
        const DigitSeq digits = certified_prefix(sample, 500);
        const IntervalQ open{sample.lo(), sample.hi(), false, false};
        EXPECT_TRUE(cylinder(digits).contains(open));
        // one more digit would split the interval
        if (digits.size() < 500 && sample.lo() > 0) {
            const auto more = expand_certified(sample, digits.size() + 1);
            EXPECT_FALSE(more.has_value());
        }
    }
}

TEST(Continuant, AllOnesGiveFibonacci) {
    const auto conv = convergents(DigitSeq{1, 1, 1, 1, 1});
    const std::vector<long> expected{1, 1, 2, 3, 5, 8};
    ASSERT_EQ(conv.size(), expected.size());
    for (std::size_t i = 0; i < conv.size(); ++i) {
        EXPECT_EQ(conv[i].q, expected[i]);
    }
}

TEST(Continuant, DeterminantOnShortSequence) {
    const auto conv = convergents(DigitSeq{1, 2});
    EXPECT_EQ(conv[2].p, 2);
    EXPECT_EQ(conv[2].q, 3);
    EXPECT_EQ(conv[1].p * conv[2].q - conv[2].p * conv[1].q, 1);
}

TEST(Continuant, ProductBoundsOnRandomSequence) {
    std::mt19937_64 rng(2024);
    const auto digits = oracle::random_digits(rng, 50, 1000);
    const Integer qn = continuant(to_seq(digits));
    Integer lo = 1, hi = 1;
    for (const auto& a : digits) {
        lo *= a;
        hi *= a + 1;
    }
    EXPECT_LE(lo, qn);
    EXPECT_LE(qn, hi);
}

TEST(Continuant, MatchesMatrixProductOracle) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto digits = oracle::random_digits(rng, 1 + rng() % 50, 1000);
        const auto pq = oracle::matrix_convergent(digits);
        const auto conv = convergents(to_seq(digits));
        EXPECT_EQ(conv.back().p, pq.p);
        EXPECT_EQ(conv.back().q, pq.q);
        EXPECT_EQ(conv[conv.size() - 2].q, pq.q_prev);
        EXPECT_EQ(evaluate(to_seq(digits)), oracle::backward_value(digits));
    }
}

TEST(Continuant, ClassicalIdentitiesOnRandomSequences) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto digits = oracle::random_digits(rng, 1 + rng() % 50, 1000);
        EXPECT_EQ(oracle::continuant_identities(digits), "");
    }
}

TEST(Cylinder, SingleDigitTwo) {
    const IntervalQ c = cylinder(DigitSeq{2});
    EXPECT_EQ(c.lo, q(1, 3));
    EXPECT_EQ(c.hi, q(1, 2));
    EXPECT_EQ(cylinder_length(DigitSeq{2}), q(1, 6));
}

TEST(Cylinder, TwoOnes) {
    EXPECT_EQ(cylinder(DigitSeq{1, 1}).length(), q(1, 6));
    EXPECT_EQ(cylinder_length(DigitSeq{1, 1}), q(1, 6));
}

TEST(Cylinder, EmptySequenceIsUnitInterval) {
    const IntervalQ c = cylinder(DigitSeq{});
    EXPECT_EQ(c.lo, 0);
    EXPECT_EQ(c.hi, 1);
}

TEST(Cylinder, ChildrenAreDisjointAndNested) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const DigitSeq parent = to_seq(oracle::random_digits(rng, rng() % 20, 50));
        const IntervalQ pc = cylinder(parent);
        const IntervalQ c1 = cylinder(parent.appended(Integer(1)));
        const IntervalQ c2 = cylinder(parent.appended(Integer(2)));
        EXPECT_TRUE(c1.disjoint(c2));
        EXPECT_TRUE(pc.contains(c1));
        EXPECT_TRUE(pc.contains(c2));
    }
}

TEST(Cylinder, ConvergentEndpointFollowsCanonicalExpansion) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        const DigitSeq seq = to_seq(oracle::random_digits(rng, 1 + rng() % 12, 3));
        const Rational x = evaluate(seq);
        if (x >= 1) {
            continue;
        }
        const DigitSeq canonical = expand(x, 100);
        const bool starts_with = canonical.size() >= seq.size() && canonical.prefix(seq.size()) == seq;
        EXPECT_EQ(cylinder(seq).contains(x), starts_with);
    }
}

TEST(Cylinder, LengthMatchesFormulaAndContainsPoint) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const auto digits = oracle::random_digits(rng, 1 + rng() % 40, 1000);
        const DigitSeq seq = to_seq(digits);
        const IntervalQ c = cylinder(seq);
        EXPECT_EQ(c.length(), oracle::cylinder_length(digits));
        EXPECT_EQ(cylinder_length(seq), oracle::cylinder_length(digits));
        // [0; a_1..a_n, 3] starts with a_1..a_n
        auto extended = digits;
        extended.emplace_back(3);
        EXPECT_TRUE(c.contains(oracle::backward_value(extended)));
    }
}

TEST(GaussMeasure, ClosedForms) {
    EXPECT_NEAR(gauss_measure({Rational(0), Rational(1)}), 1.0, 1e-15);
    EXPECT_NEAR(gauss_measure({Rational(0), q(1, 2)}), std::log(1.5) / std::log(2.0), 1e-15);
    EXPECT_NEAR(gauss_measure({q(1, 3), q(1, 2)}), std::log(9.0 / 8.0) / std::log(2.0), 1e-15);
    EXPECT_NEAR(gauss_measure({q(1, 3), q(1, 2)}), 0.1699250, 1e-7);
}

TEST(GaussMeasure, DigitProbabilitiesSumToOne) {
    double total = 0.0;
    for (long a = 20000; a >= 1; --a) {
        total += gauss_measure(cylinder(DigitSeq{a}));
    }
    total += gauss_measure({Rational(0), q(1, 20001)});
    EXPECT_NEAR(total, 1.0, 1e-12);
}
