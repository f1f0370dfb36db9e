#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "cfdim/phi.hpp"

using namespace cfdim;

namespace {

std::string write_table(const std::string& name, const std::vector<std::string>& lines) {
    const std::string path = ::testing::TempDir() + name;
    std::ofstream out(path);
    for (const auto& l : lines) {
        out << l << '\n';
    }
    return path;
}

} // namespace

TEST(Phi, IntegerPowersAreExact) {
    const PhiDescriptor p = PhiDescriptor::pow(3);
    double expected = 1.0;
    for (long n = 1; n <= 33; ++n) {
        expected *= 3.0;
        EXPECT_EQ(p.value(n), expected) << n;
    }
    EXPECT_EQ(PhiDescriptor::poly(10, 0).value(17), 10.0);
    EXPECT_EQ(PhiDescriptor::poly(1, 2).value(12), 144.0);
}

TEST(Phi, ThresholdComparisonIsExactAtTheBoundary) {
    const PhiDescriptor p = PhiDescriptor::pow(2);
    for (long n = 1; n <= 60; ++n) {
        const Integer two_n = pow_integer(Integer(2), static_cast<unsigned long>(n));
        EXPECT_TRUE(at_least_phi(two_n, p, n));
        EXPECT_FALSE(at_least_phi(two_n - 1, p, n));
    }
}

TEST(Phi, DoubleExponentialStaysInLogSpace) {
    const PhiDescriptor p = PhiDescriptor::doubexp(2.0, 3.0);
    EXPECT_NEAR(p.log_value(2), 4.0 * 9.0 * std::log(2.0), 1e-12);
    EXPECT_TRUE(std::isfinite(p.log_value(200)));
    EXPECT_FALSE(at_least_phi(pow_integer(Integer(10), 1000), p, 10));
}

TEST(Phi, NLogKAtOne) {
    EXPECT_EQ(PhiDescriptor::nlogk(1, 2).log_value(1), -std::numeric_limits<double>::infinity());
    EXPECT_TRUE(at_least_phi(Integer(1), PhiDescriptor::nlogk(1, 2), 1));
    EXPECT_NEAR(PhiDescriptor::nlogk(2, 1).value(10), 20.0 * std::log(10.0), 1e-12);
}

TEST(Phi, FactoriesRejectBadParameters) {
    EXPECT_THROW(PhiDescriptor::pow(0.5), DomainError);
    EXPECT_THROW(PhiDescriptor::doubexp(1.0, 2.0), DomainError);
    EXPECT_THROW(PhiDescriptor::doubexp(2.0, 0.5), DomainError);
    EXPECT_THROW(PhiDescriptor::poly(0.0, 1.0), DomainError);
    EXPECT_THROW(PhiDescriptor::nlogk(1.0, -1.0), DomainError);
    EXPECT_THROW(PhiDescriptor::from_table({}), DomainError);
    EXPECT_THROW(PhiDescriptor::from_table({1.0, -2.0}), DomainError);
    EXPECT_THROW(PhiDescriptor::pow(2).log_value(0), DomainError);
}

TEST(ParsePhi, AllClosedFamilies) {
    EXPECT_EQ(parse_phi("pow:4").family, PhiFamily::Pow);
    EXPECT_EQ(parse_phi("pow:4").p1, 4.0);
    const PhiDescriptor d = parse_phi("doubexp:2.5,3");
    EXPECT_EQ(d.family, PhiFamily::DoubExp);
    EXPECT_EQ(d.p1, 2.5);
    EXPECT_EQ(d.p2, 3.0);
    EXPECT_EQ(parse_phi("poly:1,2").family, PhiFamily::Poly);
    EXPECT_EQ(parse_phi("nlogk:1,2").family, PhiFamily::NLogK);
}

TEST(ParsePhi, MalformedInput) {
    EXPECT_THROW(parse_phi("pow"), DomainError);
    EXPECT_THROW(parse_phi("pow:"), DomainError);
    EXPECT_THROW(parse_phi("pow:abc"), DomainError);
    EXPECT_THROW(parse_phi("pow:2,3"), DomainError);
    EXPECT_THROW(parse_phi("poly:1"), DomainError);
    EXPECT_THROW(parse_phi("gamma:1,2"), DomainError);
    EXPECT_THROW(parse_phi("table:/nonexistent/phi.txt"), DomainError);
}

TEST(ParsePhi, TableFromFile) {
    const std::string path = write_table("phi_table.txt", {"2", "", "4", "8.5"});
    const PhiDescriptor t = parse_phi("table:" + path);
    EXPECT_EQ(t.family, PhiFamily::Table);
    ASSERT_EQ(t.table.size(), 3u);
    EXPECT_EQ(t.value(3), 8.5);
    EXPECT_EQ(t.max_index(), 3u);
    EXPECT_THROW(t.log_value(4), DomainError);
    const std::string bad = write_table("phi_bad.txt", {"2", "x"});
    EXPECT_THROW(parse_phi("table:" + bad), DomainError);
}

TEST(GrowthExponents, ClosedFamilies) {
    const auto p = growth_exponents(PhiDescriptor::pow(4), 100);
    EXPECT_EQ(p.B, 4.0);
    EXPECT_EQ(p.b, 1.0);
    const auto d = growth_exponents(PhiDescriptor::doubexp(std::exp(1.0), 3), 100);
    EXPECT_TRUE(std::isinf(d.B));
    EXPECT_EQ(d.b, 3.0);
    const auto q = growth_exponents(PhiDescriptor::poly(1, 2), 100);
    EXPECT_EQ(q.B, 1.0);
    EXPECT_EQ(q.b, 1.0);
    EXPECT_FALSE(q.estimate);
    EXPECT_THROW(growth_exponents(PhiDescriptor::pow(4), 5), DomainError);
}

TEST(GrowthExponents, TableEstimates) {
    std::vector<double> geometric;
    std::vector<double> quadratic;
    for (int n = 1; n <= 200; ++n) {
        geometric.push_back(std::pow(3.0, n));
        quadratic.push_back(static_cast<double>(n) * n);
    }
    const auto g = growth_exponents(PhiDescriptor::from_table(geometric), 200);
    EXPECT_TRUE(g.estimate);
    EXPECT_NEAR(g.B, 3.0, 1e-9);
    const auto q = growth_exponents(PhiDescriptor::from_table(quadratic), 200);
    EXPECT_LT(q.B, 1.1);
    EXPECT_GE(q.B, 1.0);
}
