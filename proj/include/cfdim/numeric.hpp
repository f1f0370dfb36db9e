#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <gmpxx.h>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace cfdim {

using Integer = mpz_class;
using Rational = mpq_class;

// 50 significant decimal digits with a wide exponent range; masses of deep
// Cantor nodes underflow double.
using HighReal = boost::multiprecision::cpp_bin_float_50;

// Natural log of a positive big integer without overflowing double.
inline double log_of(const Integer& z) {
    if (sgn(z) <= 0) {
        return -std::numeric_limits<double>::infinity();
    }
    long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

inline double log_of(const Rational& q) {
    return log_of(q.get_num()) - log_of(q.get_den());
}

inline double to_double(const Rational& q) {
    return q.get_d();
}

// Exact dyadic value of a finite double.
inline Rational rational_from_double(double x) {
    Rational q(x);
    q.canonicalize();
    return q;
}

inline HighReal to_high(const Integer& z) {
    return HighReal(z.get_str());
}

inline HighReal to_high(const Rational& q) {
    return to_high(q.get_num()) / to_high(q.get_den());
}

// Exact binary value of a finite HighReal.
inline Rational rational_from_high(const HighReal& x) {
    if (x == 0) {
        return Rational(0);
    }
    int exp2 = 0;
    HighReal m = boost::multiprecision::frexp(boost::multiprecision::abs(x), &exp2);
    // Peel the mantissa off in 60-bit chunks; three chunks cover all of it.
    Integer mant = 0;
    for (int i = 0; i < 3; ++i) {
        m = boost::multiprecision::ldexp(m, 60);
        const HighReal chunk = boost::multiprecision::floor(m);
        mant = (mant << 60) + Integer(std::to_string(chunk.convert_to<unsigned long long>()));
        m -= chunk;
    }
    Rational r(mant);
    const long shift = static_cast<long>(exp2) - 180;
    if (shift >= 0) {
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(shift));
    } else {
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-shift));
    }
    r.canonicalize();
    return x < 0 ? Rational(-r) : r;
}

inline Integer integer_from_high(const HighReal& x) {
    // x must already be integral.
    return rational_from_high(x).get_num();
}

inline Integer ceil_integer(const HighReal& x) {
    return integer_from_high(boost::multiprecision::ceil(x));
}

inline Integer floor_integer(const HighReal& x) {
    return integer_from_high(boost::multiprecision::floor(x));
}

inline Integer pow_integer(const Integer& base, unsigned long exp) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

inline Rational pow_rational(const Rational& base, unsigned long exp) {
    Integer num = pow_integer(base.get_num(), exp);
    Integer den = pow_integer(base.get_den(), exp);
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Integer ceil_integer(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer floor_integer(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

} // namespace cfdim
