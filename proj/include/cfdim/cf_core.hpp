#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace cfdim {

// Partial quotients (a_1, ..., a_n), every entry >= 1. The empty sequence is
// the root cylinder [0, 1).
class DigitSeq {
public:
    DigitSeq() = default;

    explicit DigitSeq(std::vector<Integer> digits) : digits_(std::move(digits)) {
        for (const auto& a : digits_) {
            check(a);
        }
    }

    DigitSeq(std::initializer_list<long> digits) {
        digits_.reserve(digits.size());
        for (long a : digits) {
            push_back(Integer(a));
        }
    }

    void push_back(Integer a) {
        check(a);
        digits_.push_back(std::move(a));
    }

    void pop_back() { digits_.pop_back(); }

    std::size_t size() const { return digits_.size(); }
    bool empty() const { return digits_.empty(); }

    // 1-based access matching the a_k notation.
    const Integer& at(std::size_t k) const { return digits_.at(k - 1); }

    const Integer& operator[](std::size_t i) const { return digits_[i]; }
    const Integer& back() const { return digits_.back(); }

    std::span<const Integer> view() const { return digits_; }
    auto begin() const { return digits_.begin(); }
    auto end() const { return digits_.end(); }

    DigitSeq prefix(std::size_t n) const {
        if (n > digits_.size()) {
            throw LengthError("prefix of length " + std::to_string(n) + " requested from " +
                              std::to_string(digits_.size()) + " digits");
        }
        return DigitSeq(std::vector<Integer>(digits_.begin(),
                                             digits_.begin() + static_cast<std::ptrdiff_t>(n)));
    }

    DigitSeq appended(const Integer& a) const {
        DigitSeq out = *this;
        out.push_back(a);
        return out;
    }

    friend bool operator==(const DigitSeq& a, const DigitSeq& b) {
        return a.digits_ == b.digits_;
    }

    std::vector<std::string> to_strings() const {
        std::vector<std::string> out;
        out.reserve(digits_.size());
        for (const auto& a : digits_) {
            out.push_back(a.get_str());
        }
        return out;
    }

private:
    static void check(const Integer& a) {
        if (a < 1) {
            throw DomainError("partial quotients must be >= 1");
        }
    }

    std::vector<Integer> digits_;
};

struct Convergent {
    std::size_t index = 0;
    Integer p;
    Integer q;
};

// Interval with exact rational endpoints.
struct IntervalQ {
    Rational lo;
    Rational hi;
    bool closed_lo = true;
    bool closed_hi = false;

    Rational length() const { return hi - lo; }

    bool contains(const Rational& x) const {
        const bool above = closed_lo ? x >= lo : x > lo;
        const bool below = closed_hi ? x <= hi : x < hi;
        return above && below;
    }

    // Containment of another interval, respecting open/closed ends.
    bool contains(const IntervalQ& other) const {
        const bool left = other.lo > lo || (other.lo == lo && (closed_lo || !other.closed_lo));
        const bool right = other.hi < hi || (other.hi == hi && (closed_hi || !other.closed_hi));
        return left && right;
    }

    bool disjoint(const IntervalQ& other) const {
        if (hi < other.lo || other.hi < lo) {
            return true;
        }
        if (hi == other.lo) {
            return !(closed_hi && other.closed_lo);
        }
        if (other.hi == lo) {
            return !(other.closed_hi && closed_lo);
        }
        return false;
    }
};

// Continuant q_n of a digit block, with q_0 = 1.
inline Integer continuant(std::span<const Integer> digits) {
    Integer prev = 0;
    Integer cur = 1;
    for (const auto& a : digits) {
        Integer next = a * cur + prev;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

inline Integer continuant(const DigitSeq& seq) {
    return continuant(seq.view());
}

// (p_0, q_0) = (0, 1), (p_1, q_1) = (1, a_1), then
// p_k = a_k p_{k-1} + p_{k-2}, q_k = a_k q_{k-1} + q_{k-2}.
inline std::vector<Convergent> convergents(const DigitSeq& seq) {
    std::vector<Convergent> out;
    out.reserve(seq.size() + 1);
    out.push_back({0, Integer(0), Integer(1)});
    Integer p_prev = 1; // p_{-1}
    Integer q_prev = 0; // q_{-1}
    for (std::size_t k = 1; k <= seq.size(); ++k) {
        const Integer& a = seq.at(k);
        const Convergent& last = out.back();
        Integer p = a * last.p + p_prev;
        Integer q = a * last.q + q_prev;
        p_prev = last.p;
        q_prev = last.q;
        out.push_back({k, std::move(p), std::move(q)});
    }
    return out;
}

// Value of the finite continued fraction [a_1, ..., a_n].
inline Rational evaluate(const DigitSeq& seq) {
    if (seq.empty()) {
        return Rational(0);
    }
    const auto conv = convergents(seq);
    Rational r(conv.back().p, conv.back().q);
    r.canonicalize();
    return r;
}

// Canonical expansion: rationals terminate with a last digit >= 2, x = 0 is
// the empty sequence.
inline DigitSeq expand(const Rational& x, std::size_t max_digits) {
    if (x < 0 || x >= 1) {
        throw DomainError("expand requires 0 <= x < 1");
    }
    DigitSeq out;
    Integer num = x.get_num();
    Integer den = x.get_den();
    while (sgn(num) != 0 && out.size() < max_digits) {
        Integer a;
        Integer r;
        mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t(), num.get_mpz_t());
        out.push_back(a);
        den = std::move(num);
        num = std::move(r);
    }
    return out;
}

// I_n(a_1..a_n): [p_n/q_n, (p_n+p_{n-1})/(q_n+q_{n-1})) for even n, the
// mirrored half-open interval for odd n.
inline IntervalQ cylinder(const DigitSeq& seq) {
    if (seq.empty()) {
        return {Rational(0), Rational(1), true, false};
    }
    const auto conv = convergents(seq);
    const auto& cn = conv[seq.size()];
    const auto& cm = conv[seq.size() - 1];
    Rational a(cn.p, cn.q);
    Rational b(cn.p + cm.p, cn.q + cm.q);
    a.canonicalize();
    b.canonicalize();
    // p_n/q_n belongs to the cylinder only when it is the canonical expansion
    // (last digit >= 2); with a_n = 1 it equals [a_1, ..., a_{n-1} + 1].
    const bool own_endpoint = seq.back() >= 2;
    if (seq.size() % 2 == 0) {
        return {a, b, own_endpoint, false};
    }
    return {b, a, false, own_endpoint};
}

// Exact |I_n| = 1 / (q_n (q_n + q_{n-1})).
inline Rational cylinder_length(const DigitSeq& seq) {
    const auto conv = convergents(seq);
    if (seq.empty()) {
        return Rational(1);
    }
    const auto& qn = conv[seq.size()].q;
    const auto& qm = conv[seq.size() - 1].q;
    Rational r(Integer(1), qn * (qn + qm));
    r.canonicalize();
    return r;
}

// Gauss measure (1/log 2) log((1+hi)/(1+lo)).
inline double gauss_measure(const IntervalQ& iv) {
    if (iv.lo < 0 || iv.hi > 1 || iv.hi < iv.lo) {
        throw DomainError("gauss_measure requires an interval inside [0, 1]");
    }
    const Rational ratio = (iv.hi - iv.lo) / (1 + iv.lo);
    return std::log1p(ratio.get_d()) / std::log(2.0);
}

// Open dyadic interval (center - 2^-bits, center + 2^-bits).
struct RealSample {
    Rational center;
    unsigned long precision_bits = 1;

    Rational half_width() const {
        Rational h(Integer(1), pow_integer(Integer(2), precision_bits));
        return h;
    }

    Rational lo() const { return center - half_width(); }
    Rational hi() const { return center + half_width(); }

    // The open cell (m / 2^bits, (m + 1) / 2^bits) that a uniform real falls in
    // after its first `bits` binary digits m are known.
    static RealSample from_grid_cell(const Integer& m, unsigned long bits) {
        if (bits == 0 || m < 0 || m >= pow_integer(Integer(2), bits)) {
            throw DomainError("grid cell outside [0, 1)");
        }
        Rational c(2 * m + 1, pow_integer(Integer(2), bits + 1));
        c.canonicalize();
        return {c, bits + 1};
    }
};

namespace detail {

// Endpoint fraction num/den of the open interval being iterated.
struct Endpoint {
    Integer num;
    Integer den;
};

} // namespace detail

// Digits shared by every real in the open sample interval, up to max_digits.
// Iterates the Gauss map on the interval with exact endpoints: digit a is
// certified when the interval lies in (1/(a+1), 1/a], and the image
// (1/hi - a, 1/lo - a) is carried forward.
inline DigitSeq certified_prefix(const RealSample& sample, std::size_t max_digits) {
    const Rational lo_q = sample.lo();
    const Rational hi_q = sample.hi();
    if (lo_q < 0 || hi_q > 1) {
        throw DomainError("sample interval must lie inside [0, 1]");
    }
    detail::Endpoint lo{lo_q.get_num(), lo_q.get_den()};
    detail::Endpoint hi{hi_q.get_num(), hi_q.get_den()};
    DigitSeq out;
    Integer a;
    Integer r;
    Integer lower_bound_check;
    while (out.size() < max_digits) {
        if (sgn(lo.num) == 0) {
            break; // interval reaches 0: unbounded digits
        }
        // a = floor(1/hi) = floor(hi.den / hi.num)
        mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), hi.den.get_mpz_t(), hi.num.get_mpz_t());
        // need lo >= 1/(a+1)  <=>  lo.num * (a+1) >= lo.den
        lower_bound_check = lo.num * (a + 1);
        if (lower_bound_check < lo.den) {
            break;
        }
        // hi <= 1/a holds by choice of a. New interval (1/hi - a, 1/lo - a).
        detail::Endpoint new_lo{r, hi.num};
        detail::Endpoint new_hi{lo.den - a * lo.num, lo.num};
        out.push_back(a);
        lo = std::move(new_lo);
        hi = std::move(new_hi);
    }
    return out;
}

// First n certified digits, or nullopt when the interval straddles a cylinder
// boundary before n digits are certified (caller should refine the sample).
inline std::optional<DigitSeq> expand_certified(const RealSample& sample, std::size_t n) {
    if (n == 0) {
        throw DomainError("expand_certified requires n >= 1");
    }
    DigitSeq d = certified_prefix(sample, n);
    if (d.size() < n) {
        return std::nullopt;
    }
    return d;
}

} // namespace cfdim
