#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace cfdim {

namespace detail {

inline void check_d_s(int d, double s) {
    if (d < 1) {
        throw DomainError("d must be >= 1");
    }
    if (!(s >= 0.0 && s <= 1.0)) {
        throw DomainError("s must lie in [0, 1]");
    }
}

inline void check_d_s(int d, const Rational& s) {
    if (d < 1) {
        throw DomainError("d must be >= 1");
    }
    if (s < 0 || s > 1) {
        throw DomainError("s must lie in [0, 1]");
    }
}

} // namespace detail

// g_1 = s, g_n = s g_{n-1} / (1 - s + n g_{n-1}).
inline double g(int d, double s) {
    detail::check_d_s(d, s);
    double v = s;
    for (int n = 2; n <= d; ++n) {
        v = s * v / (1.0 - s + n * v);
    }
    return v;
}

inline Rational g(int d, const Rational& s) {
    detail::check_d_s(d, s);
    Rational v = s;
    for (int n = 2; n <= d; ++n) {
        if (sgn(v) == 0) {
            break;
        }
        v = s * v / (1 - s + n * v);
    }
    v.canonicalize();
    return v;
}

// f_1 = s, f_{k+1} = s f_k / (1 - s + f_k).
inline double f(int d, double s) {
    detail::check_d_s(d, s);
    double v = s;
    for (int k = 1; k < d; ++k) {
        v = s * v / (1.0 - s + v);
    }
    return v;
}

inline Rational f(int d, const Rational& s) {
    detail::check_d_s(d, s);
    Rational v = s;
    for (int k = 1; k < d; ++k) {
        if (sgn(v) == 0) {
            break;
        }
        v = s * v / (1 - s + v);
    }
    v.canonicalize();
    return v;
}

inline double omega(int d, double s) {
    detail::check_d_s(d, s);
    if (s == 0.0) {
        throw DomainError("omega requires s > 0");
    }
    return f(d, s) / g(d, s);
}

// Closed forms re-derived from the recursions:
//   1/g_n = ((1-s)^{n+1} + (2n+1) s^{n+1} - (n+1) s^n) / (s^n (2s-1)^2)
//   f_n   = s^n (2s-1) / (s^n - (1-s)^n)
// Both have a removable singularity at s = 1/2, where g_n = 1/(n(n+1)) and
// f_n = 1/(2n). Inside |s - 1/2| < 1e-6 the recursion is returned instead.
inline double g_closed_form(int d, double s) {
    detail::check_d_s(d, s);
    if (s == 0.0) {
        return 0.0;
    }
    if (std::abs(s - 0.5) < 1e-6) {
        return g(d, s);
    }
    using LD = long double;
    const LD ls = s;
    const LD n = d;
    const LD sn = std::pow(ls, n);
    const LD num = std::pow(1.0L - ls, n + 1) + (2 * n + 1) * sn * ls - (n + 1) * sn;
    const LD den = sn * (2 * ls - 1) * (2 * ls - 1);
    return static_cast<double>(den / num);
}

inline double f_closed_form(int d, double s) {
    detail::check_d_s(d, s);
    if (s == 0.0) {
        return 0.0;
    }
    if (std::abs(s - 0.5) < 1e-6) {
        return f(d, s);
    }
    using LD = long double;
    const LD ls = s;
    const LD sn = std::pow(ls, static_cast<LD>(d));
    const LD tn = std::pow(1.0L - ls, static_cast<LD>(d));
    return static_cast<double>(sn * (2 * ls - 1) / (sn - tn));
}

struct AlphaSequence {
    std::vector<double> values; // A_1, ..., A_d
    double s = 0.0;
    double B = 0.0;

    int d() const { return static_cast<int>(values.size()); }

    // Cumulative products alpha_k = A_1 ... A_k for k = 1..d-1.
    std::vector<double> cumulative() const {
        std::vector<double> out;
        double log_acc = 0.0;
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            log_acc += std::log(values[k]);
            out.push_back(std::exp(log_acc));
        }
        return out;
    }
};

// A_1 = B^{g_d(s)/s}, A_{j+1}^s = A_1^s A_j^{1-s}.
inline AlphaSequence alpha_sequence(int d, double s, double B) {
    if (d < 1) {
        throw DomainError("d must be >= 1");
    }
    if (!(B > 1.0) || !std::isfinite(B)) {
        throw DomainError("alpha_sequence requires finite B > 1");
    }
    if (d == 1) {
        if (!(s > 0.0 && s <= 1.0)) {
            throw DomainError("alpha_sequence requires s in (0, 1]");
        }
        return {{B}, s, B};
    }
    if (!(s > 0.5 && s < 1.0)) {
        throw DomainError("alpha_sequence requires 1/2 < s < 1");
    }
    const double log_b = std::log(B);
    const double log_a1 = log_b * g(d, s) / s;
    const double ratio = (1.0 - s) / s;
    std::vector<double> logs{log_a1};
    for (int j = 1; j < d; ++j) {
        logs.push_back(log_a1 + ratio * logs.back());
    }
    std::vector<double> values;
    values.reserve(logs.size());
    for (double l : logs) {
        values.push_back(std::exp(l));
    }
    return {values, s, B};
}

// min { alpha_1^{-s}, (alpha_{k-1}^{1-s} alpha_k^{-s})^{1/k} for 2 <= k <= d-1,
//       (alpha_{d-1}^{1-s} B^{-s})^{1/d} } with d = alphas.size() + 1.
inline double minimax_value(const std::vector<double>& alphas, double s, double B) {
    if (!(B > 1.0)) {
        throw DomainError("minimax_value requires B > 1");
    }
    const double tol = 1e-12;
    double prev = 1.0;
    for (double a : alphas) {
        if (!(a >= prev * (1 - tol))) {
            throw FeasibilityError("alphas must satisfy 1 <= alpha_1 <= ... <= alpha_{d-1} <= B");
        }
        prev = a;
    }
    if (prev > B * (1 + tol)) {
        throw FeasibilityError("alphas must satisfy 1 <= alpha_1 <= ... <= alpha_{d-1} <= B");
    }
    const int d = static_cast<int>(alphas.size()) + 1;
    if (d == 1) {
        return std::pow(B, -s);
    }
    double best = std::pow(alphas[0], -s);
    for (int k = 2; k <= d - 1; ++k) {
        const double lv = ((1 - s) * std::log(alphas[k - 2]) - s * std::log(alphas[k - 1])) / k;
        best = std::min(best, std::exp(lv));
    }
    const double lv = ((1 - s) * std::log(alphas[d - 2]) - s * std::log(B)) / d;
    return std::min(best, std::exp(lv));
}

} // namespace cfdim
