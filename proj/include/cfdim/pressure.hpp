#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "growth.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "phi.hpp"
#include "transfer_operator.hpp"

namespace cfdim {

enum class PressureMethod { Enumerate, Operator };

inline std::string to_string(PressureMethod m) {
    return m == PressureMethod::Enumerate ? "enumerate" : "operator";
}

struct DimEstimate {
    double value = 0.0;
    std::string method;
    long M = 0;
    long depth_or_grid = 0;
    double bracket = 0.0;
    double grid_error = 0.0; // |rho_G - rho_{G/2}| / rho_G at the root, when computed
    std::vector<std::string> diagnostics;
};

struct PressureQuery {
    int d = 1;
    double s = 0.0;
    double B = 1.0;
    long M = 1;
    int n = 1;
};

inline constexpr double kEnumerationBudget = 1e8;

namespace detail {

inline double leaf_sum_u64(std::uint64_t q_prev, std::uint64_t q, int left, long M, double two_s) {
    if (left == 0) {
        return std::pow(static_cast<double>(q), -two_s);
    }
    double acc = 0.0;
    for (long a = 1; a <= M; ++a) {
        acc += leaf_sum_u64(q, static_cast<std::uint64_t>(a) * q + q_prev, left - 1, M, two_s);
    }
    return acc;
}

inline double leaf_sum_big(const Integer& q_prev, const Integer& q, int left, long M, double two_s) {
    if (left == 0) {
        return std::exp(-two_s * log_of(q));
    }
    double acc = 0.0;
    Integer next;
    for (long a = 1; a <= M; ++a) {
        next = a * q + q_prev;
        acc += leaf_sum_big(q, next, left - 1, M, two_s);
    }
    return acc;
}

} // namespace detail

// sum over (a_1..a_n) in {1..M}^n of q_n^{-2s}, without the B factor.
inline double continuant_power_sum(double s, long M, int n) {
    if (M < 1 || n < 1) {
        throw DomainError("pressure sum requires M >= 1 and n >= 1");
    }
    if (n * std::log10(static_cast<double>(M)) > std::log10(kEnumerationBudget) + 1e-12) {
        throw BudgetExceeded("enumeration of M^n cylinders exceeds 1e8");
    }
    const double two_s = 2.0 * s;
    const bool small = n * std::log2(static_cast<double>(M + 1)) < 63.0;
    auto parts = parallel_map(static_cast<std::size_t>(M), [&](std::size_t i) {
        const long a = static_cast<long>(i) + 1;
        if (small) {
            return detail::leaf_sum_u64(1, static_cast<std::uint64_t>(a), n - 1, M, two_s);
        }
        return detail::leaf_sum_big(Integer(1), Integer(a), n - 1, M, two_s);
    });
    return tree_sum(parts);
}

inline double pressure_sum_enumerate(const PressureQuery& q) {
    if (q.d < 1 || q.s < 0.0 || q.s > 1.0 || q.B < 1.0) {
        throw DomainError("pressure query requires d >= 1, 0 <= s <= 1, B >= 1");
    }
    const double sum = continuant_power_sum(q.s, q.M, q.n);
    return sum * std::exp(-g(q.d, q.s) * q.n * std::log(q.B));
}

// log of (L_s^n 1)(0), iterating on the grid with clamped interpolation and
// renormalizing every step.
inline double log_pressure_sum_operator(const TransferOperator& op, double s, int n) {
    if (n < 1) {
        throw DomainError("pressure sum requires n >= 1");
    }
    const auto w = op.digit_weights(s);
    std::vector<double> h(op.grid_size(), 1.0);
    double log_scale = 0.0;
    for (int t = 0; t < n; ++t) {
        h = op.apply_clamped(h, w);
        double mx = 0.0;
        for (double v : h) {
            mx = std::max(mx, v);
        }
        if (!(mx > 0.0) || !std::isfinite(mx)) {
            throw ConvergenceError("operator iteration degenerated");
        }
        for (double& v : h) {
            v /= mx;
        }
        log_scale += std::log(mx);
    }
    return log_scale + std::log(h[0]);
}

inline double log_pressure_sum_operator(double s, long M, int n, int grid_size) {
    return log_pressure_sum_operator(TransferOperator(M, grid_size), s, n);
}

inline double pressure_sum_operator(double s, long M, int n, int grid_size) {
    return std::exp(log_pressure_sum_operator(s, M, n, grid_size));
}

inline double spectral_radius(const TransferOperator& op, double s) {
    return power_iteration(op.matrix(s)).rho;
}

inline double spectral_radius(double s, long M, int grid_size = 32) {
    if (!(s > 0.0)) {
        throw DomainError("spectral_radius requires s > 0");
    }
    return spectral_radius(TransferOperator(M, grid_size), s);
}

struct CheckedRadius {
    double rho = 0.0;
    double coarse = 0.0;
    double rel_error = 0.0;
};

// Radius at the requested grid and at half of it.
inline CheckedRadius spectral_radius_checked(double s, long M, int grid_size = 32) {
    const double fine = spectral_radius(s, M, grid_size);
    const double coarse = spectral_radius(s, M, grid_size / 2);
    return {fine, coarse, std::abs(fine - coarse) / fine};
}

namespace detail {

// Smallest s in [lo, hi] with F(s) <= 0 for F decreasing; F(lo) > 0 >= F(hi).
template <typename F>
std::pair<double, double> bisect(F&& fn, double lo, double hi, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (fn(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

} // namespace detail

inline DimEstimate lambda_finite(int d, double B, long M, int n,
                                 PressureMethod method = PressureMethod::Enumerate,
                                 int grid_size = 32) {
    if (!(B > 1.0) || d < 1 || M < 1 || n < 1) {
        throw DomainError("lambda_finite requires d >= 1, B > 1, M >= 1, n >= 1");
    }
    const double log_b = std::log(B);
    std::function<double(double)> log_sum;
    std::unique_ptr<TransferOperator> op;
    if (method == PressureMethod::Enumerate) {
        log_sum = [&](double s) { return std::log(continuant_power_sum(s, M, n)); };
    } else {
        op = std::make_unique<TransferOperator>(M, grid_size);
        log_sum = [&](double s) { return log_pressure_sum_operator(*op, s, n); };
    }
    auto fn = [&](double s) { return log_sum(s) - g(d, s) * n * log_b; };
    DimEstimate out;
    out.method = to_string(method);
    out.M = M;
    out.depth_or_grid = n;
    if (fn(0.0) <= 0.0) {
        out.value = 0.0;
        out.diagnostics.push_back("sum <= 1 already at s = 0");
        return out;
    }
    if (fn(1.0) > 0.0) {
        out.value = 1.0;
        out.diagnostics.push_back("sum > 1 at s = 1; value is the boundary");
        return out;
    }
    const auto [s, half] = detail::bisect(fn, 0.0, 1.0, 1e-10);
    out.value = s;
    out.bracket = half;
    return out;
}

using ExponentFn = double (*)(int, double);

inline double g_exponent(int d, double s) { return g(d, s); }
inline double f_exponent(int d, double s) { return f(d, s); }

// Root of log rho(s, M) - e_d(s) log B on the finite alphabet {1..M}.
inline DimEstimate root_finite_alphabet(ExponentFn e, int d, double B, long M, int grid_size,
                                        double tol) {
    if (!(B > 1.0) || d < 1 || M < 1) {
        throw DomainError("dimension root requires d >= 1, B > 1, M >= 1");
    }
    const TransferOperator op(M, grid_size);
    const double log_b = std::log(B);
    auto fn = [&](double s) {
        // At s = 0 every weight is 1 and the radius is exactly M.
        const double lr = s == 0.0 ? std::log(static_cast<double>(M)) : std::log(spectral_radius(op, s));
        return lr - e(d, s) * log_b;
    };
    DimEstimate out;
    out.method = "operator";
    out.M = M;
    out.depth_or_grid = grid_size;
    if (fn(0.0) <= 0.0) {
        out.value = 0.0;
        out.diagnostics.push_back("pressure <= 0 at s = 0; boundary value");
        return out;
    }
    if (fn(1.0) > 0.0) {
        out.value = 1.0;
        out.diagnostics.push_back("pressure > 0 at s = 1; boundary value");
        return out;
    }
    const auto [s, half] = detail::bisect(fn, 0.0, 1.0, tol);
    out.value = s;
    out.bracket = half;
    return out;
}

inline DimEstimate lambda_M(int d, double B, long M, int grid_size = 32) {
    return root_finite_alphabet(g_exponent, d, B, M, grid_size, 1e-9);
}

inline DimEstimate theta_M(int d, double B, long M, int grid_size = 32) {
    return root_finite_alphabet(f_exponent, d, B, M, grid_size, 1e-9);
}

struct LambdaOptions {
    double tol = 1e-6;
    int grid_size = 32;
    long min_M = 8;
    long max_M = 1024;
    bool grid_check = true;
};

// Root in s of the tail-corrected pressure with the digits above M summed
// through Hurwitz zeta values. The full-alphabet pressure is infinite for
// s <= 1/2, so the search runs on (1/2, 1].
inline DimEstimate root_tail_corrected(ExponentFn e, int d, double B, long M, int grid_size) {
    const TransferOperator op(M, grid_size, true);
    const double log_b = std::log(B);
    auto fn = [&](double s) {
        if (s <= 0.5) {
            return std::numeric_limits<double>::infinity();
        }
        return std::log(spectral_radius(op, s)) - e(d, s) * log_b;
    };
    DimEstimate out;
    out.method = "operator";
    out.M = M;
    out.depth_or_grid = grid_size;
    if (fn(1.0) > 0.0) {
        out.value = 1.0;
        out.diagnostics.push_back("pressure > 0 at s = 1; boundary value");
        return out;
    }
    const auto [s, half] = detail::bisect(fn, 0.5, 1.0, 1e-10);
    out.value = s;
    out.bracket = half;
    if (s - half <= 0.5 + 1e-9) {
        out.diagnostics.push_back("root at the s = 1/2 boundary");
    }
    return out;
}

inline DimEstimate dimension_pipeline(ExponentFn e, int d, double B, const LambdaOptions& opt) {
    if (!(B > 1.0) || !std::isfinite(B) || d < 1) {
        throw DomainError("dimension pipeline requires d >= 1 and finite B > 1");
    }
    if (!(opt.tol > 0.0) || opt.max_M < 2 || opt.grid_size < 8) {
        throw DomainError("invalid pipeline options");
    }
    DimEstimate prev;
    bool have_prev = false;
    for (long M = 2; M <= opt.max_M; M *= 2) {
        DimEstimate cur = root_tail_corrected(e, d, B, M, opt.grid_size);
        if (have_prev) {
            const double inc = std::abs(cur.value - prev.value);
            if (inc < opt.tol && M >= opt.min_M) {
                cur.bracket = std::max({inc, cur.bracket, 1e-10});
                cur.diagnostics.push_back("M-schedule converged at M = " + std::to_string(M));
                if (opt.grid_check) {
                    const double s = cur.value;
                    if (s > 0.5 && s < 1.0) {
                        const TransferOperator coarse(M, opt.grid_size / 2, true);
                        const TransferOperator fine(M, opt.grid_size, true);
                        const double rf = spectral_radius(fine, s);
                        const double rc = spectral_radius(coarse, s);
                        cur.grid_error = std::abs(rf - rc) / rf;
                    }
                }
                if (cur.value < 0.5 - cur.bracket || cur.value > 1.0) {
                    cur.diagnostics.push_back("raw value " + PhiDescriptor::fmt(cur.value) +
                                              " clamped to [1/2, 1]");
                }
                cur.value = std::clamp(cur.value, 0.5, 1.0);
                return cur;
            }
        }
        prev = std::move(cur);
        have_prev = true;
    }
    throw ConvergenceError("M-schedule exhausted before reaching tolerance");
}

inline DimEstimate lambda(int d, double B, const LambdaOptions& opt = {}) {
    return dimension_pipeline(g_exponent, d, B, opt);
}

inline DimEstimate theta(int d, double B, const LambdaOptions& opt = {}) {
    return dimension_pipeline(f_exponent, d, B, opt);
}

// 1 if B = 1, lambda_d(B) if 1 < B < inf, 1/(1+b) if B = inf.
inline DimEstimate dimension_of_set(int d, const PhiDescriptor& phi, const LambdaOptions& opt = {}) {
    if (d < 1) {
        throw DomainError("d must be >= 1");
    }
    long horizon = 1000;
    if (phi.family == PhiFamily::Table) {
        horizon = static_cast<long>(phi.table.size());
    }
    const GrowthExponents ge = growth_exponents(phi, horizon);
    DimEstimate out;
    if (ge.B == 1.0) {
        out.value = 1.0;
        out.method = "case-dispatch";
    } else if (std::isinf(ge.B)) {
        out.value = std::isinf(ge.b) ? 0.0 : 1.0 / (1.0 + ge.b);
        out.method = "case-dispatch";
    } else {
        out = lambda(d, ge.B, opt);
    }
    if (ge.estimate) {
        out.diagnostics.push_back("growth exponents estimated from table over horizon " +
                                  std::to_string(horizon));
    }
    return out;
}

} // namespace cfdim
