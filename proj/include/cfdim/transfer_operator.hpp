#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include "errors.hpp"
#include "parallel.hpp"

namespace cfdim {

// Chebyshev-Lobatto nodes on [0, 1] (both endpoints included) with the
// barycentric weights of the second kind.
class ChebyshevGrid {
public:
    explicit ChebyshevGrid(int size) : size_(size) {
        if (size < 2) {
            throw DomainError("grid size must be >= 2");
        }
        const double pi = std::acos(-1.0);
        nodes_.resize(size);
        weights_.resize(size);
        for (int k = 0; k < size; ++k) {
            nodes_[k] = 0.5 * (1.0 - std::cos(pi * k / (size - 1)));
            weights_[k] = (k % 2 == 0) ? 1.0 : -1.0;
        }
        nodes_.front() = 0.0;
        nodes_.back() = 1.0;
        weights_.front() *= 0.5;
        weights_.back() *= 0.5;
    }

    int size() const { return size_; }
    const std::vector<double>& nodes() const { return nodes_; }

    // Coefficients r with p(y) = sum_k r_k h_k for the interpolant p.
    void row(double y, double* out) const {
        for (int k = 0; k < size_; ++k) {
            if (y == nodes_[k]) {
                std::fill(out, out + size_, 0.0);
                out[k] = 1.0;
                return;
            }
        }
        double total = 0.0;
        for (int k = 0; k < size_; ++k) {
            out[k] = weights_[k] / (y - nodes_[k]);
            total += out[k];
        }
        for (int k = 0; k < size_; ++k) {
            out[k] /= total;
        }
    }

    std::vector<double> row(double y) const {
        std::vector<double> r(size_);
        row(y, r.data());
        return r;
    }

    double interpolate(const std::vector<double>& h, double y) const {
        std::vector<double> r = row(y);
        double v = 0.0;
        for (int k = 0; k < size_; ++k) {
            v += r[k] * h[k];
        }
        return v;
    }

private:
    int size_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

namespace detail {

inline void quiet_gsl() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

inline double hurwitz_zeta(double s, double q) {
    quiet_gsl();
    gsl_sf_result r;
    const int status = gsl_sf_hzeta_e(s, q, &r);
    if (status != GSL_SUCCESS && status != GSL_EUNDRFLW) {
        throw ConvergenceError("Hurwitz zeta evaluation failed");
    }
    return status == GSL_EUNDRFLW ? 0.0 : r.val;
}

// Solves the dense system A x = b in place (partial pivoting).
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
                piv = r;
            }
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            v -= a[i][k] * x[k];
        }
        x[i] = v / a[i][i];
    }
    return x;
}

} // namespace detail

using Matrix = std::vector<std::vector<double>>;

// Collocation of (L_s h)(x) = sum_{a=1..M} (a+x)^{-2s} h(1/(a+x)) on a
// Chebyshev grid. With `tail` set, the digits a > M are added through a
// polynomial fit of h on [0, 1/(M+1)] and Hurwitz zeta sums, which turns the
// operator into an approximation of the full-alphabet one (needs s > 1/2).
class TransferOperator {
public:
    static constexpr double kMaxEntries = 3.2e7;

    TransferOperator(long M, int grid_size, bool tail = false, int tail_degree = 8)
        : M_(M), grid_(grid_size), tail_(tail), degree_(tail_degree) {
        if (M < 1) {
            throw DomainError("alphabet bound M must be >= 1");
        }
        if (grid_size < 8) {
            throw DomainError("grid size must be >= 8");
        }
        const double entries = static_cast<double>(M) * grid_size * grid_size;
        if (entries > kMaxEntries) {
            throw BudgetExceeded("transfer operator exceeds memory budget (M * grid^2)");
        }
        const int G = grid_size;
        rows_.assign(static_cast<std::size_t>(M) * G * G, 0.0);
        const auto& x = grid_.nodes();
        for (int j = 0; j < G; ++j) {
            for (long a = 1; a <= M; ++a) {
                grid_.row(1.0 / (a + x[j]), &rows_[index(j, a)]);
            }
        }
        if (tail_) {
            build_tail_projection();
        }
    }

    long M() const { return M_; }
    int grid_size() const { return grid_.size(); }
    const ChebyshevGrid& grid() const { return grid_; }
    bool has_tail() const { return tail_; }

    Matrix matrix(double s) const {
        if (tail_ && !(s > 0.5)) {
            throw DomainError("tail-corrected operator requires s > 1/2");
        }
        const int G = grid_.size();
        const auto& x = grid_.nodes();
        auto rows = parallel_map(static_cast<std::size_t>(G), [&](std::size_t j) {
            std::vector<double> out(G, 0.0);
            for (long a = 1; a <= M_; ++a) {
                const double w = std::pow(a + x[j], -2.0 * s);
                const double* r = &rows_[index(static_cast<int>(j), a)];
                for (int k = 0; k < G; ++k) {
                    out[k] += w * r[k];
                }
            }
            if (tail_) {
                const double base = static_cast<double>(M_ + 1);
                double scale = 1.0;
                for (int m = 0; m <= degree_; ++m) {
                    const double z = scale * detail::hurwitz_zeta(2.0 * s + m, base + x[j]);
                    for (int k = 0; k < G; ++k) {
                        out[k] += z * projection_[m][k];
                    }
                    scale *= base;
                }
            }
            return out;
        });
        return rows;
    }

    // One application with interpolated values clamped at zero.
    std::vector<double> apply_clamped(const std::vector<double>& h,
                                      const std::vector<std::vector<double>>& weights) const {
        const int G = grid_.size();
        std::vector<double> out(G, 0.0);
        for (int j = 0; j < G; ++j) {
            double acc = 0.0;
            for (long a = 1; a <= M_; ++a) {
                const double* r = &rows_[index(j, a)];
                double v = 0.0;
                for (int k = 0; k < G; ++k) {
                    v += r[k] * h[k];
                }
                acc += weights[j][a - 1] * std::max(0.0, v);
            }
            out[j] = acc;
        }
        return out;
    }

    std::vector<std::vector<double>> digit_weights(double s) const {
        const int G = grid_.size();
        const auto& x = grid_.nodes();
        std::vector<std::vector<double>> w(G, std::vector<double>(M_));
        for (int j = 0; j < G; ++j) {
            for (long a = 1; a <= M_; ++a) {
                w[j][a - 1] = std::pow(a + x[j], -2.0 * s);
            }
        }
        return w;
    }

private:
    std::size_t index(int j, long a) const {
        const std::size_t G = grid_.size();
        return (static_cast<std::size_t>(j) * M_ + static_cast<std::size_t>(a - 1)) * G;
    }

    // projection_[m][k]: coefficient of t^m (t = y (M+1)) in the degree-K fit
    // of the interpolant through nodes h_k, sampled at Chebyshev points of
    // [0, 1/(M+1)].
    void build_tail_projection() {
        const int G = grid_.size();
        const int K = degree_;
        const double pi = std::acos(-1.0);
        const double base = static_cast<double>(M_ + 1);
        std::vector<double> t(K + 1);
        for (int i = 0; i <= K; ++i) {
            t[i] = 0.5 * (1.0 - std::cos(pi * i / K));
        }
        Matrix vander(K + 1, std::vector<double>(K + 1));
        for (int i = 0; i <= K; ++i) {
            double p = 1.0;
            for (int m = 0; m <= K; ++m) {
                vander[i][m] = p;
                p *= t[i];
            }
        }
        Matrix sample_rows(K + 1);
        for (int i = 0; i <= K; ++i) {
            sample_rows[i] = grid_.row(t[i] / base);
        }
        projection_.assign(K + 1, std::vector<double>(G, 0.0));
        for (int k = 0; k < G; ++k) {
            std::vector<double> rhs(K + 1);
            for (int i = 0; i <= K; ++i) {
                rhs[i] = sample_rows[i][k];
            }
            const auto coeff = detail::solve_dense(vander, rhs);
            for (int m = 0; m <= K; ++m) {
                projection_[m][k] = coeff[m];
            }
        }
    }

    long M_;
    ChebyshevGrid grid_;
    bool tail_;
    int degree_;
    std::vector<double> rows_;
    Matrix projection_;
};

struct EigenResult {
    double rho = 0.0;
    std::vector<double> vector;
    int iterations = 0;
};

// Leading eigenvalue of a nonnegative-dominant matrix by power iteration;
// the eigenvector must come out strictly positive.
inline EigenResult power_iteration(const Matrix& a, double rel_tol = 1e-15, int max_iter = 20000) {
    const std::size_t G = a.size();
    std::vector<double> v(G, 1.0);
    std::vector<double> u(G);
    double rho = 0.0;
    int stable = 0;
    for (int it = 1; it <= max_iter; ++it) {
        for (std::size_t j = 0; j < G; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < G; ++k) {
                acc += a[j][k] * v[k];
            }
            u[j] = acc;
        }
        double mx = 0.0;
        for (double x : u) {
            mx = std::max(mx, std::abs(x));
        }
        if (!(mx > 0.0) || !std::isfinite(mx)) {
            throw ConvergenceError("power iteration degenerated");
        }
        double diff = 0.0;
        for (std::size_t j = 0; j < G; ++j) {
            u[j] /= mx;
            diff = std::max(diff, std::abs(u[j] - v[j]));
        }
        const double change = std::abs(mx - rho);
        rho = mx;
        std::swap(u, v);
        if (change <= rel_tol * rho * 4 && diff <= 1e-13) {
            if (++stable >= 3) {
                for (double x : v) {
                    if (!(x > 0.0)) {
                        throw ConvergenceError("leading eigenvector is not positive");
                    }
                }
                return {rho, v, it};
            }
        } else {
            stable = 0;
        }
    }
    throw ConvergenceError("power iteration did not converge");
}

} // namespace cfdim
