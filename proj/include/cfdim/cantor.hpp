#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cf_core.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "numeric.hpp"

namespace cfdim {

// Role of a digit position in the construction.
enum class PositionKind {
    Free,        // inside a block of N digits from {1..M}
    Constrained, // position j n_k, digit in [ceil(A_j^{n_k}), floor(2 A_j^{n_k})]
    Lone,        // position m_k, digit from {1..M} outside any block
    Two          // positions m_k+1 .. n_{k+1}-1, digit 2
};

inline std::string to_string(PositionKind k) {
    switch (k) {
    case PositionKind::Free:
        return "free";
    case PositionKind::Constrained:
        return "constrained";
    case PositionKind::Lone:
        return "lone";
    case PositionKind::Two:
        break;
    }
    return "two";
}

struct PositionInfo {
    PositionKind kind = PositionKind::Free;
    int k = 0;       // stage
    int j = 0;       // progression index for constrained positions
    Integer lo = 1;  // admissible digit range
    Integer hi = 1;
};

struct Schedule {
    int d = 1;
    long M = 2;
    int N = 2;
    double s = 0.75;
    double B = 2.0;
    int k_max = 1;

    // Stage data, index k-1, for k = 1..k_max+1 (the extra stage only
    // supplies n_{k_max+1}).
    std::vector<long> ell;
    std::vector<long> n;
    std::vector<long> r;
    std::vector<long> m;

    AlphaSequence A;
    // A_j^{n_k} for stage k (index k-1) and j (index j-1).
    std::vector<std::vector<HighReal>> A_pow;
    std::vector<std::vector<Rational>> A_pow_q;
    std::vector<std::vector<Integer>> digit_lo;
    std::vector<std::vector<Integer>> digit_hi;

    double g_value = 0.0; // g_d(s)
    HighReal u;
    // Sum of block weights over completions of every block prefix; entry for
    // a prefix of length t with base-M code c sits at offset(t) + c.
    std::vector<HighReal> prefix_weight;
    std::vector<std::size_t> prefix_offset;

    int stages() const { return static_cast<int>(n.size()); }

    // Deepest order with a defined fundamental interval.
    long max_order() const { return n.back() - 1; }

    PositionInfo classify(long pos) const {
        if (pos < 1 || pos > max_order() + 1) {
            throw DomainError("position outside the schedule");
        }
        for (int k = 1; k <= stages(); ++k) {
            const long nk = n[k - 1];
            for (int j = 1; j <= d; ++j) {
                if (pos == j * nk) {
                    return {PositionKind::Constrained, k, j, digit_lo[k - 1][j - 1],
                            digit_hi[k - 1][j - 1]};
                }
            }
            if (k <= k_max) {
                if (pos == m[k - 1]) {
                    return {PositionKind::Lone, k, 0, Integer(1), Integer(M)};
                }
                if (pos > m[k - 1] && pos < n[k]) {
                    return {PositionKind::Two, k, 0, Integer(2), Integer(2)};
                }
            }
        }
        return {PositionKind::Free, 0, 0, Integer(1), Integer(M)};
    }

    const HighReal& block_prefix_weight(const std::vector<long>& digits) const {
        std::size_t code = 0;
        for (long a : digits) {
            code = code * static_cast<std::size_t>(M) + static_cast<std::size_t>(a - 1);
        }
        return prefix_weight[prefix_offset[digits.size()] + code];
    }
};

inline constexpr double kBlockBudget = 2e6;

inline Schedule make_schedule(int d, double B, double s, long M, int N, int k_max,
                              long ell1 = 0) {
    if (d < 1) {
        throw DomainError("d must be >= 1");
    }
    if (N < 2 || M < 2) {
        throw DomainError("schedule requires N >= 2 and M >= 2");
    }
    if (!(s > 0.5 && s < 1.0)) {
        throw DomainError("schedule requires 1/2 < s < 1");
    }
    if (!(B > 1.0) || !std::isfinite(B)) {
        throw DomainError("schedule requires finite B > 1");
    }
    if (k_max < 1) {
        throw DomainError("k_max must be >= 1");
    }
    if (std::pow(static_cast<double>(M), N) > kBlockBudget) {
        throw BudgetExceeded("M^N blocks exceed the enumeration budget");
    }
    Schedule sc;
    sc.d = d;
    sc.M = M;
    sc.N = N;
    sc.s = s;
    sc.B = B;
    sc.k_max = k_max;
    sc.g_value = g(d, s);

    // Stage layout.
    // Default ell_1 is the smallest with n_1 > 4 N d.
    long ell = ell1 > 0 ? ell1 : 4L * d;
    for (int k = 1; k <= k_max + 1; ++k) {
        if (k > 1) {
            ell = (sc.m[k - 2] - 1) / N + 1; // smallest with ell N + 1 > m_{k-1}
        }
        sc.ell.push_back(ell);
        sc.n.push_back(ell * N + 1);
        sc.r.push_back(k);
        sc.m.push_back(d * sc.n.back() + 1 + static_cast<long>(k) * N);
    }

    // A_1..A_d in high precision; A_d closes the product to exactly B.
    sc.A = alpha_sequence(d, s, B);
    const HighReal log_b = boost::multiprecision::log(HighReal(B));
    const HighReal hs(s);
    std::vector<HighReal> logs;
    if (d == 1) {
        logs.push_back(log_b);
    } else {
        logs.push_back(log_b * HighReal(sc.g_value) / hs);
        for (int j = 2; j < d; ++j) {
            logs.push_back(logs[0] + (1 - hs) / hs * logs.back());
        }
        HighReal rest = log_b;
        for (const auto& l : logs) {
            rest -= l;
        }
        logs.push_back(rest);
    }
    for (int k = 1; k <= sc.stages(); ++k) {
        std::vector<HighReal> powk;
        std::vector<Rational> powq;
        std::vector<Integer> lo;
        std::vector<Integer> hi;
        for (int j = 1; j <= d; ++j) {
            const HighReal a = boost::multiprecision::exp(HighReal(sc.n[k - 1]) * logs[j - 1]);
            powk.push_back(a);
            powq.push_back(rational_from_high(a));
            lo.push_back(ceil_integer(powq.back()));
            hi.push_back(floor_integer(2 * powq.back()));
            if (lo.back() > hi.back()) {
                throw EmptyDigitRange("empty digit range at stage " + std::to_string(k));
            }
        }
        sc.A_pow.push_back(std::move(powk));
        sc.A_pow_q.push_back(std::move(powq));
        sc.digit_lo.push_back(std::move(lo));
        sc.digit_hi.push_back(std::move(hi));
    }

    // Block weights q_N^{-2s} B^{-g N}; u is their total.
    std::size_t leaves = 1;
    for (int t = 0; t < N; ++t) {
        leaves *= static_cast<std::size_t>(M);
    }
    std::vector<HighReal> leaf(leaves);
    const HighReal b_factor = boost::multiprecision::exp(-HighReal(sc.g_value) * N * log_b);
    const HighReal two_s = 2 * hs;
    std::vector<long> digits(N);
    for (std::size_t code = 0; code < leaves; ++code) {
        std::size_t c = code;
        for (int t = N - 1; t >= 0; --t) {
            digits[t] = static_cast<long>(c % M) + 1;
            c /= M;
        }
        std::uint64_t q_prev = 0;
        std::uint64_t q = 1;
        for (long a : digits) {
            const std::uint64_t next = static_cast<std::uint64_t>(a) * q + q_prev;
            q_prev = q;
            q = next;
        }
        leaf[code] = boost::multiprecision::exp(-two_s * boost::multiprecision::log(HighReal(q))) *
                     b_factor;
    }
    HighReal u = 0;
    for (const auto& w : leaf) {
        u += w;
    }
    sc.u = u;
    if (u < 1) {
        throw InfeasibleParameters("u < 1: s exceeds lambda_d(B, M, N) for this alphabet");
    }
    // Aggregate normalized weights bottom-up into prefix sums.
    std::vector<std::vector<HighReal>> levels(N + 1);
    levels[N].resize(leaves);
    for (std::size_t c = 0; c < leaves; ++c) {
        levels[N][c] = leaf[c] / u;
    }
    for (int t = N - 1; t >= 0; --t) {
        levels[t].assign(levels[t + 1].size() / M, HighReal(0));
        for (std::size_t c = 0; c < levels[t + 1].size(); ++c) {
            levels[t][c / M] += levels[t + 1][c];
        }
    }
    std::size_t offset = 0;
    for (int t = 0; t <= N; ++t) {
        sc.prefix_offset.push_back(offset);
        offset += levels[t].size();
        for (auto& w : levels[t]) {
            sc.prefix_weight.push_back(w);
        }
    }
    return sc;
}

// Checks prefix admissibility position by position.
inline void check_in_tree(const DigitSeq& prefix, const Schedule& sc) {
    if (static_cast<long>(prefix.size()) > sc.max_order()) {
        throw NotInTree("prefix longer than the schedule's deepest order");
    }
    for (std::size_t i = 1; i <= prefix.size(); ++i) {
        const PositionInfo info = sc.classify(static_cast<long>(i));
        const Integer& a = prefix.at(i);
        if (a < info.lo || a > info.hi) {
            throw NotInTree("digit " + a.get_str() + " at position " + std::to_string(i) +
                            " outside the admissible range");
        }
    }
}

enum class DigitPolicy { Min, Max, Random };

// A sequence in D_length chosen by the policy.
inline DigitSeq digit_stream(const Schedule& sc, DigitPolicy policy, long length,
                             std::uint64_t seed = 0) {
    if (length < 0 || length > sc.max_order()) {
        throw DomainError("length exceeds the schedule's deepest order");
    }
    gmp_randclass rng(gmp_randinit_mt);
    rng.seed(static_cast<unsigned long>(seed));
    DigitSeq out;
    for (long pos = 1; pos <= length; ++pos) {
        const PositionInfo info = sc.classify(pos);
        switch (policy) {
        case DigitPolicy::Min:
            out.push_back(info.lo);
            break;
        case DigitPolicy::Max:
            out.push_back(info.hi);
            break;
        case DigitPolicy::Random: {
            const Integer span = info.hi - info.lo + 1;
            out.push_back(info.lo + rng.get_z_range(span));
            break;
        }
        }
    }
    return out;
}

// a_{n_k} a_{2n_k} ... a_{dn_k} >= B^{n_k} for every stage fully inside seq,
// with B taken as the exact binary value of the double.
inline bool membership_holds(const DigitSeq& seq, const Schedule& sc) {
    const Rational b = rational_from_double(sc.B);
    for (int k = 1; k <= sc.stages(); ++k) {
        const long nk = sc.n[k - 1];
        if (static_cast<long>(seq.size()) < sc.d * nk) {
            break;
        }
        Integer prod = 1;
        for (int j = 1; j <= sc.d; ++j) {
            prod *= seq.at(static_cast<std::size_t>(j * nk));
        }
        if (Rational(prod) < pow_rational(b, static_cast<unsigned long>(nk))) {
            return false;
        }
    }
    return true;
}

enum class LengthRegime { J1, J2, J3 };
enum class GapRegime { G1, G2, G3 };

inline std::string to_string(LengthRegime r) {
    return r == LengthRegime::J1 ? "J1" : (r == LengthRegime::J2 ? "J2" : "J3");
}
inline std::string to_string(GapRegime r) {
    return r == GapRegime::G1 ? "G1" : (r == GapRegime::G2 ? "G2" : "G3");
}

struct FundamentalInterval {
    long order = 0;
    IntervalQ interval;
    Rational length;
    LengthRegime regime = LengthRegime::J3;
    Rational lower_bound;
    Rational upper_bound;
    bool bounds_hold = false;
};

namespace detail {

struct Frame {
    Integer p, q, p_prev, q_prev; // p_n, q_n, p_{n-1}, q_{n-1}
};

inline FundamentalInterval interval_from_frame(const Frame& f, long order, const Schedule& sc) {
    const PositionInfo next = sc.classify(order + 1);
    const Integer& lo = next.lo;
    const Integer hi1 = next.hi + 1;
    Rational e1(lo * f.p + f.p_prev, lo * f.q + f.q_prev);
    Rational e2(hi1 * f.p + f.p_prev, hi1 * f.q + f.q_prev);
    e1.canonicalize();
    e2.canonicalize();
    FundamentalInterval out;
    out.order = order;
    out.interval = {std::min(e1, e2), std::max(e1, e2), true, true};
    Rational len(hi1 - lo, (lo * f.q + f.q_prev) * (hi1 * f.q + f.q_prev));
    len.canonicalize();
    out.length = len;
    const Rational q2(f.q * f.q);
    if (next.kind == PositionKind::Constrained) {
        const Rational& a = sc.A_pow_q[next.k - 1][next.j - 1];
        out.regime = LengthRegime::J1;
        out.lower_bound = 1 / (8 * a * q2);
        out.upper_bound = 1 / (a * q2);
    } else if (next.kind == PositionKind::Two) {
        out.regime = LengthRegime::J2;
        out.lower_bound = 1 / (32 * q2);
        out.upper_bound = 1 / (4 * q2);
    } else {
        out.regime = LengthRegime::J3;
        out.lower_bound = 1 / (6 * q2);
        out.upper_bound = 1 / q2;
    }
    out.bounds_hold = out.lower_bound <= out.length && out.length <= out.upper_bound;
    return out;
}

inline Frame root_frame() {
    return {Integer(0), Integer(1), Integer(1), Integer(0)};
}

inline Frame advance(const Frame& f, const Integer& a) {
    return {a * f.p + f.p_prev, a * f.q + f.q_prev, f.p, f.q};
}

inline Frame frame_of(const DigitSeq& prefix) {
    Frame f = root_frame();
    for (const auto& a : prefix) {
        f = advance(f, a);
    }
    return f;
}

} // namespace detail

// J_n: the union of closed children cylinders over admissible next digits.
inline FundamentalInterval fundamental_interval(const DigitSeq& prefix, const Schedule& sc) {
    check_in_tree(prefix, sc);
    return detail::interval_from_frame(detail::frame_of(prefix), static_cast<long>(prefix.size()),
                                       sc);
}

inline GapRegime gap_regime(long order, const Schedule& sc) {
    const PositionInfo next = sc.classify(order + 1);
    if (next.kind == PositionKind::Constrained) {
        return GapRegime::G1;
    }
    for (int k = 1; k <= sc.k_max; ++k) {
        if (order >= sc.m[k - 1] && order <= sc.n[k] - 1) {
            return GapRegime::G2;
        }
    }
    return GapRegime::G3;
}

inline Rational gap_bound_factor(GapRegime r, const Schedule& sc) {
    switch (r) {
    case GapRegime::G1:
        return Rational(1, 4);
    case GapRegime::G2:
        return Rational(1, 6);
    case GapRegime::G3:
        break;
    }
    Rational f(1, 10 * sc.M);
    f.canonicalize();
    return f;
}

// Certified lower bound for the gap between J_n and neighbouring
// fundamental intervals of the same order.
inline Rational gap_lower_bound(const DigitSeq& prefix, const Schedule& sc) {
    const FundamentalInterval j = fundamental_interval(prefix, sc);
    return j.length * gap_bound_factor(gap_regime(j.order, sc), sc);
}

// Distances from J_n to the nearest same-order fundamental interval on each
// side; nullopt when no such interval exists on that side.
struct GapSides {
    std::optional<Rational> left;
    std::optional<Rational> right;

    std::optional<Rational> min() const {
        if (left && right) {
            return std::min(*left, *right);
        }
        return left ? left : right;
    }
};

struct NodeInfo {
    long order = 0;
    FundamentalInterval J;
    GapRegime gap_regime = GapRegime::G3;
    std::optional<Rational> gap;
    Rational gap_bound;
    bool gap_holds = true;
    HighReal mass;
    bool defined_level = true;
};

namespace detail {

inline GapSides child_gaps(const Frame& parent, const IntervalQ& parent_j, const GapSides& parent_gap,
                           const IntervalQ& child_j, const Integer& digit, const PositionInfo& pos,
                           long order, const Schedule& sc) {
    GapSides out;
    auto sibling = [&](const Integer& a) {
        return interval_from_frame(advance(parent, a), order, sc).interval;
    };
    std::optional<IntervalQ> lower_sib;
    std::optional<IntervalQ> upper_sib;
    if (digit - 1 >= pos.lo) {
        lower_sib = sibling(digit - 1);
    }
    if (digit + 1 <= pos.hi) {
        upper_sib = sibling(digit + 1);
    }
    for (const auto& sib : {lower_sib, upper_sib}) {
        if (!sib) {
            continue;
        }
        if (sib->hi <= child_j.lo) {
            out.left = child_j.lo - sib->hi;
        } else {
            out.right = sib->lo - child_j.hi;
        }
    }
    if (!out.left && parent_gap.left) {
        out.left = (child_j.lo - parent_j.lo) + *parent_gap.left;
    }
    if (!out.right && parent_gap.right) {
        out.right = (parent_j.hi - child_j.hi) + *parent_gap.right;
    }
    return out;
}

} // namespace detail

// Walks a prefix from the root, reporting every order 0..n: the fundamental
// interval with its length regime, the actual gap against its bound, and the
// (extended) mass.
inline std::vector<NodeInfo> walk_path(const DigitSeq& prefix, const Schedule& sc) {
    check_in_tree(prefix, sc);
    std::vector<NodeInfo> out;
    out.reserve(prefix.size() + 1);
    detail::Frame frame = detail::root_frame();
    GapSides gaps; // the root has no neighbours
    HighReal closed_mass = 1;
    std::vector<long> block;
    const HighReal inv_m = HighReal(1) / HighReal(sc.M);

    auto make_node = [&](long order) {
        NodeInfo node;
        node.order = order;
        node.J = detail::interval_from_frame(frame, order, sc);
        node.gap_regime = gap_regime(order, sc);
        node.gap_bound = node.J.length * gap_bound_factor(node.gap_regime, sc);
        node.gap = gaps.min();
        node.gap_holds = !node.gap || *node.gap >= node.gap_bound;
        node.defined_level = block.empty();
        node.mass = block.empty() ? closed_mass : closed_mass * sc.block_prefix_weight(block);
        return node;
    };

    out.push_back(make_node(0));
    for (std::size_t i = 1; i <= prefix.size(); ++i) {
        const long order = static_cast<long>(i);
        const Integer& a = prefix.at(i);
        const PositionInfo pos = sc.classify(order);
        const detail::Frame parent = frame;
        const IntervalQ parent_j = out.back().J.interval;
        frame = detail::advance(frame, a);
        const FundamentalInterval child = detail::interval_from_frame(frame, order, sc);
        gaps = detail::child_gaps(parent, parent_j, gaps, child.interval, a, pos, order, sc);
        switch (pos.kind) {
        case PositionKind::Free:
            block.push_back(a.get_si());
            if (static_cast<int>(block.size()) == sc.N) {
                closed_mass *= sc.block_prefix_weight(block);
                block.clear();
            }
            break;
        case PositionKind::Constrained:
            closed_mass /= to_high(Integer(pos.hi - pos.lo + 1));
            break;
        case PositionKind::Lone:
            closed_mass *= inv_m;
            break;
        case PositionKind::Two:
            break;
        }
        out.push_back(make_node(order));
    }
    return out;
}

struct MassNode {
    DigitSeq prefix;
    long order = 0;
    HighReal mass;
    FundamentalInterval J;
};

// Mass extended to every order by aggregating over completions.
inline HighReal extended_mass(const DigitSeq& prefix, const Schedule& sc) {
    return walk_path(prefix, sc).back().mass;
}

// Mass at the levels where it is defined directly; orders strictly inside a
// block are only bounded, not defined.
inline MassNode mass(const DigitSeq& prefix, const Schedule& sc) {
    const auto nodes = walk_path(prefix, sc);
    const NodeInfo& last = nodes.back();
    if (!last.defined_level) {
        throw UndefinedLevel("order " + std::to_string(last.order) +
                             " falls strictly inside a block");
    }
    return {prefix, last.order, last.mass, last.J};
}

struct HolderReport {
    double exponent = 0.0;             // s - 130/N
    long nodes = 0;
    double log_C = -std::numeric_limits<double>::infinity(); // max log(mu / |J|^exponent)
    double min_e = std::numeric_limits<double>::infinity();  // min log mu / log |J|
    std::vector<double> min_e_by_order; // index = order; NaN where no node
    long violations = 0;                // nodes with mu > C |J|^exponent
    long flagged = 0;                   // nodes with e(J) < exponent - slack
    double slack = 0.0;
};

// Samples random root paths, evaluates e(J) = log mu(J) / log |J| at every
// defined level, and estimates C in mu(J) <= C |J|^{s - 130/N}.
inline HolderReport holder_report(const Schedule& sc, long depth, long sample_nodes,
                                  std::uint64_t seed, double slack = 0.0) {
    if (depth < 1 || depth > sc.max_order()) {
        throw DomainError("depth outside the schedule range");
    }
    if (sample_nodes < 1) {
        throw DomainError("sample_nodes must be >= 1");
    }
    HolderReport rep;
    rep.exponent = sc.s - 130.0 / sc.N;
    rep.slack = slack;
    rep.min_e_by_order.assign(depth + 1, std::numeric_limits<double>::quiet_NaN());
    struct Point {
        double log_mu;
        double log_len;
    };
    std::vector<Point> points;
    for (long i = 0; i < sample_nodes; ++i) {
        const DigitSeq path = digit_stream(sc, DigitPolicy::Random, depth, seed + i);
        const auto nodes = walk_path(path, sc);
        for (const auto& node : nodes) {
            if (node.order == 0 || !node.defined_level) {
                continue;
            }
            const double log_mu = boost::multiprecision::log(node.mass).convert_to<double>();
            const double log_len = log_of(node.J.length);
            points.push_back({log_mu, log_len});
            const double e = log_mu / log_len;
            rep.min_e = std::min(rep.min_e, e);
            double& slot = rep.min_e_by_order[node.order];
            slot = std::isnan(slot) ? e : std::min(slot, e);
            rep.log_C = std::max(rep.log_C, log_mu - rep.exponent * log_len);
            if (e < rep.exponent - slack) {
                ++rep.flagged;
            }
        }
    }
    rep.nodes = static_cast<long>(points.size());
    for (const auto& p : points) {
        if (p.log_mu > rep.log_C + rep.exponent * p.log_len + 1e-9) {
            ++rep.violations;
        }
    }
    return rep;
}

} // namespace cfdim
