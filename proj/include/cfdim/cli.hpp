#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cantor.hpp"
#include "cf_core.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "measure.hpp"
#include "phi.hpp"
#include "pressure.hpp"

namespace cfdim::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchema = 1;

using Json = nlohmann::json;

// Writes one record per line as JSON, or as CSV with a header taken from the
// first record.
class Emitter {
public:
    Emitter(std::ostream& out, bool csv) : out_(out), csv_(csv) {}

    void emit(const Json& record) {
        if (!csv_) {
            out_ << record.dump() << '\n';
            return;
        }
        std::vector<std::pair<std::string, std::string>> cells;
        flatten(record, "", cells);
        if (!header_done_) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out_ << (i ? "," : "") << quote(cells[i].first);
            }
            out_ << '\n';
            header_done_ = true;
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << quote(cells[i].second);
        }
        out_ << '\n';
    }

private:
    static void flatten(const Json& j, const std::string& prefix,
                        std::vector<std::pair<std::string, std::string>>& cells) {
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it) {
                flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), cells);
            }
            return;
        }
        if (j.is_array()) {
            std::string joined;
            for (std::size_t i = 0; i < j.size(); ++i) {
                joined += (i ? ";" : "") + scalar(j[i]);
            }
            cells.emplace_back(prefix, joined);
            return;
        }
        cells.emplace_back(prefix, scalar(j));
    }

    static std::string scalar(const Json& j) {
        if (j.is_string()) {
            return j.get<std::string>();
        }
        return j.dump();
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) {
            return s;
        }
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') {
                q += '"';
            }
            q += c;
        }
        return q + "\"";
    }

    std::ostream& out_;
    bool csv_;
    bool header_done_ = false;
};

inline Json record(const std::string& sub, Json params, Json result, Json extra = Json::object(),
                   std::optional<std::uint64_t> seed = std::nullopt) {
    Json r = Json::object();
    r["schema"] = kSchema;
    r["version"] = kVersion;
    r["subcommand"] = sub;
    r["params"] = std::move(params);
    r["result"] = std::move(result);
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        r[it.key()] = it.value();
    }
    r["seed"] = seed ? Json(*seed) : Json(nullptr);
    return r;
}

inline Json estimate_json(const DimEstimate& e) {
    return {{"value", e.value},     {"method", e.method},         {"M", e.M},
            {"depth_or_grid", e.depth_or_grid}, {"grid_error", e.grid_error},
            {"diagnostics", e.diagnostics}};
}

// Exact rational for plain decimal input such as "0.5" or "3".
inline std::optional<Rational> parse_decimal(const std::string& text) {
    static const std::regex pattern(R"(^\s*(\d+)(?:\.(\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) {
        return std::nullopt;
    }
    const std::string frac = m[2].matched ? m[2].str() : "";
    Integer num(m[1].str() + frac, 10);
    Integer den = pow_integer(Integer(10), frac.size());
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline double parse_real(const std::string& text, const std::string& name) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DomainError("--" + name + " expects a number, got '" + text + "'");
    }
    if (used != text.size()) {
        throw DomainError("--" + name + " expects a number, got '" + text + "'");
    }
    return v;
}

inline PressureMethod parse_method(const std::string& m) {
    if (m == "enumerate") {
        return PressureMethod::Enumerate;
    }
    if (m == "operator") {
        return PressureMethod::Operator;
    }
    throw DomainError("--method must be enumerate or operator");
}

struct Options {
    bool csv = false;
    double tol = 1e-6;
    int d = 1;
    std::string s_text = "0.5";
    std::vector<double> B_list;
    double B = 0.0;
    long M = 0;
    int N = 4;
    int n = 0;
    int grid = 32;
    std::vector<double> K_list;
    long samples = 1000;
    long n_max = 10;
    std::uint64_t seed = 0;
    std::string method = "enumerate";
    std::string phi_text;
    std::string precision_bits = "auto";
    int k_max = 2;
    long depth = 0;
    bool nodes = false;
};

inline LambdaOptions lambda_options(const Options& o) {
    LambdaOptions lo;
    lo.tol = o.tol;
    lo.grid_size = o.grid;
    return lo;
}

inline void run_exponent(const std::string& sub, const Options& o, Emitter& em) {
    const double s = parse_real(o.s_text, "s");
    Json params = {{"d", o.d}, {"s", s}};
    Json result;
    const auto exact = parse_decimal(o.s_text);
    if (sub == "gd") {
        result["value"] = g(o.d, s);
        if (exact) {
            result["exact"] = g(o.d, *exact).get_str();
        }
    } else if (sub == "f") {
        result["value"] = f(o.d, s);
        if (exact) {
            result["exact"] = f(o.d, *exact).get_str();
        }
    } else {
        result["value"] = omega(o.d, s);
        if (exact && *exact > 0) {
            Rational w = f(o.d, *exact) / g(o.d, *exact);
            w.canonicalize();
            result["exact"] = w.get_str();
        }
    }
    em.emit(record(sub, params, result, {{"bracket", 0.0}}));
}

inline void run_alphas(const Options& o, Emitter& em) {
    const double s = parse_real(o.s_text, "s");
    const AlphaSequence a = alpha_sequence(o.d, s, o.B);
    double prod_log = 0.0;
    for (double v : a.values) {
        prod_log += std::log(v);
    }
    const double product = std::exp(prod_log);
    Json result = {{"A", a.values},
                   {"cumulative", a.cumulative()},
                   {"product", product},
                   {"minimax_value", minimax_value(a.cumulative(), s, o.B)},
                   {"B_pow_minus_g", std::pow(o.B, -g(o.d, s))}};
    em.emit(record("alphas", {{"d", o.d}, {"s", s}, {"B", o.B}}, result,
                   {{"bracket", std::abs(product - o.B) / o.B}}));
}

inline void run_pressure_sum(const Options& o, Emitter& em) {
    const double s = parse_real(o.s_text, "s");
    const double B = o.B > 0.0 ? o.B : 1.0;
    const PressureMethod method = parse_method(o.method);
    if (o.M < 1 || o.n < 1) {
        throw DomainError("pressure-sum requires --M >= 1 and --n >= 1");
    }
    if (s < 0.0 || s > 1.0 || B < 1.0) {
        throw DomainError("pressure-sum requires 0 <= s <= 1 and B >= 1");
    }
    Json params = {{"d", o.d}, {"s", s}, {"B", B}, {"M", o.M}, {"n", o.n},
                   {"method", to_string(method)}};
    double value = 0.0;
    double bracket = 0.0;
    if (method == PressureMethod::Enumerate) {
        value = pressure_sum_enumerate({o.d, s, B, o.M, o.n});
    } else {
        params["grid"] = o.grid;
        const double factor = std::exp(-g(o.d, s) * o.n * std::log(B));
        const double fine = pressure_sum_operator(s, o.M, o.n, o.grid);
        const double coarse = pressure_sum_operator(s, o.M, o.n, std::max(8, o.grid / 2));
        value = fine * factor;
        bracket = std::abs(fine - coarse) * factor;
    }
    em.emit(record("pressure-sum", params, {{"value", value}}, {{"bracket", bracket}}));
}

inline void run_lambda_like(const std::string& sub, const Options& o, Emitter& em) {
    if (o.B_list.empty()) {
        throw DomainError("--B is required");
    }
    for (double B : o.B_list) {
        Json params = {{"d", o.d}, {"B", B}};
        DimEstimate e;
        if (sub == "lambda" && o.M > 0 && o.n > 0) {
            params["M"] = o.M;
            params["n"] = o.n;
            params["method"] = o.method;
            e = lambda_finite(o.d, B, o.M, o.n, parse_method(o.method), o.grid);
        } else if (o.M > 0) {
            params["M"] = o.M;
            e = sub == "lambda" ? lambda_M(o.d, B, o.M, o.grid) : theta_M(o.d, B, o.M, o.grid);
        } else {
            params["tol"] = o.tol;
            e = sub == "lambda" ? lambda(o.d, B, lambda_options(o)) : theta(o.d, B, lambda_options(o));
        }
        em.emit(record(sub, params, estimate_json(e), {{"bracket", e.bracket}}));
    }
}

inline void run_compare(const Options& o, Emitter& em) {
    if (o.B_list.empty()) {
        throw DomainError("--B is required");
    }
    for (double B : o.B_list) {
        const DimEstimate l = lambda(o.d, B, lambda_options(o));
        const DimEstimate t = theta(o.d, B, lambda_options(o));
        const double combined = l.bracket + t.bracket;
        const double margin = l.value - t.value;
        Json result = {{"lambda", l.value},
                       {"theta", t.value},
                       {"margin", margin},
                       {"lambda_gt_theta", margin > combined}};
        em.emit(record("compare", {{"d", o.d}, {"B", B}, {"tol", o.tol}}, result,
                       {{"bracket", {{"lambda", l.bracket}, {"theta", t.bracket}, {"combined", combined}}}}));
    }
}

inline void run_dim(const Options& o, Emitter& em) {
    const PhiDescriptor phi = parse_phi(o.phi_text);
    const DimEstimate e = dimension_of_set(o.d, phi, lambda_options(o));
    em.emit(record("dim", {{"d", o.d}, {"phi", phi.source}}, estimate_json(e),
                   {{"bracket", e.bracket}}));
}

inline void run_series(const Options& o, Emitter& em) {
    const PhiDescriptor phi = parse_phi(o.phi_text);
    const SeriesVerdict v = series_test(o.d, phi);
    const std::string measure = v == SeriesVerdict::Convergent
                                    ? "zero"
                                    : (v == SeriesVerdict::Divergent ? "full" : "unknown");
    em.emit(record("series-test", {{"d", o.d}, {"phi", phi.source}},
                   {{"verdict", to_string(v)}, {"lebesgue_measure", measure}},
                   {{"bracket", nullptr}}));
}

inline void run_tailsum(const Options& o, Emitter& em) {
    if (o.K_list.empty()) {
        throw DomainError("--K is required");
    }
    for (double K : o.K_list) {
        const TailSum t = tail_sum(o.d, K);
        em.emit(record("tailsum", {{"d", o.d}, {"K", K}}, {{"value", t.value}, {"ratio", t.ratio}},
                       {{"bracket", 0.0}}));
    }
}

inline void run_level_measure(const Options& o, Emitter& em) {
    if (o.K_list.empty()) {
        throw DomainError("--K is required");
    }
    const int n = o.n > 0 ? o.n : 1;
    for (double K : o.K_list) {
        const MeasureBracket b = level_set_measure(o.d, n, K);
        em.emit(record("level-measure", {{"d", o.d}, {"n", n}, {"K", K}},
                       {{"lower", b.lower}, {"upper", b.upper},
                        {"sum_lower", b.sum_lower}, {"sum_upper", b.sum_upper}},
                       {{"bracket", 0.5 * (b.upper - b.lower)}}));
    }
}

inline void run_mc(const Options& o, Emitter& em) {
    const PhiDescriptor phi = parse_phi(o.phi_text);
    MonteCarloOptions mo;
    if (o.precision_bits != "auto") {
        const double bits = parse_real(o.precision_bits, "precision-bits");
        if (!(bits >= 1.0) || bits != std::floor(bits)) {
            throw DomainError("--precision-bits must be a positive integer or auto");
        }
        mo.start_bits = static_cast<unsigned long>(bits);
        mo.adaptive = false;
    }
    const HitStats h = monte_carlo(o.d, phi, o.samples, o.n_max, o.seed, mo);
    std::vector<double> rate_se;
    for (long n = 1; n <= h.n_max; ++n) {
        rate_se.push_back(h.hit_rate_stderr(n));
    }
    Json result = {{"valid", h.valid},
                   {"dropped", h.dropped},
                   {"per_n_hits", h.per_n_hits},
                   {"first_hit", h.first_hit},
                   {"never_hit", h.never_hit},
                   {"frac_hit_by", h.frac_hit_by},
                   {"total_hits", h.total_hits},
                   {"mean_hits", h.mean_hits()},
                   {"start_bits", h.start_bits},
                   {"max_bits_used", h.max_bits_used}};
    em.emit(record("mc",
                   {{"d", o.d}, {"phi", phi.source}, {"samples", o.samples}, {"n_max", o.n_max},
                    {"precision_bits", o.precision_bits}},
                   result, {{"stderr", {{"mean_hits", h.stderr_hits()}, {"hit_rate", rate_se}}}},
                   o.seed));
}

inline double log10_of(const Rational& q) {
    return log_of(q) / std::log(10.0);
}

inline void run_cantor(const Options& o, Emitter& em) {
    const double s = parse_real(o.s_text, "s");
    const long M = o.M > 0 ? o.M : 5;
    const Schedule sc = make_schedule(o.d, o.B, s, M, o.N, o.k_max);
    Json params = {{"d", o.d}, {"B", o.B}, {"s", s}, {"M", M}, {"N", o.N}, {"k_max", o.k_max}};
    std::vector<std::vector<std::string>> lo;
    std::vector<std::vector<std::string>> hi;
    for (int k = 0; k < sc.stages(); ++k) {
        lo.emplace_back();
        hi.emplace_back();
        for (int j = 0; j < sc.d; ++j) {
            lo.back().push_back(sc.digit_lo[k][j].get_str());
            hi.back().push_back(sc.digit_hi[k][j].get_str());
        }
    }
    Json schedule = {{"ell", sc.ell},         {"n", sc.n},          {"r", sc.r},
                     {"m", sc.m},             {"A", sc.A.values},   {"u", sc.u.convert_to<double>()},
                     {"digit_lo", lo},        {"digit_hi", hi},     {"max_order", sc.max_order()}};
    em.emit(record("cantor", params, {{"schedule", schedule}}, {{"bracket", 0.0}}));

    const long depth = o.depth > 0 ? o.depth : sc.m[sc.k_max - 1];
    const long paths = o.samples;
    const HolderReport rep = holder_report(sc, depth, paths, o.seed);
    Json holder = {{"exponent", rep.exponent}, {"nodes", rep.nodes},       {"log_C", rep.log_C},
                   {"min_e", rep.min_e},       {"violations", rep.violations}, {"flagged", rep.flagged}};
    em.emit(record("cantor", {{"depth", depth}, {"paths", paths}}, {{"holder", holder}},
                   {{"bracket", 0.0}}, o.seed));

    if (o.nodes) {
        const DigitSeq path = digit_stream(sc, DigitPolicy::Random, depth, o.seed);
        for (const auto& node : walk_path(path, sc)) {
            if (node.order == 0 || !node.defined_level) {
                continue;
            }
            const double log10_mu =
                (boost::multiprecision::log10(node.mass)).convert_to<double>();
            const double log10_len = log10_of(node.J.length);
            Json nr = {{"order", node.order},
                       {"digit", path.at(node.order).get_str()},
                       {"regime", to_string(node.J.regime)},
                       {"log10_length", log10_len},
                       {"log10_lower", log10_of(node.J.lower_bound)},
                       {"log10_upper", log10_of(node.J.upper_bound)},
                       {"bounds_hold", node.J.bounds_hold},
                       {"gap_regime", to_string(node.gap_regime)},
                       {"gap_holds", node.gap_holds},
                       {"log10_mass", log10_mu},
                       {"e", log10_mu / log10_len}};
            em.emit(record("cantor", {{"depth", depth}}, {{"node", nr}}, {{"bracket", 0.0}}, o.seed));
        }
    }
}

// Parses argv, dispatches, and returns the process exit code:
// 0 ok, 2 validation error, 3 budget or convergence failure.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Continued-fraction dimension and measure toolkit"};
    app.require_subcommand(1);
    Options o;
    app.add_flag("--csv", o.csv, "CSV output instead of JSON lines");
    app.add_option("--tol", o.tol, "tolerance for the lambda/theta M-schedule");

    auto add = [&](const std::string& name, const std::string& help) {
        return app.add_subcommand(name, help);
    };
    auto* gd = add("gd", "exponent g_d(s)");
    auto* fc = add("f", "exponent f_d(s)");
    auto* om = add("omega", "ratio f_d(s)/g_d(s)");
    auto* al = add("alphas", "optimal parameters A_1..A_d");
    auto* ps = add("pressure-sum", "sum of q_n^{-2s} B^{-g_d(s) n} over {1..M}^n");
    auto* la = add("lambda", "dimension number lambda_d(B)");
    auto* th = add("theta", "dimension number theta_d(B)");
    auto* cmp = add("compare", "lambda_d(B) against theta_d(B)");
    auto* dm = add("dim", "Hausdorff dimension of the set for a growth function");
    auto* st = add("series-test", "convergence of the level-measure series");
    auto* ts = add("tailsum", "constrained product tail sums");
    auto* lm = add("level-measure", "Lebesgue measure bracket of a level set");
    auto* mc = add("mc", "Monte Carlo hit statistics");
    auto* ca = add("cantor", "Cantor construction schedule and Holder report");

    for (auto* sub : {gd, fc, om, al, ps, la, th, cmp, dm, st, ts, lm, mc, ca}) {
        sub->add_option("--d", o.d, "progression length")->check(CLI::PositiveNumber);
        sub->add_flag("--csv", o.csv, "CSV output instead of JSON lines");
        sub->add_option("--tol", o.tol, "tolerance for the lambda/theta M-schedule");
    }
    for (auto* sub : {gd, fc, om, al, ps, ca}) {
        sub->add_option("--s", o.s_text, "exponent variable s");
    }
    al->add_option("--B", o.B, "growth base B")->required();
    ps->add_option("--B", o.B, "growth base B (default 1)");
    ca->add_option("--B", o.B, "growth base B")->required();
    for (auto* sub : {la, th, cmp}) {
        sub->add_option("--B", o.B_list, "growth base(s) B, comma separated")
            ->delimiter(',')
            ->required();
        sub->add_option("--grid", o.grid, "collocation grid size");
    }
    for (auto* sub : {ps, la, th, ca}) {
        sub->add_option("--M", o.M, "alphabet bound");
    }
    for (auto* sub : {ps, la, lm}) {
        sub->add_option("--n", o.n, "depth");
    }
    for (auto* sub : {ps, la}) {
        sub->add_option("--method", o.method, "enumerate|operator");
    }
    ps->add_option("--grid", o.grid, "collocation grid size");
    for (auto* sub : {dm, st, mc}) {
        sub->add_option("--phi", o.phi_text, "pow:B | doubexp:c,b | poly:c,k | nlogk:c,k | table:PATH")
            ->required();
    }
    for (auto* sub : {ts, lm}) {
        sub->add_option("--K", o.K_list, "threshold(s), comma separated")->delimiter(',')->required();
    }
    mc->add_option("--samples", o.samples, "number of samples");
    mc->add_option("--nmax", o.n_max, "largest n");
    mc->add_option("--precision-bits", o.precision_bits, "INT or auto");
    for (auto* sub : {mc, ca}) {
        sub->add_option("--seed", o.seed, "random seed");
    }
    ca->add_option("--N", o.N, "block length");
    ca->add_option("--kmax", o.k_max, "number of stages");
    ca->add_option("--depth", o.depth, "deepest order for the Holder report");
    ca->add_option("--samples", o.samples, "sampled paths for the Holder report");
    ca->add_flag("--nodes", o.nodes, "emit node records along one sampled path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    Emitter em(out, o.csv);
    try {
        if (o.tol <= 0.0) {
            throw DomainError("--tol must be positive");
        }
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "gd" || sub == "f" || sub == "omega") {
            run_exponent(sub, o, em);
        } else if (sub == "alphas") {
            run_alphas(o, em);
        } else if (sub == "pressure-sum") {
            run_pressure_sum(o, em);
        } else if (sub == "lambda" || sub == "theta") {
            run_lambda_like(sub, o, em);
        } else if (sub == "compare") {
            run_compare(o, em);
        } else if (sub == "dim") {
            run_dim(o, em);
        } else if (sub == "series-test") {
            run_series(o, em);
        } else if (sub == "tailsum") {
            run_tailsum(o, em);
        } else if (sub == "level-measure") {
            run_level_measure(o, em);
        } else if (sub == "mc") {
            run_mc(o, em);
        } else if (sub == "cantor") {
            if (o.B <= 0.0) {
                throw DomainError("--B is required");
            }
            run_cantor(o, em);
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

} // namespace cfdim::cli
