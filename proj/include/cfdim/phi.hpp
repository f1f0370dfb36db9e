#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace cfdim {

enum class PhiFamily { Pow, DoubExp, Poly, NLogK, Table };

// Growth function Phi(n), n >= 1.
//   pow(B)       B^n
//   doubexp(c,b) c^(n^2 b^n)
//   poly(c,k)    c n^k
//   nlogk(c,k)   c n log^k n
//   table        explicit values, 1-indexed
struct PhiDescriptor {
    PhiFamily family = PhiFamily::Pow;
    double p1 = 2.0;
    double p2 = 1.0;
    std::vector<double> table;
    std::string source; // text form, for reports

    static PhiDescriptor pow(double B) {
        if (!(B >= 1.0) || !std::isfinite(B)) {
            throw DomainError("pow family requires finite B >= 1");
        }
        return {PhiFamily::Pow, B, 0.0, {}, "pow:" + fmt(B)};
    }

    static PhiDescriptor doubexp(double c, double b) {
        if (!(c > 1.0) || !(b >= 1.0) || !std::isfinite(c) || !std::isfinite(b)) {
            throw DomainError("doubexp family requires c > 1 and b >= 1");
        }
        return {PhiFamily::DoubExp, c, b, {}, "doubexp:" + fmt(c) + "," + fmt(b)};
    }

    static PhiDescriptor poly(double c, double k) {
        if (!(c > 0.0) || !(k >= 0.0) || !std::isfinite(c) || !std::isfinite(k)) {
            throw DomainError("poly family requires c > 0 and k >= 0");
        }
        return {PhiFamily::Poly, c, k, {}, "poly:" + fmt(c) + "," + fmt(k)};
    }

    static PhiDescriptor nlogk(double c, double k) {
        if (!(c > 0.0) || !(k >= 0.0) || !std::isfinite(c) || !std::isfinite(k)) {
            throw DomainError("nlogk family requires c > 0 and k >= 0");
        }
        return {PhiFamily::NLogK, c, k, {}, "nlogk:" + fmt(c) + "," + fmt(k)};
    }

    static PhiDescriptor from_table(std::vector<double> values, std::string label = "table") {
        if (values.empty()) {
            throw DomainError("table family needs at least one value");
        }
        for (double v : values) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError("table values must be positive and finite");
            }
        }
        return {PhiFamily::Table, 0.0, 0.0, std::move(values), std::move(label)};
    }

    bool closed_family() const { return family != PhiFamily::Table; }

    // Natural log of Phi(n). Stays finite where Phi(n) itself overflows a
    // double (doubexp).
    double log_value(long n) const {
        if (n < 1) {
            throw DomainError("Phi is indexed from n = 1");
        }
        const double x = static_cast<double>(n);
        switch (family) {
        case PhiFamily::Pow:
            return x * std::log(p1);
        case PhiFamily::DoubExp:
            return x * x * std::pow(p2, x) * std::log(p1);
        case PhiFamily::Poly:
            return std::log(p1) + p2 * std::log(x);
        case PhiFamily::NLogK: {
            const double l = std::log(x);
            if (l <= 0.0) {
                return p2 == 0.0 ? std::log(p1 * x) : -std::numeric_limits<double>::infinity();
            }
            return std::log(p1) + std::log(x) + p2 * std::log(l);
        }
        case PhiFamily::Table:
            if (static_cast<std::size_t>(n) > table.size()) {
                throw DomainError("table Phi has no value at n = " + std::to_string(n));
            }
            return std::log(table[n - 1]);
        }
        return 0.0;
    }

    // Direct evaluation, so integer thresholds such as 3^n or 10 n^0 come out
    // exact; exp(log_value(n)) is off by an ulp for most of them.
    double value(long n) const {
        const double lv = log_value(n);
        const double x = static_cast<double>(n);
        switch (family) {
        case PhiFamily::Pow:
            return std::pow(p1, x);
        case PhiFamily::Poly:
            return p1 * std::pow(x, p2);
        case PhiFamily::NLogK:
            return lv == -std::numeric_limits<double>::infinity()
                       ? 0.0
                       : p1 * x * std::pow(std::log(x), p2);
        case PhiFamily::Table:
            return table[n - 1];
        case PhiFamily::DoubExp:
            break;
        }
        return std::exp(lv);
    }

    std::size_t max_index() const {
        return family == PhiFamily::Table ? table.size() : std::numeric_limits<std::size_t>::max();
    }

    static std::string fmt(double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }
};

// Exact test product >= Phi(n) whenever Phi(n) is a finite double; otherwise
// the comparison is done on logarithms.
inline bool at_least_phi(const Integer& product, const PhiDescriptor& phi, long n) {
    const double lv = phi.log_value(n);
    if (lv == -std::numeric_limits<double>::infinity()) {
        return true;
    }
    if (lv < 700.0) {
        const double v = phi.value(n);
        return Rational(product) >= rational_from_double(v);
    }
    return log_of(product) >= lv;
}

// Mini-grammar: pow:B | doubexp:c,b | poly:c,k | nlogk:c,k | table:PATH
inline PhiDescriptor parse_phi(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw DomainError("Phi descriptor must look like family:params, got '" + text + "'");
    }
    const std::string family = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (family == "table") {
        std::ifstream in(rest);
        if (!in) {
            throw DomainError("cannot open Phi table '" + rest + "'");
        }
        std::vector<double> values;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            try {
                values.push_back(std::stod(line));
            } catch (const std::exception&) {
                throw DomainError("bad value in Phi table: '" + line + "'");
            }
        }
        return PhiDescriptor::from_table(std::move(values), text);
    }
    std::vector<double> params;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw DomainError("bad Phi parameter '" + item + "'");
        }
        if (used != item.size()) {
            throw DomainError("bad Phi parameter '" + item + "'");
        }
        params.push_back(v);
    }
    auto want = [&](std::size_t count) {
        if (params.size() != count) {
            throw DomainError("Phi family '" + family + "' takes " + std::to_string(count) +
                              " parameter(s)");
        }
    };
    if (family == "pow") {
        want(1);
        return PhiDescriptor::pow(params[0]);
    }
    if (family == "doubexp") {
        want(2);
        return PhiDescriptor::doubexp(params[0], params[1]);
    }
    if (family == "poly") {
        want(2);
        return PhiDescriptor::poly(params[0], params[1]);
    }
    if (family == "nlogk") {
        want(2);
        return PhiDescriptor::nlogk(params[0], params[1]);
    }
    throw DomainError("unknown Phi family '" + family + "'");
}

struct GrowthExponents {
    double B = 1.0; // may be +inf
    double b = 1.0; // may be +inf
    bool estimate = false;
};

// B = liminf Phi(n)^{1/n}, b = liminf (log Phi(n))^{1/n}.
inline GrowthExponents growth_exponents(const PhiDescriptor& phi, long horizon) {
    if (horizon < 10) {
        throw DomainError("growth_exponents requires horizon >= 10");
    }
    const double inf = std::numeric_limits<double>::infinity();
    switch (phi.family) {
    case PhiFamily::Pow:
        return {phi.p1, 1.0, false};
    case PhiFamily::DoubExp:
        return {inf, phi.p2, false};
    case PhiFamily::Poly:
    case PhiFamily::NLogK:
        return {1.0, 1.0, false};
    case PhiFamily::Table:
        break;
    }
    const long top = std::min<long>(horizon, static_cast<long>(phi.table.size()));
    const long start = std::max<long>(1, top / 2);
    double log_b_big = inf;
    double log_b_small = inf;
    for (long n = start; n <= top; ++n) {
        const double lv = phi.log_value(n);
        log_b_big = std::min(log_b_big, lv / n);
        const double llv = lv > 0.0 ? std::log(lv) / n : 0.0;
        log_b_small = std::min(log_b_small, llv);
    }
    return {std::max(1.0, std::exp(log_b_big)), std::max(1.0, std::exp(log_b_small)), true};
}

} // namespace cfdim
