#include "sdlab/specs.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>

#include "sdlab/exponents.hpp"

namespace sdlab {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// "k=v,k=v" into a map; duplicate or malformed keys are errors.
std::map<std::string, std::string> key_values(std::string_view s, std::string_view context) {
    std::map<std::string, std::string> kv;
    if (s.empty()) return kv;
    for (const auto& item : split(s, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument(std::string(context) + ": expected key=value, got '" + item + "'");
        if (!kv.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
            throw std::invalid_argument(std::string(context) + ": duplicate key '" + item.substr(0, eq) + "'");
    }
    return kv;
}

void reject_unknown(const std::map<std::string, std::string>& kv, std::initializer_list<std::string_view> known,
                    std::string_view context) {
    for (const auto& [k, v] : kv) {
        bool ok = false;
        for (auto name : known) ok = ok || k == name;
        if (!ok) throw std::invalid_argument(std::string(context) + ": unknown key '" + k + "'");
    }
}

long long parse_integer(std::string_view text) {
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
    return v;
}

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ':')) out.push_back(parse_number(part));
    return out;
}

}  // namespace

double parse_number(std::string_view text) {
    if (text == "inf" || text == "infinity") return kInfinity;
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const double den = parse_number(text.substr(slash + 1));
        if (den == 0.0 || !std::isfinite(den))
            throw std::invalid_argument("bad denominator in '" + std::string(text) + "'");
        return parse_number(text.substr(0, slash)) / den;
    }
    const std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

GridSpec parse_grid_spec(std::string_view text) {
    const auto kv = key_values(text, "grid");
    reject_unknown(kv, {"n", "L", "a"}, "grid");
    if (!kv.count("n") || !kv.count("L")) throw std::invalid_argument("grid: n and L are required");
    GridSpec g;
    g.dimension = static_cast<int>(parse_integer(kv.at("n")));
    g.depth = static_cast<int>(parse_integer(kv.at("L")));
    if (g.dimension < 1) throw std::invalid_argument("grid: n must be >= 1");
    if (g.depth < 0) throw std::invalid_argument("grid: L must be >= 0");
    if (kv.count("a")) {
        for (const auto& part : split(kv.at("a"), ':')) g.shift.push_back(static_cast<int>(parse_integer(part)));
        if (g.shift.size() != static_cast<std::size_t>(g.dimension))
            throw std::invalid_argument("grid: shift needs one component per dimension");
    }
    return g;
}

GridFunction parse_function_spec(std::string_view text, CellLattice lattice) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("function spec needs 'kind:args': " + std::string(text));
    const std::string kind(text.substr(0, colon));
    const std::string_view args = text.substr(colon + 1);

    if (kind == "const") return synthesize(ConstantSpec{parse_number(args)}, lattice);

    const auto kv = key_values(args, kind);
    if (kind == "indicator") {
        reject_unknown(kv, {"cells"}, kind);
        if (!kv.count("cells")) throw std::invalid_argument("indicator: cells=... is required");
        IndicatorSpec spec;
        for (const auto& range : split(kv.at("cells"), '|')) {
            const auto dash = range.find('-');
            const long long lo = parse_integer(range.substr(0, dash));
            const long long hi = dash == std::string::npos ? lo : parse_integer(range.substr(dash + 1));
            if (lo < 0 || hi < lo) throw std::invalid_argument("indicator: bad cell range '" + range + "'");
            for (long long c = lo; c <= hi; ++c) spec.cells.push_back(static_cast<std::size_t>(c));
        }
        return synthesize(spec, lattice);
    }
    if (kind == "power") {
        reject_unknown(kv, {"a", "center"}, kind);
        if (!kv.count("a")) throw std::invalid_argument("power: a=... is required");
        PowerSpec spec{parse_number(kv.at("a")), {}};
        if (kv.count("center")) spec.center = parse_point(kv.at("center"));
        return synthesize(spec, lattice);
    }
    if (kind == "random") {
        reject_unknown(kv, {"seed", "dist", "sigma", "lo", "hi"}, kind);
        if (!kv.count("seed")) throw std::invalid_argument("random: seed=... is required");
        RandomSpec spec;
        spec.seed = static_cast<std::uint64_t>(parse_integer(kv.at("seed")));
        if (kv.count("dist")) {
            const auto& d = kv.at("dist");
            if (d == "lognormal") spec.kind = RandomKind::LogNormal;
            else if (d == "uniform") spec.kind = RandomKind::Uniform;
            else throw std::invalid_argument("random: dist must be lognormal or uniform");
        }
        if (kv.count("sigma")) spec.sigma = parse_number(kv.at("sigma"));
        if (kv.count("lo")) spec.lo = parse_number(kv.at("lo"));
        if (kv.count("hi")) spec.hi = parse_number(kv.at("hi"));
        return synthesize(spec, lattice);
    }
    throw std::invalid_argument("unknown function kind '" + kind + "'");
}

std::vector<FamilyMember> parse_family_spec(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || text.substr(0, colon) != "power")
        throw std::invalid_argument("family spec must look like power:a=<lo>..<hi>:<count>");
    const auto kv = key_values(text.substr(colon + 1), "family");
    reject_unknown(kv, {"a", "center"}, "family");
    if (!kv.count("a")) throw std::invalid_argument("family: a=<lo>..<hi>:<count> is required");
    const std::string& range = kv.at("a");
    const auto dots = range.find("..");
    const auto last = range.rfind(':');
    if (dots == std::string::npos || last == std::string::npos || last < dots)
        throw std::invalid_argument("family: a must be <lo>..<hi>:<count>");
    const double lo = parse_number(range.substr(0, dots));
    const double hi = parse_number(range.substr(dots + 2, last - dots - 2));
    const long long count = parse_integer(range.substr(last + 1));
    if (count < 1) throw std::invalid_argument("family: count must be >= 1");
    if (count > 1 && !(hi > lo)) throw std::invalid_argument("family: need lo < hi");
    std::vector<FamilyMember> out;
    for (long long i = 0; i < count; ++i) {
        const double a = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        std::string spec = "power:a=" + format_number(a);
        if (kv.count("center")) spec += ",center=" + kv.at("center");
        out.push_back({std::move(spec), a});
    }
    return out;
}

std::string format_number(double x) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace sdlab
