#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dnt/errors.hpp"
#include "dnt/stats/random.hpp"

namespace dnt::stats {

enum class DistributionKind { Normal, StudentT, Uniform, Beta, Laplace, Gamma, ChiSquare };

/// One of the simulation laws. Parameter meaning depends on kind:
///   Normal (mean, sd), StudentT (df), Uniform (lo, hi), Beta (a, b),
///   Laplace (location, scale), Gamma (shape, rate), ChiSquare (df).
struct DistributionSpec {
    DistributionKind kind = DistributionKind::Normal;
    double p1 = 0.0;
    double p2 = 1.0;
    int case_id = 15;

    bool operator==(const DistributionSpec&) const = default;
};

inline constexpr int kNumCases = 15;
inline constexpr int kNullCase = 15;

inline void validate(const DistributionSpec& s)
{
    auto fail = [](const char* what) { throw DomainError(std::string("invalid distribution: ") + what); };
    if (!std::isfinite(s.p1) || !std::isfinite(s.p2)) fail("non-finite parameter");
    switch (s.kind) {
    case DistributionKind::Normal:
        if (s.p2 <= 0) fail("normal sd must be > 0");
        break;
    case DistributionKind::StudentT:
        if (s.p1 <= 0) fail("t df must be > 0");
        break;
    case DistributionKind::Uniform:
        if (!(s.p1 < s.p2)) fail("uniform needs lo < hi");
        break;
    case DistributionKind::Beta:
        if (s.p1 <= 0 || s.p2 <= 0) fail("beta shapes must be > 0");
        break;
    case DistributionKind::Laplace:
        if (s.p2 <= 0) fail("laplace scale must be > 0");
        break;
    case DistributionKind::Gamma:
        if (s.p1 <= 0 || s.p2 <= 0) fail("gamma shape and rate must be > 0");
        break;
    case DistributionKind::ChiSquare:
        if (s.p1 <= 0) fail("chi-square df must be > 0");
        break;
    }
    if (s.case_id < 0 || s.case_id > kNumCases) fail("case id out of range");
}

/// Simulation case table; 1..14 are the alternatives, 15 is N(0,1).
inline DistributionSpec case_spec(int case_id)
{
    using K = DistributionKind;
    static constexpr std::array<DistributionSpec, kNumCases> table{{
        {K::StudentT, 2, 0, 1},
        {K::StudentT, 5, 0, 2},
        {K::StudentT, 10, 0, 3},
        {K::StudentT, 50, 0, 4},
        {K::Uniform, 0, 1, 5},
        {K::Beta, 2, 2, 6},
        {K::Laplace, 0, 1, 7},
        {K::Beta, 6, 2, 8},
        {K::Beta, 3, 2, 9},
        {K::Beta, 2, 1, 10},
        {K::Gamma, 1, 5, 11},
        {K::Gamma, 4, 5, 12},
        {K::ChiSquare, 4, 0, 13},
        {K::ChiSquare, 20, 0, 14},
        {K::Normal, 0, 1, 15},
    }};
    if (case_id < 1 || case_id > kNumCases) {
        throw DomainError("case id must be in 1..15, got " + std::to_string(case_id));
    }
    return table[static_cast<std::size_t>(case_id - 1)];
}

namespace detail {

inline std::string fmt_param(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace detail

/// Short label such as "t(2)", "beta(6,2)", "laplace(0,1)".
inline std::string label(const DistributionSpec& s)
{
    using detail::fmt_param;
    switch (s.kind) {
    case DistributionKind::Normal: return "normal(" + fmt_param(s.p1) + "," + fmt_param(s.p2) + ")";
    case DistributionKind::StudentT: return "t(" + fmt_param(s.p1) + ")";
    case DistributionKind::Uniform: return "uniform(" + fmt_param(s.p1) + "," + fmt_param(s.p2) + ")";
    case DistributionKind::Beta: return "beta(" + fmt_param(s.p1) + "," + fmt_param(s.p2) + ")";
    case DistributionKind::Laplace: return "laplace(" + fmt_param(s.p1) + "," + fmt_param(s.p2) + ")";
    case DistributionKind::Gamma: return "gamma(" + fmt_param(s.p1) + "," + fmt_param(s.p2) + ")";
    case DistributionKind::ChiSquare: return "chisq(" + fmt_param(s.p1) + ")";
    }
    return "?";
}

/// Parses "t(5)", "beta(2,1)", "laplace", "uniform", "normal", "chisq(4)",
/// "gamma(1,5)" or "case:7". Names are case-insensitive; omitted parameters
/// take the standard values (normal(0,1), uniform(0,1), laplace(0,1)).
inline DistributionSpec parse_distribution(std::string_view text)
{
    std::string s = detail::trim(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s.empty()) throw DomainError("empty distribution label");

    if (s.rfind("case:", 0) == 0) {
        int id = 0;
        const auto* first = s.data() + 5;
        const auto* last = s.data() + s.size();
        auto [p, ec] = std::from_chars(first, last, id);
        if (ec != std::errc() || p != last) throw DomainError("bad case label: " + s);
        return case_spec(id);
    }

    std::string name = s;
    std::vector<double> params;
    if (const auto open = s.find('('); open != std::string::npos) {
        if (s.back() != ')') throw DomainError("unbalanced parentheses in: " + s);
        name = detail::trim(std::string_view(s).substr(0, open));
        std::string_view inner = std::string_view(s).substr(open + 1, s.size() - open - 2);
        while (!inner.empty()) {
            const auto comma = inner.find(',');
            const std::string tok = detail::trim(inner.substr(0, comma));
            double v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (tok.empty() || ec != std::errc() || p != tok.data() + tok.size()) {
                throw DomainError("bad parameter '" + tok + "' in: " + s);
            }
            params.push_back(v);
            if (comma == std::string_view::npos) break;
            inner.remove_prefix(comma + 1);
        }
    }

    auto need = [&](std::size_t lo, std::size_t hi) {
        if (params.size() < lo || params.size() > hi) {
            throw DomainError("wrong number of parameters for " + name);
        }
    };
    DistributionSpec out;
    out.case_id = 0;
    using K = DistributionKind;
    if (name == "normal" || name == "n" || name == "gaussian") {
        need(0, 2);
        out = {K::Normal, params.size() > 0 ? params[0] : 0.0, params.size() > 1 ? params[1] : 1.0, 0};
    } else if (name == "t" || name == "student" || name == "studentt") {
        need(1, 1);
        out = {K::StudentT, params[0], 0.0, 0};
    } else if (name == "uniform" || name == "u") {
        need(0, 2);
        if (params.size() == 1) throw DomainError("uniform takes 0 or 2 parameters");
        out = {K::Uniform, params.empty() ? 0.0 : params[0], params.empty() ? 1.0 : params[1], 0};
    } else if (name == "beta") {
        need(2, 2);
        out = {K::Beta, params[0], params[1], 0};
    } else if (name == "laplace") {
        need(0, 2);
        out = {K::Laplace, params.size() > 0 ? params[0] : 0.0, params.size() > 1 ? params[1] : 1.0, 0};
    } else if (name == "gamma") {
        need(2, 2);
        out = {K::Gamma, params[0], params[1], 0};
    } else if (name == "chisq" || name == "chisquare" || name == "chi2") {
        need(1, 1);
        out = {K::ChiSquare, params[0], 0.0, 0};
    } else {
        throw DomainError("unknown distribution: " + name);
    }
    // Attach the case id when the label names one of the table laws.
    for (int id = 1; id <= kNumCases; ++id) {
        const auto c = case_spec(id);
        if (c.kind == out.kind && c.p1 == out.p1 &&
            (c.p2 == out.p2 || out.kind == K::StudentT || out.kind == K::ChiSquare)) {
            out.case_id = id;
            out.p2 = c.p2;
            break;
        }
    }
    validate(out);
    return out;
}

/// A drawn sample together with its provenance.
struct Sample {
    std::vector<double> values;
    DistributionSpec spec;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return values.size(); }
};

/// One variate from `spec` using `rng`.
inline double draw(const DistributionSpec& s, Rng& rng)
{
    switch (s.kind) {
    case DistributionKind::Normal:
        return s.p1 + s.p2 * rng.normal();
    case DistributionKind::StudentT: {
        const double z = rng.normal();
        const double chi2 = 2.0 * rng.gamma(0.5 * s.p1);
        return z / std::sqrt(chi2 / s.p1);
    }
    case DistributionKind::Uniform:
        return s.p1 + (s.p2 - s.p1) * rng.uniform();
    case DistributionKind::Beta: {
        const double x = rng.gamma(s.p1);
        const double y = rng.gamma(s.p2);
        return x / (x + y);
    }
    case DistributionKind::Laplace: {
        const double u = rng.uniform() - 0.5;
        const double mag = -std::log1p(-2.0 * std::fabs(u));
        return s.p1 + s.p2 * (u < 0 ? -mag : mag);
    }
    case DistributionKind::Gamma:
        return rng.gamma(s.p1) / s.p2;
    case DistributionKind::ChiSquare:
        return 2.0 * rng.gamma(0.5 * s.p1);
    }
    return 0.0;
}

/// n i.i.d. draws from `spec`; a pure function of (spec, n, seed).
inline Sample sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed)
{
    validate(spec);
    if (n < 3) throw DomainError("sample size must be at least 3");
    Rng rng(seed);
    Sample out{std::vector<double>(n), spec, seed};
    for (auto& v : out.values) v = draw(spec, rng);
    return out;
}

} // namespace dnt::stats
