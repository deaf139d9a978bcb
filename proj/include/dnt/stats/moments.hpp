#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dnt/errors.hpp"
#include "dnt/stats/distributions.hpp"

namespace dnt::stats {

struct Moments {
    double mean = 0;
    double sd = 0;       ///< population (1/n) standard deviation
    double skewness = 0; ///< m3 / m2^(3/2)
    double kurtosis = 0; ///< m4 / m2^2 (normal = 3)
    double m2 = 0;
    double m3 = 0;
    double m4 = 0;
};

inline double mean(std::span<const double> x)
{
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Central moments with 1/n normalization.
inline Moments sample_moments(std::span<const double> x)
{
    if (x.size() < 3) throw DegenerateSampleError("moments need at least 3 observations");
    Moments m;
    m.mean = mean(x);
    for (double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    const auto n = static_cast<double>(x.size());
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    if (!(m.m2 > 0)) throw DegenerateSampleError("sample has zero variance");
    m.sd = std::sqrt(m.m2);
    m.skewness = m.m3 / (m.m2 * m.sd);
    m.kurtosis = m.m4 / (m.m2 * m.m2);
    return m;
}

inline Moments sample_moments(const Sample& x) { return sample_moments(x.values); }

/// (x - mean) / sd with the population sd; result has mean 0 and 1/n-variance 1.
inline std::vector<double> standardize(std::span<const double> x)
{
    if (x.empty()) throw DegenerateSampleError("empty sample");
    const double mu = mean(x);
    double ss = 0;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(x.size()));
    if (!(sd > 0) || !std::isfinite(sd)) throw DegenerateSampleError("sample has zero variance");
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return (v - mu) / sd; });
    return out;
}

inline Sample standardize(const Sample& x)
{
    return Sample{standardize(std::span<const double>(x.values)), x.spec, x.seed};
}

/// Sorted copy of the standardized sample. Sorting first makes the result
/// exactly permutation invariant (the sums then run in a fixed order).
inline std::vector<double> sorted_standardized(std::span<const double> x)
{
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    return standardize(v);
}

inline double median(std::span<const double> x)
{
    if (x.empty()) throw DegenerateSampleError("median of empty sample");
    std::vector<double> v(x.begin(), x.end());
    const auto n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace dnt::stats
