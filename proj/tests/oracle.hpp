#pragma once

// Straight-from-formula reference implementations used as test oracles.
// Nothing here calls into the library; CDFs come from Boost.Math.

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

using real = long double;

inline real mean(const std::vector<double>& x)
{
    real s = 0;
    for (double v : x) s += v;
    return s / static_cast<real>(x.size());
}

inline real central(const std::vector<double>& x, int k)
{
    const real mu = mean(x);
    real s = 0;
    for (double v : x) s += std::pow(static_cast<real>(v) - mu, k);
    return s / static_cast<real>(x.size());
}

inline double phi(double z)
{
    return boost::math::cdf(boost::math::normal_distribution<double>(0.0, 1.0), z);
}

// u_i = Phi((x_(i) - mean) / population sd), ascending.
inline std::vector<double> fitted_u(std::vector<double> x)
{
    std::sort(x.begin(), x.end());
    const real mu = mean(x);
    const real sd = std::sqrt(central(x, 2));
    std::vector<double> u;
    for (double v : x) u.push_back(phi(static_cast<double>((v - mu) / sd)));
    return u;
}

inline double ks_u(const std::vector<double>& u)
{
    const auto n = static_cast<real>(u.size());
    real d = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const real i = static_cast<real>(k + 1);
        d = std::max(d, i / n - u[k]);
        d = std::max(d, u[k] - (i - 1) / n);
    }
    return static_cast<double>(d);
}

inline double ad_u(const std::vector<double>& u)
{
    const std::size_t n = u.size();
    real s = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        s += (2.0L * k - 1) * (std::log(static_cast<real>(u[k - 1])) + std::log(1.0L - u[n - k]));
    }
    return static_cast<double>(-static_cast<real>(n) - s / n);
}

inline double glb_u(const std::vector<double>& u)
{
    const std::size_t n = u.size();
    real s = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        s += (2.0L * n + 1 - 2.0L * i) * std::log(static_cast<real>(u[i - 1])) +
             (2.0L * i - 1) * std::log(1.0L - u[i - 1]);
    }
    return static_cast<double>(-static_cast<real>(n) - s / n);
}

// Order-statistic probabilities p_i = F_Beta(i, n-i+1)(u_(i)), sorted, then P_s.
inline double glb_sample(const std::vector<double>& x)
{
    const auto u = fitted_u(x);
    const std::size_t n = u.size();
    std::vector<double> p;
    for (std::size_t i = 1; i <= n; ++i) {
        boost::math::beta_distribution<double> b(static_cast<double>(i), static_cast<double>(n - i + 1));
        p.push_back(boost::math::cdf(b, u[i - 1]));
    }
    std::sort(p.begin(), p.end());
    return glb_u(p);
}

inline double ks(const std::vector<double>& x) { return ks_u(fitted_u(x)); }
inline double ad(const std::vector<double>& x) { return ad_u(fitted_u(x)); }

inline double jb(const std::vector<double>& x)
{
    const real m2 = central(x, 2);
    const real s = central(x, 3) / std::pow(m2, 1.5L);
    const real k = central(x, 4) / (m2 * m2);
    return static_cast<double>(x.size() / 6.0L * (s * s + (k - 3) * (k - 3) / 4));
}

inline double median(std::vector<double> x)
{
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

inline double gg(const std::vector<double>& x)
{
    const real n = static_cast<real>(x.size());
    const real med = median(x);
    real a = 0;
    for (double v : x) a += std::fabs(static_cast<real>(v) - med);
    const real j = std::sqrt(std::numbers::pi_v<real> / 2) * a / n;
    const real t1 = central(x, 3) / std::pow(j, 3);
    const real t2 = central(x, 4) / std::pow(j, 4) - 3;
    return static_cast<double>(n / 6 * t1 * t1 + n / 64 * t2 * t2);
}

inline double bs(const std::vector<double>& x)
{
    const real n = static_cast<real>(x.size());
    const real mu = mean(x);
    const real sigma = std::sqrt(central(x, 2));
    real tau = 0;
    for (double v : x) tau += std::fabs(static_cast<real>(v) - mu);
    tau /= n;
    const real omega = 13.29L * (std::log(sigma) - std::log(tau));
    return static_cast<double>(std::sqrt(n + 2) * (omega - 3) / 3.54L);
}

} // namespace oracle
