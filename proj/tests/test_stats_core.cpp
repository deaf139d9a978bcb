#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/distributions/uniform.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "dnt/stats/distributions.hpp"
#include "dnt/stats/moments.hpp"
#include "dnt/stats/normal.hpp"
#include "dnt/stats/random.hpp"

using namespace dnt;
using namespace dnt::stats;
using Catch::Matchers::WithinAbs;

namespace {

double quadrature_cdf(double x)
{
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    return 0.5 + boost::math::quadrature::gauss_kronrod<double, 61>::integrate(pdf, 0.0, x, 15, 1e-15);
}

double oracle_cdf(const DistributionSpec& s, double x)
{
    namespace bm = boost::math;
    switch (s.kind) {
    case DistributionKind::Normal: return bm::cdf(bm::normal_distribution<>(s.p1, s.p2), x);
    case DistributionKind::StudentT: return bm::cdf(bm::students_t_distribution<>(s.p1), x);
    case DistributionKind::Uniform: return bm::cdf(bm::uniform_distribution<>(s.p1, s.p2), x);
    case DistributionKind::Beta: return bm::cdf(bm::beta_distribution<>(s.p1, s.p2), x);
    case DistributionKind::Laplace: return bm::cdf(bm::laplace_distribution<>(s.p1, s.p2), x);
    case DistributionKind::Gamma: return bm::cdf(bm::gamma_distribution<>(s.p1, 1.0 / s.p2), x);
    case DistributionKind::ChiSquare: return bm::cdf(bm::chi_squared_distribution<>(s.p1), x);
    }
    return 0;
}

} // namespace

TEST_CASE("normal_cdf matches symmetry and quadrature")
{
    CHECK(normal_cdf(0.0) == 0.5);
    for (double x : {0.5, 1.3, 2.7}) CHECK_THAT(normal_cdf(-x), WithinAbs(1.0 - normal_cdf(x), 1e-15));
    CHECK_THAT(normal_cdf(1.96), WithinAbs(quadrature_cdf(1.96), 1e-10));
    CHECK_THAT(normal_cdf(1.96), WithinAbs(0.9750021, 1e-7));

    const boost::math::normal_distribution<> nd;
    double prev = 0;
    for (double x = -8; x <= 8; x += 0.01) {
        const double v = normal_cdf(x);
        CHECK(std::fabs(v - boost::math::cdf(nd, x)) < 1e-10);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("normal_quantile inverts the cdf")
{
    CHECK(normal_quantile(0.5) == 0.0);

    // bisection on the oracle CDF
    const boost::math::normal_distribution<> nd;
    double lo = 0;
    double hi = 5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (boost::math::cdf(nd, mid) < 0.975 ? lo : hi) = mid;
    }
    CHECK_THAT(normal_quantile(0.975), WithinAbs(lo, 1e-9));
    CHECK_THAT(normal_quantile(0.975), WithinAbs(1.959964, 1e-6));

    for (double x : {-3.0, -1.0, 0.25, 2.0}) CHECK_THAT(normal_quantile(normal_cdf(x)), WithinAbs(x, 1e-8));

    double prev = -INFINITY;
    // log-spaced toward both tails of [1e-6, 1 - 1e-6]
    for (double lp = -6; lp < std::log10(0.5); lp += 0.01) {
        const double p = std::pow(10.0, lp);
        CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) < 1e-9);
        CHECK(std::fabs(normal_cdf(normal_quantile(1.0 - p)) - (1.0 - p)) < 1e-9);
    }
    for (double p = 1e-6; p < 1.0 - 1e-6; p += 1e-3) {
        const double q = normal_quantile(p);
        CHECK(q > prev);
        prev = q;
    }
    for (double bad : {0.0, 1.0, -0.1, 1.5}) CHECK_THROWS_AS(normal_quantile(bad), DomainError);
}

TEST_CASE("sample is deterministic and validates parameters")
{
    const auto a = sample(case_spec(7), 50, 99);
    const auto b = sample(case_spec(7), 50, 99);
    CHECK(a.values == b.values);
    CHECK(sample(case_spec(7), 50, 100).values != a.values);

    CHECK_THROWS_AS(sample(DistributionSpec{DistributionKind::StudentT, -1, 0, 0}, 10, 1), DomainError);
    CHECK_THROWS_AS(sample(DistributionSpec{DistributionKind::Beta, 2, 0, 0}, 10, 1), DomainError);
    CHECK_THROWS_AS(sample(DistributionSpec{DistributionKind::Gamma, 1, -5, 0}, 10, 1), DomainError);
    CHECK_THROWS_AS(sample(case_spec(15), 2, 1), DomainError);
}

TEST_CASE("sample laws of large numbers")
{
    const auto u = sample(case_spec(5), 100'000, 11);
    CHECK_THAT(mean(u.values), WithinAbs(0.5, 0.005));
    CHECK(std::all_of(u.values.begin(), u.values.end(), [](double v) { return v > 0 && v < 1; }));

    const auto c = sample(case_spec(13), 100'000, 12);
    CHECK_THAT(mean(c.values), WithinAbs(4.0, 0.05));
}

TEST_CASE("every case law matches its CDF in Kolmogorov distance")
{
    const SeedScheme seeds(2024);
    for (int id = 1; id <= kNumCases; ++id) {
        const auto spec = case_spec(id);
        auto x = sample(spec, 100'000, seeds.stream(static_cast<std::uint64_t>(id), 0, "kolmogorov")).values;
        std::sort(x.begin(), x.end());
        const auto n = static_cast<double>(x.size());
        double d = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double f = oracle_cdf(spec, x[i]);
            d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
        }
        INFO(label(spec));
        CHECK(d < 0.01);
    }
}

TEST_CASE("case table and labels")
{
    CHECK(label(case_spec(1)) == "t(2)");
    CHECK(label(case_spec(5)) == "uniform(0,1)");
    CHECK(label(case_spec(8)) == "beta(6,2)");
    CHECK(label(case_spec(11)) == "gamma(1,5)");
    CHECK(label(case_spec(14)) == "chisq(20)");
    CHECK(label(case_spec(15)) == "normal(0,1)");
    CHECK(case_spec(7).kind == DistributionKind::Laplace);
    CHECK_THROWS_AS(case_spec(0), DomainError);
    CHECK_THROWS_AS(case_spec(16), DomainError);

    for (int id = 1; id <= kNumCases; ++id) CHECK(parse_distribution(label(case_spec(id))) == case_spec(id));
    CHECK(parse_distribution("Laplace") == case_spec(7));
    CHECK(parse_distribution("case:12") == case_spec(12));
    CHECK(parse_distribution("t(3)").case_id == 0);
    CHECK_THROWS_AS(parse_distribution("cauchy"), DomainError);
    CHECK_THROWS_AS(parse_distribution("beta(2)"), DomainError);
    CHECK_THROWS_AS(parse_distribution("t(-2)"), DomainError);
}

TEST_CASE("standardize")
{
    const std::vector<double> two{2, 4};
    const auto z = standardize(two);
    CHECK_THAT(z[0], WithinAbs(-1, 1e-15));
    CHECK_THAT(z[1], WithinAbs(1, 1e-15));

    const auto x = sample(case_spec(12), 200, 5).values;
    const auto once = standardize(x);
    const auto twice = standardize(once);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(twice[i], WithinAbs(once[i], 1e-12));
    const auto m = sample_moments(once);
    CHECK_THAT(m.mean, WithinAbs(0, 1e-12));
    CHECK_THAT(m.sd, WithinAbs(1, 1e-12));

    const std::vector<double> flat{5, 5, 5};
    CHECK_THROWS_AS(standardize(flat), DegenerateSampleError);
}

TEST_CASE("sample_moments")
{
    const std::vector<double> x{-1, -1, 1, 1};
    const auto m = sample_moments(x);
    CHECK(m.mean == 0);
    CHECK(m.skewness == 0);
    CHECK_THAT(m.kurtosis, WithinAbs(1, 1e-15));

    auto half = sample(case_spec(9), 50, 3).values;
    const double mu = mean(half);
    std::vector<double> mirrored = half;
    for (double v : half) mirrored.push_back(2 * mu - v);
    CHECK_THAT(sample_moments(mirrored).skewness, WithinAbs(0, 1e-12));

    const auto big = sample(case_spec(15), 100'000, 8);
    CHECK_THAT(sample_moments(big).kurtosis, WithinAbs(3, 0.1));

    const std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS(sample_moments(flat), DegenerateSampleError);
}

TEST_CASE("seed streams are pure and collision free")
{
    const SeedScheme s(20210601);
    CHECK(s.stream(3, 4, "test") == SeedScheme(20210601).stream(3, 4, "test"));
    CHECK(s.stream(3, 4, "test") != SeedScheme(20210602).stream(3, 4, "test"));

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(1'100'000);
    const char* purposes[] = {"test", "train-h0", "train-h1", "calibrate"};
    std::size_t count = 0;
    for (const char* p : purposes) {
        for (std::uint64_t c = 0; c <= 15; ++c) {
            for (std::uint64_t r = 0; r < 15'625; ++r) {
                seen.insert(s.stream(c, r, p));
                ++count;
            }
        }
    }
    CHECK(count == 1'000'000);
    CHECK(seen.size() == count);
}
