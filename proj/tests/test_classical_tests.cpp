#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "dnt/classical_tests.hpp"
#include "dnt/engine.hpp"
#include "dnt/stats/random.hpp"
#include "oracle.hpp"

using namespace dnt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double oracle_value(ClassicalTest t, const std::vector<double>& x)
{
    switch (t) {
    case ClassicalTest::KS: return oracle::ks(x);
    case ClassicalTest::AD: return oracle::ad(x);
    case ClassicalTest::JB: return oracle::jb(x);
    case ClassicalTest::GLB: return oracle::glb_sample(x);
    case ClassicalTest::GG: return oracle::gg(x);
    case ClassicalTest::BS: return oracle::bs(x);
    }
    return NAN;
}

std::vector<double> draw(int case_id, std::size_t n, std::uint64_t seed)
{
    return stats::sample(stats::case_spec(case_id), n, seed).values;
}

} // namespace

TEST_CASE("directions and names")
{
    for (auto t : kClassicalTests) {
        CHECK(direction_of(t) == (t == ClassicalTest::BS ? Direction::RejectTwoSided : Direction::RejectLarge));
        const auto s = compute(t, draw(2, 30, 1));
        CHECK(s.name == t);
        CHECK(s.direction == direction_of(t));
        CHECK(std::isfinite(s.value));
    }
    CHECK(to_string(ClassicalTest::GLB) == "GLB");
}

TEST_CASE("KS examples")
{
    // u_i = p_i with p_i = (i - 0.5) / n
    std::vector<double> u;
    for (int i = 1; i <= 100; ++i) u.push_back((i - 0.5) / 100.0);
    CHECK_THAT(ks_from_u(u), WithinAbs(0.005, 1e-12));

    // three-point sample through the fitted-CDF path (below the n >= 8 gate)
    const std::vector<double> x{-1, 0, 1};
    const auto f = fitted_cdf(x);
    CHECK_THAT(f.lower[0], WithinAbs(0.1103357, 1e-7));
    CHECK_THAT(ks_from_cdf(f), WithinAbs(oracle::ks_u(oracle::fitted_u(x)), 1e-12));
    CHECK_THAT(ks_from_cdf(f), WithinAbs(0.2229977, 1e-7));
}

TEST_CASE("AD examples")
{
    const std::vector<double> x{-1, 0, 1};
    CHECK_THAT(ad_from_cdf(fitted_cdf(x)), WithinAbs(oracle::ad_u(oracle::fitted_u(x)), 1e-12));
    CHECK_THAT(ad_from_cdf(fitted_cdf(x)), WithinAbs(0.246, 1e-3));

    const stats::SeedScheme seeds(3);
    for (std::uint64_t r = 0; r < 1000; ++r) {
        const auto y = draw(static_cast<int>(r % 15) + 1, 8 + r % 40, seeds.stream(0, r, "ad-positive"));
        CHECK(ad_statistic(y).value > 0);
    }
}

TEST_CASE("JB examples")
{
    const std::vector<double> x{-1, -1, 1, 1, -1, -1, 1, 1};
    CHECK_THAT(jb_statistic(x).value, WithinAbs(8.0 / 6.0, 1e-12));
    // n = 4 version of the same shape through the formula: (4/6)(0 + 4/4) = 2/3
    const auto m = stats::sample_moments(std::vector<double>{-1, -1, 1, 1});
    CHECK_THAT(4.0 / 6.0 * (m.skewness * m.skewness + (m.kurtosis - 3) * (m.kurtosis - 3) / 4), WithinAbs(2.0 / 3.0, 1e-15));
    for (std::uint64_t s = 0; s < 200; ++s) CHECK(jb_statistic(draw(7, 20, s)).value >= 0);
}

TEST_CASE("GLB u-level seam")
{
    const double e = 0.01;
    const std::vector<double> u{0.5 - e, 0.5, 0.5 + e};
    CHECK_THAT(glb_from_u(u), WithinAbs(oracle::glb_u(u), 1e-12));
    CHECK_THAT(glb_from_u(u), WithinAbs(1.2130237, 1e-6));

    std::vector<double> even;
    std::vector<double> edges;
    for (int i = 1; i <= 20; ++i) {
        even.push_back(i / 21.0);
        edges.push_back(i <= 10 ? 1e-3 * i : 1.0 - 1e-3 * (21 - i));
    }
    CHECK(glb_from_u(edges) > glb_from_u(even));
}

TEST_CASE("GLB order-statistic transform")
{
    // under a perfect fit the Beta(i, n-i+1) transform maps u_(i) to its own CDF level
    const std::size_t n = 25;
    std::vector<double> u;
    for (std::size_t i = 1; i <= n; ++i) u.push_back(static_cast<double>(i) / static_cast<double>(n + 1));
    const auto p = glb_order_probabilities(u);
    REQUIRE(p.size() == n);
    CHECK(std::is_sorted(p.begin(), p.end()));
    for (double v : p) {
        CHECK(v > 0.3);
        CHECK(v < 0.7);
    }
}

TEST_CASE("GG examples")
{
    const auto big = draw(15, 100'000, 17);
    CHECK_THAT(robust_spread(big), WithinAbs(1.0, 0.02));

    auto half = draw(10, 30, 4);
    const double mu = stats::mean(half);
    std::vector<double> mirrored = half;
    for (double v : half) mirrored.push_back(2 * mu - v);
    const auto m = stats::sample_moments(mirrored);
    const double j = robust_spread(mirrored);
    CHECK_THAT(m.m3 / (j * j * j), WithinAbs(0.0, 1e-12));

    for (std::uint64_t s = 0; s < 200; ++s) CHECK(gg_statistic(draw(3, 15, s)).value >= 0);
}

TEST_CASE("BS examples")
{
    CHECK_THAT(bs_omega(draw(15, 100'000, 9)), WithinAbs(3.0, 0.05));
    const double heavy = bs_statistic(draw(7, 1000, 10)).value;
    const double light = bs_statistic(draw(5, 1000, 11)).value;
    CHECK(heavy > 0);
    CHECK(light < 0);
}

TEST_CASE("statistics agree with the formula oracle on small samples")
{
    const stats::SeedScheme seeds(4242);
    std::mt19937_64 pick(7);
    for (std::uint64_t r = 0; r < 50; ++r) {
        const int id = static_cast<int>(pick() % 15) + 1;
        const std::size_t n = 8 + pick() % 13;
        const auto x = draw(id, n, seeds.stream(static_cast<std::uint64_t>(id), r, "oracle"));
        for (auto t : kClassicalTests) {
            INFO(to_string(t) << " case " << id << " n " << n);
            const double want = oracle_value(t, x);
            const double got = compute(t, x).value;
            CHECK_THAT(got, WithinAbs(want, 1e-9) || WithinRel(want, 1e-9));
        }
    }
}

TEST_CASE("affine and permutation invariance")
{
    std::mt19937_64 g(99);
    std::uniform_real_distribution<double> scale(0.1, 50.0);
    std::uniform_real_distribution<double> shift(-100.0, 100.0);
    for (std::uint64_t r = 0; r < 30; ++r) {
        auto x = draw(static_cast<int>(r % 15) + 1, 40, r);
        const double a = scale(g);
        const double b = shift(g);
        std::vector<double> y;
        for (double v : x) y.push_back(a * v + b);
        std::vector<double> p = x;
        std::shuffle(p.begin(), p.end(), g);
        for (auto t : kClassicalTests) {
            const double base = compute(t, x).value;
            INFO(to_string(t));
            CHECK_THAT(compute(t, y).value, WithinAbs(base, 1e-9 * std::max(1.0, std::fabs(base))));
            CHECK_THAT(compute(t, p).value, WithinAbs(base, 1e-9 * std::max(1.0, std::fabs(base))));
        }
    }
}

TEST_CASE("degenerate samples are rejected")
{
    const std::vector<double> flat(10, 2.0);
    const std::vector<double> short_sample{1, 2, 3, 4, 5, 6, 7};
    std::vector<double> bad{1, 2, 3, 4, 5, 6, 7, 8};
    bad[3] = std::nan("");
    for (auto t : kClassicalTests) {
        CHECK_THROWS_AS(compute(t, flat), DegenerateSampleError);
        CHECK_THROWS_AS(compute(t, short_sample), DegenerateSampleError);
        CHECK_THROWS_AS(compute(t, bad), DomainError);
    }
}

TEST_CASE("calibrated null rejection rate")
{
    const stats::SeedScheme seeds(31337);
    for (auto t : kClassicalTests) {
        const auto dir = direction_of(t);
        const StatisticFn fn = [t](std::span<const double> x) { return compute(t, x).value; };
        const double cut = calibrate_cutoff(fn, 100, 20'000, 0.05, seeds.stream(1, static_cast<std::uint64_t>(t), "cal"), dir);
        const auto normal = stats::case_spec(15);
        int hits = 0;
        for (std::uint64_t r = 0; r < 5000; ++r) {
            const auto x = stats::sample(normal, 100, seeds.stream(15, r, "fresh"));
            hits += rejects(fn(x.values), cut, dir);
        }
        INFO(to_string(t));
        CHECK_THAT(hits / 5000.0, WithinAbs(0.05, 0.013));
    }
}
