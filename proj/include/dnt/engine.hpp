#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <string_view>
#include <span>
#include <vector>

#include "dnt/classical_tests.hpp"
#include "dnt/errors.hpp"
#include "dnt/features.hpp"
#include "dnt/metric_learning.hpp"
#include "dnt/stats/distributions.hpp"
#include "dnt/stats/random.hpp"

namespace dnt {

/// 1-based index of the (1 - alpha) empirical quantile among n values: ceil((1 - alpha) n).
inline std::size_t cutoff_rank(std::size_t n, double alpha)
{
    if (n == 0) throw DomainError("cutoff_rank: no values");
    if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must lie in (0,1)");
    // The small offset keeps products like 0.95 * 100 from rounding up to 96.
    const double pos = std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(pos, 1.0)), 1, n);
}

/// Order statistic ceil((1 - alpha) n) of the values (copied and sorted).
inline double empirical_cutoff(std::vector<double> values, double alpha)
{
    std::sort(values.begin(), values.end());
    return values[cutoff_rank(values.size(), alpha) - 1];
}

/// Strict comparison; two-sided statistics are compared on |value|.
inline bool rejects(double statistic, double cutoff, Direction dir = Direction::RejectLarge)
{
    const double v = dir == Direction::RejectTwoSided ? std::fabs(statistic) : statistic;
    return v > cutoff;
}

using StatisticFn = std::function<double(std::span<const double>)>;

/// Purpose tag of the null samples drawn by calibrate_cutoff.
inline constexpr std::string_view kCalibratePurpose = "calibrate";

/// Statistic values on `reps` fresh N(0,1) samples of size n (replicate r uses
/// SeedScheme(seed).stream(15, r, "calibrate")). Two-sided values are folded to |value|.
inline std::vector<double> simulate_null(const StatisticFn& statistic, std::size_t n, std::size_t reps,
                                         std::uint64_t seed, Direction dir = Direction::RejectLarge)
{
    const stats::SeedScheme seeds(seed);
    const auto normal = stats::case_spec(stats::kNullCase);
    std::vector<double> values(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const auto x = stats::sample(normal, n, seeds.stream(stats::kNullCase, r, kCalibratePurpose));
        const double v = statistic(x.values);
        values[r] = dir == Direction::RejectTwoSided ? std::fabs(v) : v;
    }
    return values;
}

/// Monte-Carlo rejection cutoff at level alpha for a statistic that rejects large values.
inline double calibrate_cutoff(const StatisticFn& statistic, std::size_t n, std::size_t reps, double alpha,
                               std::uint64_t seed, Direction dir = Direction::RejectLarge)
{
    if (reps < 100) throw DomainError("calibrate_cutoff: reps must be at least 100");
    return empirical_cutoff(simulate_null(statistic, n, reps, seed, dir), alpha);
}

struct TrainConfig {
    std::size_t n = 100;
    std::size_t h0_pool = 50'000;
    double h0_keep_fraction = 0.01;
    std::size_t h1_count = 1'000;
    stats::DistributionSpec h1_spec = stats::case_spec(4); // t(50)
    std::size_t d = 100;
    LmnnConfig lmnn;
    std::uint64_t master_seed = 20210601;
    ExtractorId extractor = ExtractorId::RawOrder;
    double alpha = 0.05;
    /// Calibrate on a fresh null draw instead of reusing the training pool.
    bool fresh_null = false;

    std::size_t keep_count() const
    {
        return static_cast<std::size_t>(std::llround(h0_keep_fraction * static_cast<double>(h0_pool)));
    }

    void validate() const
    {
        if (n < 8) throw ConfigError("n must be at least 8");
        if (h0_pool == 0 || h1_count == 0 || d == 0) throw ConfigError("h0_pool, h1_count and d must be positive");
        if (!(h0_keep_fraction > 0 && h0_keep_fraction <= 1)) throw ConfigError("h0_keep_fraction must lie in (0,1]");
        if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0,1)");
        if (keep_count() < lmnn.k + 1) throw ConfigError("h0_keep_fraction * h0_pool must be at least lmnn.k + 1");
        if (h1_count < lmnn.k + 1) throw ConfigError("h1_count must be at least lmnn.k + 1");
        if (!(lmnn.push_weight > 0) || !(lmnn.margin > 0) || !(lmnn.step_size > 0) || !(lmnn.tolerance > 0) || lmnn.k == 0) {
            throw ConfigError("lmnn parameters must be positive");
        }
        stats::validate(h1_spec);
    }
};

struct DNTModel {
    ExtractorId extractor = ExtractorId::RawOrder;
    SelectionModel selection;
    MetricMatrix metric;
    std::vector<double> centroid;       ///< in selected-feature space, length selection.d
    std::vector<double> null_distances; ///< squared learned distances to the centroid, ascending
    double cutoff = 0;
    double alpha = 0.05;
    std::size_t n = 100;
    TrainConfig config;

    bool operator==(const DNTModel& o) const
    {
        return extractor == o.extractor && selection == o.selection && metric == o.metric &&
               centroid == o.centroid && null_distances == o.null_distances && cutoff == o.cutoff &&
               alpha == o.alpha && n == o.n;
    }
};

struct TestReport {
    double statistic = 0;
    double cutoff = 0;
    bool reject = false;
    double alpha = 0.05;
};

namespace detail {

inline std::vector<FeatureVector> simulate_features(ExtractorId ex, const stats::DistributionSpec& spec, std::size_t n,
                                                    std::size_t count, const stats::SeedScheme& seeds,
                                                    std::string_view purpose)
{
    std::vector<FeatureVector> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const auto x = stats::sample(spec, n, seeds.stream(static_cast<std::uint64_t>(spec.case_id), r, purpose));
        out.push_back(extract(ex, x.values));
    }
    return out;
}

inline Eigen::MatrixXd selected_matrix(std::span<const FeatureVector> vs, const SelectionModel& s)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(vs.size()), static_cast<Eigen::Index>(s.mask.size()));
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t k = 0; k < s.mask.size(); ++k) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = vs[i].values[s.mask[k]];
        }
    }
    return x;
}

inline Eigen::VectorXd squared_distances_to(const Eigen::MatrixXd& rows, const Eigen::VectorXd& c, const Eigen::MatrixXd& m)
{
    const Eigen::MatrixXd delta = rows.rowwise() - c.transpose();
    Eigen::VectorXd q = (delta * m).cwiseProduct(delta).rowwise().sum();
    for (auto& v : q) {
        if (v < 0 && v > -1e-10) v = 0;
    }
    return q;
}

} // namespace detail

/// Simulate, select, learn and calibrate a DNT model. Deterministic in cfg.master_seed.
///
/// Training keeps the h0_keep_fraction of H0 feature vectors closest (Euclidean)
/// to the mean of the whole H0 pool, selects d features separating them from the
/// H1 vectors, learns the metric on the kept-H0 and H1 vectors, and takes the
/// kept-H0 mean as the centroid. The null distribution is the squared learned
/// distance of every pool vector (or of a fresh null draw) to the centroid.
inline DNTModel train(const TrainConfig& cfg)
{
    cfg.validate();
    const stats::SeedScheme seeds(cfg.master_seed);
    const auto normal = stats::case_spec(stats::kNullCase);

    auto h0 = detail::simulate_features(cfg.extractor, normal, cfg.n, cfg.h0_pool, seeds, "train-h0");
    auto h1 = detail::simulate_features(cfg.extractor, cfg.h1_spec, cfg.n, cfg.h1_count, seeds, "train-h1");

    const Eigen::MatrixXd pool = to_matrix(h0);
    const Eigen::RowVectorXd pool_mean = pool.colwise().mean();
    if (!((pool.rowwise() - pool_mean).squaredNorm() > 0)) {
        throw TrainingError("H0 feature vectors have zero variance");
    }
    const Eigen::VectorXd to_center = (pool.rowwise() - pool_mean).rowwise().squaredNorm();
    std::vector<std::size_t> order(h0.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return to_center[static_cast<Eigen::Index>(a)] < to_center[static_cast<Eigen::Index>(b)];
    });
    order.resize(cfg.keep_count());
    std::sort(order.begin(), order.end());
    std::vector<FeatureVector> kept;
    kept.reserve(order.size());
    for (std::size_t i : order) kept.push_back(h0[i]);

    const std::size_t d = std::min(cfg.d, h0.front().size());
    DNTModel model;
    model.extractor = cfg.extractor;
    model.alpha = cfg.alpha;
    model.n = cfg.n;
    model.config = cfg;
    model.selection = fit_selection(kept, h1, d);

    const Eigen::MatrixXd kept_sel = detail::selected_matrix(kept, model.selection);
    const Eigen::MatrixXd h1_sel = detail::selected_matrix(h1, model.selection);
    Eigen::MatrixXd train_x(kept_sel.rows() + h1_sel.rows(), kept_sel.cols());
    train_x << kept_sel, h1_sel;
    std::vector<int> labels(static_cast<std::size_t>(train_x.rows()), 1);
    std::fill(labels.begin(), labels.begin() + kept_sel.rows(), 0);
    model.metric = train_metric(train_x, labels, cfg.lmnn);

    const Eigen::VectorXd c = kept_sel.colwise().mean().transpose();
    model.centroid.assign(c.data(), c.data() + c.size());

    Eigen::MatrixXd null_sel;
    if (cfg.fresh_null) {
        const auto fresh = detail::simulate_features(cfg.extractor, normal, cfg.n, cfg.h0_pool, seeds, "train-null");
        null_sel = detail::selected_matrix(fresh, model.selection);
    } else {
        null_sel = detail::selected_matrix(h0, model.selection);
    }
    const Eigen::VectorXd dist = detail::squared_distances_to(null_sel, c, model.metric.m);
    model.null_distances.assign(dist.data(), dist.data() + dist.size());
    std::sort(model.null_distances.begin(), model.null_distances.end());
    model.cutoff = model.null_distances[cutoff_rank(model.null_distances.size(), cfg.alpha) - 1];
    for (double v : model.null_distances) {
        if (!std::isfinite(v)) throw TrainingError("non-finite null distance");
    }
    return model;
}

/// Squared learned distance from the sample's selected features to the centroid.
inline double dnt_statistic(std::span<const double> x, const DNTModel& model)
{
    if (x.size() != model.n) {
        throw DimensionError("sample size " + std::to_string(x.size()) + " does not match the model's n = " +
                             std::to_string(model.n));
    }
    const auto v = apply_selection(extract(model.extractor, x), model.selection);
    return squared_mahalanobis(v.values, model.centroid, model.metric);
}

inline TestReport dnt_test(std::span<const double> x, const DNTModel& model)
{
    const double s = dnt_statistic(x, model);
    return TestReport{s, model.cutoff, s > model.cutoff, model.alpha};
}

inline TestReport dnt_test(const stats::Sample& x, const DNTModel& model) { return dnt_test(x.values, model); }

} // namespace dnt
