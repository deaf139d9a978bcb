#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dnt/errors.hpp"
#include "dnt/qq_plot.hpp"
#include "dnt/stats/moments.hpp"

namespace dnt {

enum class ExtractorId { RawOrder, ImageGrid };

inline constexpr std::string_view to_string(ExtractorId e)
{
    return e == ExtractorId::RawOrder ? "raw_order" : "image_grid";
}

inline ExtractorId parse_extractor(std::string_view s)
{
    if (s == "raw_order" || s == "raw") return ExtractorId::RawOrder;
    if (s == "image_grid" || s == "image") return ExtractorId::ImageGrid;
    throw FormatError("unknown extractor: " + std::string(s));
}

struct FeatureVector {
    std::vector<double> values;
    ExtractorId extractor = ExtractorId::RawOrder;
    std::optional<std::vector<std::size_t>> selected;

    std::size_t size() const noexcept { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

/// Ordered standardized observations.
inline FeatureVector extract_raw(std::span<const double> x)
{
    return FeatureVector{stats::sorted_standardized(x), ExtractorId::RawOrder, std::nullopt};
}

inline FeatureVector extract_raw(const stats::Sample& x) { return extract_raw(x.values); }

inline constexpr int kGridCells = 8;
inline constexpr int kCellSize = QQRaster::kSize / kGridCells;
inline constexpr std::size_t kImageFeatureCount = kGridCells * kGridCells * 3 + 4;

/// Hand-built image descriptor for a 128x128 Q-Q raster.
///
/// For each 16x16 cell of the 8x8 grid (row-major): mean intensity, mean
/// |horizontal forward difference| and mean |vertical forward difference|,
/// differences taken inside the cell. Then four globals: mean, population sd,
/// and the mean row and column of the point (1.0) pixels.
inline FeatureVector extract_image(const QQRaster& img)
{
    if (img.width != QQRaster::kSize || img.height != QQRaster::kSize ||
        img.pixels.size() != static_cast<std::size_t>(img.width * img.height)) {
        throw DimensionError("extract_image expects a 128x128 raster");
    }
    std::vector<double> f;
    f.reserve(kImageFeatureCount);
    constexpr double cell_px = kCellSize * kCellSize;
    constexpr double cell_diffs = kCellSize * (kCellSize - 1);
    for (int gr = 0; gr < kGridCells; ++gr) {
        for (int gc = 0; gc < kGridCells; ++gc) {
            const int r0 = gr * kCellSize;
            const int c0 = gc * kCellSize;
            double sum = 0;
            double dh = 0;
            double dv = 0;
            for (int r = r0; r < r0 + kCellSize; ++r) {
                for (int c = c0; c < c0 + kCellSize; ++c) {
                    const double v = img.at(r, c);
                    sum += v;
                    if (c + 1 < c0 + kCellSize) dh += std::fabs(img.at(r, c + 1) - v);
                    if (r + 1 < r0 + kCellSize) dv += std::fabs(img.at(r + 1, c) - v);
                }
            }
            f.push_back(sum / cell_px);
            f.push_back(dh / cell_diffs);
            f.push_back(dv / cell_diffs);
        }
    }

    const auto npx = static_cast<double>(img.pixels.size());
    const double mean = std::accumulate(img.pixels.begin(), img.pixels.end(), 0.0) / npx;
    double ss = 0;
    for (double v : img.pixels) ss += (v - mean) * (v - mean);
    double wsum = 0;
    double rsum = 0;
    double csum = 0;
    for (int row = 0; row < img.height; ++row) {
        for (int col = 0; col < img.width; ++col) {
            const double v = img.at(row, col);
            if (v == QQRaster::kPoint) {
                wsum += v;
                rsum += v * row;
                csum += v * col;
            }
        }
    }
    f.push_back(mean);
    f.push_back(std::sqrt(ss / npx));
    f.push_back(wsum > 0 ? rsum / wsum : 0.0);
    f.push_back(wsum > 0 ? csum / wsum : 0.0);
    return FeatureVector{std::move(f), ExtractorId::ImageGrid, std::nullopt};
}

/// Features of a sample under the given extractor.
inline FeatureVector extract(ExtractorId id, std::span<const double> x)
{
    if (id == ExtractorId::RawOrder) return extract_raw(x);
    return extract_image(render_sample(x));
}

/// Top-d feature selection by two-class separability.
struct SelectionModel {
    std::vector<double> scores;
    std::vector<std::size_t> mask; ///< ascending indices of the kept features
    std::size_t d = 0;

    bool operator==(const SelectionModel&) const = default;
};

/// Indices of the d largest scores (ties to the lower index), returned ascending.
inline std::vector<std::size_t> top_d(std::span<const double> scores, std::size_t d)
{
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(d);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Welch-style score |mean0 - mean1| / sqrt(var0/n0 + var1/n1 + 1e-12) per feature.
inline SelectionModel fit_selection(std::span<const FeatureVector> h0, std::span<const FeatureVector> h1,
                                    std::size_t d)
{
    if (h0.size() < 2 || h1.size() < 2) throw DimensionError("fit_selection needs at least 2 vectors per class");
    const std::size_t m = h0.front().size();
    const ExtractorId ex = h0.front().extractor;
    for (const auto* set : {&h0, &h1}) {
        for (const auto& v : *set) {
            if (v.size() != m || v.extractor != ex) throw DimensionError("fit_selection: feature vectors differ in length or extractor");
        }
    }
    if (d == 0 || d > m) throw DimensionError("fit_selection: d must be in 1..m");

    auto column_stats = [m](std::span<const FeatureVector> set) {
        std::vector<double> mu(m, 0.0);
        std::vector<double> var(m, 0.0);
        for (const auto& v : set) {
            for (std::size_t j = 0; j < m; ++j) mu[j] += v.values[j];
        }
        for (auto& x : mu) x /= static_cast<double>(set.size());
        for (const auto& v : set) {
            for (std::size_t j = 0; j < m; ++j) {
                const double e = v.values[j] - mu[j];
                var[j] += e * e;
            }
        }
        for (auto& x : var) x /= static_cast<double>(set.size() - 1);
        return std::pair{mu, var};
    };
    const auto [mu0, var0] = column_stats(h0);
    const auto [mu1, var1] = column_stats(h1);
    const auto n0 = static_cast<double>(h0.size());
    const auto n1 = static_cast<double>(h1.size());

    SelectionModel s;
    s.d = d;
    s.scores.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        s.scores[j] = std::fabs(mu0[j] - mu1[j]) / std::sqrt(var0[j] / n0 + var1[j] / n1 + 1e-12);
    }
    s.mask = top_d(s.scores, d);
    return s;
}

inline FeatureVector apply_selection(const FeatureVector& v, const SelectionModel& s)
{
    if (v.size() != s.scores.size()) throw DimensionError("apply_selection: vector length does not match the model");
    FeatureVector out{std::vector<double>(s.mask.size()), v.extractor, s.mask};
    for (std::size_t k = 0; k < s.mask.size(); ++k) out.values[k] = v.values[s.mask[k]];
    return out;
}

} // namespace dnt
