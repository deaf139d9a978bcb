#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "dnt/errors.hpp"
#include "dnt/qq_plot.hpp"

namespace dnt {

enum class SimilarityMetric { PSNR, SSIM };

struct SimilarityScore {
    SimilarityMetric metric;
    double value; ///< dB for PSNR (may be +inf), index in [-1, 1] for SSIM
};

inline constexpr std::string_view to_string(SimilarityMetric m)
{
    return m == SimilarityMetric::PSNR ? "PSNR" : "SSIM";
}

namespace detail {

inline void require_same_shape(const QQRaster& a, const QQRaster& b)
{
    if (a.width != b.width || a.height != b.height || a.pixels.size() != b.pixels.size()) {
        throw DimensionError("rasters differ in dimensions");
    }
}

} // namespace detail

inline double mean_squared_error(const QQRaster& a, const QQRaster& b)
{
    detail::require_same_shape(a, b);
    double s = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        s += d * d;
    }
    return s / static_cast<double>(a.pixels.size());
}

/// 10 log10(1 / MSE) for unit dynamic range; +inf for identical images.
inline SimilarityScore psnr(const QQRaster& a, const QQRaster& b)
{
    const double mse = mean_squared_error(a, b);
    if (mse == 0.0) return {SimilarityMetric::PSNR, std::numeric_limits<double>::infinity()};
    return {SimilarityMetric::PSNR, 10.0 * std::log10(1.0 / mse)};
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5) over every valid window
/// position, C1 = 0.01^2, C2 = 0.03^2.
///
/// The reference image's local statistics are computed once, so scoring many
/// candidates against a fixed reference costs three filter passes each.
class SsimReference {
public:
    static constexpr int kWindow = 11;
    static constexpr double kSigma = 1.5;
    static constexpr double kC1 = 0.01 * 0.01;
    static constexpr double kC2 = 0.03 * 0.03;

    explicit SsimReference(QQRaster reference) : ref_(std::move(reference))
    {
        if (ref_.width < kWindow || ref_.height < kWindow) {
            throw DimensionError("SSIM needs images of at least 11x11");
        }
        mu_ = filter(ref_.pixels);
        var_ = filter(squared(ref_.pixels));
        for (std::size_t i = 0; i < mu_.size(); ++i) var_[i] -= mu_[i] * mu_[i];
    }

    const QQRaster& reference() const noexcept { return ref_; }

    double score(const QQRaster& a) const
    {
        detail::require_same_shape(a, ref_);
        const auto mu_a = filter(a.pixels);
        const auto var_a = filter(squared(a.pixels));
        std::vector<double> prod(a.pixels.size());
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a.pixels[i] * ref_.pixels[i];
        const auto cov = filter(prod);

        double total = 0;
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double ma = mu_a[i];
            const double mb = mu_[i];
            const double va = var_a[i] - ma * ma;
            const double cab = cov[i] - ma * mb;
            const double num = (2.0 * ma * mb + kC1) * (2.0 * cab + kC2);
            const double den = (ma * ma + mb * mb + kC1) * (va + var_[i] + kC2);
            total += num / den;
        }
        return total / static_cast<double>(mu_a.size());
    }

private:
    static const std::array<double, kWindow>& kernel()
    {
        static const std::array<double, kWindow> k = [] {
            std::array<double, kWindow> w{};
            double s = 0;
            for (int i = 0; i < kWindow; ++i) {
                const double d = i - kWindow / 2;
                w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
                s += w[static_cast<std::size_t>(i)];
            }
            for (auto& v : w) v /= s;
            return w;
        }();
        return k;
    }

    static std::vector<double> squared(const std::vector<double>& p)
    {
        std::vector<double> out(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * p[i];
        return out;
    }

    // Separable Gaussian filter restricted to fully covered window positions.
    std::vector<double> filter(const std::vector<double>& img) const
    {
        const auto& k = kernel();
        const int w = ref_.width;
        const int h = ref_.height;
        const int ow = w - kWindow + 1;
        const int oh = h - kWindow + 1;
        std::vector<double> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
        for (int r = 0; r < h; ++r) {
            const double* row = img.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(w);
            for (int c = 0; c < ow; ++c) {
                double s = 0;
                for (int t = 0; t < kWindow; ++t) s += k[static_cast<std::size_t>(t)] * row[c + t];
                tmp[static_cast<std::size_t>(r) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(c)] = s;
            }
        }
        std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
        for (int r = 0; r < oh; ++r) {
            for (int c = 0; c < ow; ++c) {
                double s = 0;
                for (int t = 0; t < kWindow; ++t) {
                    s += k[static_cast<std::size_t>(t)] *
                         tmp[static_cast<std::size_t>(r + t) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(c)];
                }
                out[static_cast<std::size_t>(r) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(c)] = s;
            }
        }
        return out;
    }

    QQRaster ref_;
    std::vector<double> mu_;
    std::vector<double> var_;
};

inline SimilarityScore ssim(const QQRaster& a, const QQRaster& b)
{
    detail::require_same_shape(a, b);
    return {SimilarityMetric::SSIM, SsimReference(b).score(a)};
}

/// Normality statistic from image similarity: the negated similarity of the
/// sample's Q-Q raster to a fixed reference (larger = less normal).
class SimilarityStatistic {
public:
    SimilarityStatistic(SimilarityMetric metric, QQRaster reference)
        : metric_(metric), ssim_(std::move(reference))
    {
    }

    /// Reference defaults to the ideal raster with points on the diagonal.
    SimilarityStatistic(SimilarityMetric metric, std::size_t n)
        : SimilarityStatistic(metric, ideal_raster(n))
    {
    }

    SimilarityMetric metric() const noexcept { return metric_; }
    const QQRaster& reference() const noexcept { return ssim_.reference(); }

    double operator()(const QQRaster& candidate) const
    {
        if (metric_ == SimilarityMetric::SSIM) return -ssim_.score(candidate);
        return -psnr(candidate, ssim_.reference()).value;
    }

    double operator()(std::span<const double> x) const { return (*this)(render_sample(x)); }

private:
    SimilarityMetric metric_;
    SsimReference ssim_;
};

inline double similarity_test_statistic(std::span<const double> x, SimilarityMetric metric,
                                        const QQRaster& reference)
{
    return SimilarityStatistic(metric, reference)(x);
}

inline double similarity_test_statistic(std::span<const double> x, SimilarityMetric metric)
{
    return SimilarityStatistic(metric, x.size())(x);
}

} // namespace dnt
