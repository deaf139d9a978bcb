#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dnt/errors.hpp"
#include "dnt/stats/distributions.hpp"
#include "dnt/stats/moments.hpp"
#include "dnt/stats/normal.hpp"

namespace dnt {

/// Normal Q-Q point set: theoretical quantiles on x, empirical on y, both ascending.
struct QQPoints {
    std::vector<double> theoretical;
    std::vector<double> empirical;

    std::size_t size() const noexcept { return theoretical.size(); }
    bool operator==(const QQPoints&) const = default;
};

/// Probabilities p_i = (i - a) / (n + 1 - 2a), a = 3/8 for n <= 10 else 1/2.
inline std::vector<double> plotting_positions(std::size_t n)
{
    if (n == 0) throw DomainError("plotting_positions: n must be positive");
    const double a = (n <= 10) ? 0.375 : 0.5;
    const double denom = static_cast<double>(n) + 1.0 - 2.0 * a;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = (static_cast<double>(i + 1) - a) / denom;
    return p;
}

inline std::vector<double> theoretical_quantiles(std::size_t n)
{
    auto q = plotting_positions(n);
    for (auto& v : q) v = stats::normal_quantile(v);
    return q;
}

inline QQPoints qq_points(std::span<const double> x)
{
    return QQPoints{theoretical_quantiles(x.size()), stats::sorted_standardized(x)};
}

inline QQPoints qq_points(const stats::Sample& x) { return qq_points(x.values); }

/// The perfect-fit point set for sample size n (empirical == theoretical).
inline QQPoints ideal_qq_points(std::size_t n)
{
    auto q = theoretical_quantiles(n);
    return QQPoints{q, q};
}

/// Grayscale Q-Q image. Row 0 is the top; intensities are 0 (background),
/// 0.5 (y = x anchor line) and 1 (data points).
struct QQRaster {
    static constexpr int kSize = 128;
    static constexpr double kLine = 0.5;
    static constexpr double kPoint = 1.0;

    int width = kSize;
    int height = kSize;
    std::vector<double> pixels; ///< row-major, width * height
    double lo = 0;
    double hi = 1;

    QQRaster() = default;
    QQRaster(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill)
    {
    }

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)]; }
    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)]; }

    bool operator==(const QQRaster&) const = default;
};

namespace detail {

// Integer line rasterization between two pixel centers.
inline void draw_line(QQRaster& r, int c0, int r0, int c1, int r1, double value)
{
    const int dc = std::abs(c1 - c0);
    const int dr = -std::abs(r1 - r0);
    const int sc = c0 < c1 ? 1 : -1;
    const int sr = r0 < r1 ? 1 : -1;
    int err = dc + dr;
    for (;;) {
        r.at(r0, c0) = value;
        if (c0 == c1 && r0 == r1) break;
        const int e2 = 2 * err;
        if (e2 >= dr) {
            err += dr;
            c0 += sc;
        }
        if (e2 <= dc) {
            err += dc;
            r0 += sr;
        }
    }
}

} // namespace detail

/// Draws the anchor diagonal and a radius-1.5 disc per point on a 128x128 canvas.
/// Both axes share the range [min - 5%, max + 5%] over all coordinates.
inline QQRaster rasterize(const QQPoints& pts)
{
    const std::size_t n = pts.size();
    if (n < 3) throw DomainError("rasterize: need at least 3 points");
    if (pts.empirical.size() != n) throw DimensionError("rasterize: coordinate lists differ in length");

    double m = pts.theoretical.front();
    double M = m;
    for (const auto* list : {&pts.theoretical, &pts.empirical}) {
        for (double v : *list) {
            if (!std::isfinite(v)) throw DomainError("rasterize: non-finite coordinate");
            m = std::min(m, v);
            M = std::max(M, v);
        }
    }
    const double range = M - m;
    if (!(range > 0)) throw DomainError("rasterize: all coordinates coincide");

    QQRaster img(QQRaster::kSize, QQRaster::kSize);
    img.lo = m - 0.05 * range;
    img.hi = M + 0.05 * range;
    const int last = QQRaster::kSize - 1;
    const double scale = static_cast<double>(last) / (img.hi - img.lo);

    detail::draw_line(img, 0, last, last, 0, QQRaster::kLine);

    constexpr double r2 = 1.5 * 1.5;
    for (std::size_t i = 0; i < n; ++i) {
        const double px = (pts.theoretical[i] - img.lo) * scale;
        const double py = static_cast<double>(last) - (pts.empirical[i] - img.lo) * scale;
        const int c_lo = std::max(0, static_cast<int>(std::ceil(px - 1.5)));
        const int c_hi = std::min(last, static_cast<int>(std::floor(px + 1.5)));
        const int r_lo = std::max(0, static_cast<int>(std::ceil(py - 1.5)));
        const int r_hi = std::min(last, static_cast<int>(std::floor(py + 1.5)));
        for (int row = r_lo; row <= r_hi; ++row) {
            const double dy = static_cast<double>(row) - py;
            for (int col = c_lo; col <= c_hi; ++col) {
                const double dx = static_cast<double>(col) - px;
                if (dx * dx + dy * dy <= r2) img.at(row, col) = QQRaster::kPoint;
            }
        }
    }
    return img;
}

inline QQRaster render_sample(std::span<const double> x) { return rasterize(qq_points(x)); }

inline QQRaster ideal_raster(std::size_t n) { return rasterize(ideal_qq_points(n)); }

/// Binary 8-bit PGM (P5, maxval 255); intensity*255 rounded half-up.
inline void write_pgm(std::ostream& os, const QQRaster& r)
{
    os << "P5\n" << r.width << ' ' << r.height << "\n255\n";
    std::string bytes(r.pixels.size(), '\0');
    for (std::size_t i = 0; i < r.pixels.size(); ++i) {
        const double v = std::clamp(r.pixels[i], 0.0, 1.0);
        bytes[i] = static_cast<char>(static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5)));
    }
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace dnt
