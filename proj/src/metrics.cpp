#include "geosstv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geosstv {

namespace {

void check_pair(const HsCube& a, const HsCube& b) {
    if (!(a.shape() == b.shape())) {
        throw std::invalid_argument("shape mismatch: " + a.shape().to_string() + " vs " +
                                    b.shape().to_string());
    }
}

double average(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) {
        acc += x;
    }
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

// Summed-area table with a zero first row and column: (n1+1) x (n2+1).
std::vector<double> integral(std::size_t n1, std::size_t n2, auto&& value) {
    std::vector<double> sat((n1 + 1) * (n2 + 1), 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n2; ++j) {
            row += value(i * n2 + j);
            sat[(i + 1) * (n2 + 1) + j + 1] = sat[i * (n2 + 1) + j + 1] + row;
        }
    }
    return sat;
}

} // namespace

double ssim_band(std::span<const double> a, std::span<const double> b, std::size_t n1,
                 std::size_t n2) {
    constexpr std::size_t w = kSsimWindow;
    if (n1 < w || n2 < w) {
        throw std::invalid_argument("band of " + std::to_string(n1) + "x" + std::to_string(n2) +
                                    " is smaller than the 8x8 SSIM window");
    }
    if (a.size() != n1 * n2 || b.size() != n1 * n2) {
        throw std::invalid_argument("ssim_band: data length does not match band size");
    }
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto sa = integral(n1, n2, [&](std::size_t k) { return a[k]; });
    const auto sb = integral(n1, n2, [&](std::size_t k) { return b[k]; });
    const auto saa = integral(n1, n2, [&](std::size_t k) { return a[k] * a[k]; });
    const auto sbb = integral(n1, n2, [&](std::size_t k) { return b[k] * b[k]; });
    const auto sab = integral(n1, n2, [&](std::size_t k) { return a[k] * b[k]; });
    const std::size_t stride = n2 + 1;
    const auto box = [&](const std::vector<double>& s, std::size_t i, std::size_t j) {
        return s[(i + w) * stride + j + w] - s[i * stride + j + w] - s[(i + w) * stride + j] +
               s[i * stride + j];
    };
    const double inv = 1.0 / static_cast<double>(w * w);

    double total = 0.0;
    for (std::size_t i = 0; i + w <= n1; ++i) {
        for (std::size_t j = 0; j + w <= n2; ++j) {
            const double ma = box(sa, i, j) * inv;
            const double mb = box(sb, i, j) * inv;
            const double va = box(saa, i, j) * inv - ma * ma;
            const double vb = box(sbb, i, j) * inv - mb * mb;
            const double cov = box(sab, i, j) * inv - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    return total / static_cast<double>((n1 - w + 1) * (n2 - w + 1));
}

QualityReport mpsnr(const HsCube& estimate, const HsCube& truth) {
    check_pair(estimate, truth);
    const CubeShape& shape = truth.shape();
    QualityReport r;
    for (std::size_t b = 0; b < shape.n3(); ++b) {
        const auto e = estimate.block(0).subspan(b * shape.band_size(), shape.band_size());
        const auto t = truth.block(0).subspan(b * shape.band_size(), shape.band_size());
        double err = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) {
            const double d = e[k] - t[k];
            err += d * d;
        }
        const double psnr =
            err == 0.0 ? kPsnrCapDb
                       : std::min(kPsnrCapDb,
                                  10.0 * std::log10(static_cast<double>(shape.band_size()) / err));
        r.per_band_psnr.push_back(psnr);
    }
    r.mpsnr_db = average(r.per_band_psnr);
    return r;
}

QualityReport mssim(const HsCube& estimate, const HsCube& truth) {
    check_pair(estimate, truth);
    const CubeShape& shape = truth.shape();
    QualityReport r;
    for (std::size_t b = 0; b < shape.n3(); ++b) {
        const auto e = estimate.values().subspan(b * shape.band_size(), shape.band_size());
        const auto t = truth.values().subspan(b * shape.band_size(), shape.band_size());
        r.per_band_ssim.push_back(ssim_band(e, t, shape.n1(), shape.n2()));
    }
    r.mssim = average(r.per_band_ssim);
    return r;
}

QualityReport evaluate_quality(const HsCube& estimate, const HsCube& truth) {
    QualityReport r = mpsnr(estimate, truth);
    const QualityReport s = mssim(estimate, truth);
    r.mssim = s.mssim;
    r.per_band_ssim = s.per_band_ssim;
    return r;
}

} // namespace geosstv
