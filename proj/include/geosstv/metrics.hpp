#pragma once

#include <vector>

#include "geosstv/cube.hpp"

namespace geosstv {

/// Per-band PSNR reported for a band reproduced exactly.
inline constexpr double kPsnrCapDb = 300.0;

/// SSIM uses an 8x8 uniform window, stride 1, over the valid region, with
/// C1 = (0.01 L)^2 and C2 = (0.03 L)^2 at dynamic range L = 1.
inline constexpr int kSsimWindow = 8;

struct QualityReport {
    double mpsnr_db = 0.0;
    double mssim = 0.0;
    std::vector<double> per_band_psnr;
    std::vector<double> per_band_ssim;
};

/// 10 log10(n1 n2 / ||e_b||^2) per band, capped, averaged. Fills the PSNR fields only.
QualityReport mpsnr(const HsCube& estimate, const HsCube& truth);

/// Mean SSIM over bands. Fills the SSIM fields only.
QualityReport mssim(const HsCube& estimate, const HsCube& truth);

/// Both metrics.
QualityReport evaluate_quality(const HsCube& estimate, const HsCube& truth);

/// SSIM of one n1 x n2 band pair (row-major).
double ssim_band(std::span<const double> a, std::span<const double> b, std::size_t n1,
                 std::size_t n2);

} // namespace geosstv
