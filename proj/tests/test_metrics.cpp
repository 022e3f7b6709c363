#include <gtest/gtest.h>

#include <random>

#include "geosstv/metrics.hpp"
#include "phantom.hpp"
#include "random_fields.hpp"
#include "reference.hpp"

namespace geosstv {
namespace {

TEST(Mpsnr, IdenticalIsCapped) {
    const auto c = testing::phantom_cube(8, 8, 3);
    const auto r = mpsnr(c, c);
    EXPECT_EQ(r.mpsnr_db, kPsnrCapDb);
    EXPECT_EQ(r.per_band_psnr, std::vector<double>(3, kPsnrCapDb));
}

TEST(Mpsnr, UniformErrorOfPointOne) {
    const HsCube truth(CubeShape(2, 2, 1), {0.1, 0.2, 0.3, 0.4});
    const HsCube est(CubeShape(2, 2, 1), {0.2, 0.1, 0.4, 0.3});
    EXPECT_NEAR(mpsnr(est, truth).mpsnr_db, 20.0, 1e-9);
}

TEST(Mpsnr, AveragesBands) {
    // band 0 error 0.1 everywhere (20 dB), band 1 error 0.01 (40 dB)
    const CubeShape s(2, 2, 2);
    const HsCube truth(s, 0.5);
    HsCube est(s);
    for (std::size_t k = 0; k < 4; ++k) est[k] = 0.6;
    for (std::size_t k = 4; k < 8; ++k) est[k] = 0.49;
    const auto r = mpsnr(est, truth);
    EXPECT_NEAR(r.per_band_psnr[0], 20.0, 1e-9);
    EXPECT_NEAR(r.per_band_psnr[1], 40.0, 1e-9);
    EXPECT_NEAR(r.mpsnr_db, 30.0, 1e-9);
}

TEST(Mpsnr, ShapeMismatch) {
    EXPECT_THROW(mpsnr(HsCube(CubeShape(2, 2, 1)), HsCube(CubeShape(2, 2, 2))), std::invalid_argument);
}

TEST(Mssim, IdenticalAndConstant) {
    const auto c = testing::phantom_cube(10, 12, 2);
    EXPECT_NEAR(mssim(c, c).mssim, 1.0, 1e-15);
    const auto k = cube_new(CubeShape(8, 8, 1), 0.37);
    EXPECT_NEAR(mssim(k, k).mssim, 1.0, 1e-15);
}

TEST(Mssim, MatchesBruteForceReference) {
    std::mt19937_64 gen(8);
    for (int rep = 0; rep < 5; ++rep) {
        const auto a = testing::random_vector(256, gen, 0.0, 1.0);
        auto b = a;
        std::normal_distribution<double> nd(0.0, 0.05 * (rep + 1));
        for (double& x : b) x += nd(gen);
        EXPECT_NEAR(ssim_band(a, b, 16, 16), testing::ssim_brute(a, b, 16, 16), 1e-6);
    }
    // non-square band
    const auto a = testing::random_vector(12 * 20, gen, 0.0, 1.0);
    const auto b = testing::random_vector(12 * 20, gen, 0.0, 1.0);
    EXPECT_NEAR(ssim_band(a, b, 12, 20), testing::ssim_brute(a, b, 12, 20), 1e-6);
}

TEST(Mssim, Symmetric) {
    std::mt19937_64 gen(9);
    const auto a = testing::random_field<1>(CubeShape(9, 11, 3), gen, 0.0, 1.0);
    const auto b = testing::random_field<1>(CubeShape(9, 11, 3), gen, 0.0, 1.0);
    EXPECT_NEAR(mssim(a, b).mssim, mssim(b, a).mssim, 1e-14);
}

TEST(Mssim, RejectsSmallBands) {
    const auto c = cube_new(CubeShape(7, 8, 1), 0.5);
    EXPECT_THROW(mssim(c, c), std::invalid_argument);
}

TEST(EvaluateQuality, FillsBoth) {
    const auto c = testing::phantom_cube(8, 8, 2);
    const auto r = evaluate_quality(c, c);
    EXPECT_EQ(r.mpsnr_db, kPsnrCapDb);
    EXPECT_NEAR(r.mssim, 1.0, 1e-15);
    EXPECT_EQ(r.per_band_ssim.size(), 2u);
}

} // namespace
} // namespace geosstv
