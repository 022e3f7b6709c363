#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "geosstv/io.hpp"
#include "geosstv/noise.hpp"
#include "json.hpp"
#include "phantom.hpp"
#include "temp_dir.hpp"

namespace geosstv {
namespace {

using testing::TempDir;

std::string bytes_of(const std::filesystem::path& p) { return read_text(p); }

IoError::Kind read_error_kind(const std::filesystem::path& p) {
    try {
        read_cube(p);
    } catch (const IoError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "read_cube accepted " << p;
    return IoError::Kind::Io;
}

TEST(Hsc, LayoutOfSmallCube) {
    TempDir dir;
    const HsCube c(CubeShape(2, 2, 1), {0.0, 0.25, 0.5, 1.0});
    write_cube(dir / "c.hsc", c);
    const std::string b = bytes_of(dir / "c.hsc");
    ASSERT_EQ(b.size(), kHscHeaderSize + 32);
    EXPECT_EQ(b.size(), 52u);
    EXPECT_EQ(b.substr(0, 4), "HSC1");
    const unsigned char dims[12] = {2, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0};
    EXPECT_EQ(std::memcmp(b.data() + 4, dims, 12), 0);
    EXPECT_EQ(b[16], 1);
    EXPECT_EQ(b[17], 0);
    EXPECT_EQ(b[18], 0);
    EXPECT_EQ(b[19], 0);
    double second = 0.0;
    std::memcpy(&second, b.data() + 20 + 8, 8);
    EXPECT_EQ(second, 0.25);
}

TEST(Hsc, Float64RoundTripIsBitExact) {
    TempDir dir;
    const auto c = testing::phantom_cube(5, 7, 3);
    write_cube(dir / "c.hsc", c);
    EXPECT_EQ(read_cube(dir / "c.hsc"), c);
}

TEST(Hsc, Float32RoundsOnce) {
    TempDir dir;
    const HsCube c(CubeShape(2, 3, 1), {0.1, 1.0 / 3.0, 0.7, 1e-9, 0.5, 0.999999});
    write_cube(dir / "a.hsc", c, Dtype::Float32);
    EXPECT_EQ(bytes_of(dir / "a.hsc").size(), kHscHeaderSize + 6 * 4);
    const auto once = read_cube(dir / "a.hsc");
    for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_EQ(once[k], static_cast<double>(static_cast<float>(c[k])));
    }
    write_cube(dir / "b.hsc", once, Dtype::Float32);
    EXPECT_EQ(read_cube(dir / "b.hsc"), once);
}

TEST(Hsc, DistinctErrors) {
    TempDir dir;
    const HsCube c(CubeShape(2, 2, 1), {0.0, 0.25, 0.5, 1.0});
    write_cube(dir / "ok.hsc", c);
    const std::string good = bytes_of(dir / "ok.hsc");

    auto variant = [&](const std::string& name, std::string b) {
        write_text(dir / name, b);
        return dir / name;
    };
    std::string bad_magic = good;
    bad_magic[3] = '2';
    EXPECT_EQ(read_error_kind(variant("m.hsc", bad_magic)), IoError::Kind::BadMagic);
    try {
        read_cube(dir / "m.hsc");
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
    }

    const auto short_path = variant("t.hsc", good.substr(0, good.size() - 1));
    EXPECT_EQ(read_error_kind(short_path), IoError::Kind::Truncated);
    try {
        read_cube(short_path);
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
    }
    EXPECT_EQ(read_error_kind(variant("h.hsc", good.substr(0, 10))), IoError::Kind::Truncated);
    EXPECT_EQ(read_error_kind(variant("x.hsc", good + "x")), IoError::Kind::Truncated);

    std::string zero = good;
    zero[8] = 0;
    EXPECT_EQ(read_error_kind(variant("z.hsc", zero)), IoError::Kind::ZeroDims);

    std::string dtype = good;
    dtype[16] = 7;
    EXPECT_EQ(read_error_kind(variant("d.hsc", dtype)), IoError::Kind::BadDtype);

    std::string nan = good;
    const double q = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(nan.data() + 20, &q, 8);
    EXPECT_EQ(read_error_kind(variant("n.hsc", nan)), IoError::Kind::NonFinite);

    EXPECT_EQ(read_error_kind(dir / "missing.hsc"), IoError::Kind::Io);
}

TEST(Pgm, ScalingAndRounding) {
    TempDir dir;
    const CubeShape s(2, 3, 2);
    HsCube c(s);
    for (std::size_t k = 0; k < 6; ++k) c[k] = -1.0;                // band 0 at lo
    for (std::size_t k = 6; k < 12; ++k) c[k] = 3.0;                // band 1 at hi
    export_band_pgm(c, 0, dir / "lo.pgm", -1.0, 3.0);
    export_band_pgm(c, 1, dir / "hi.pgm", -1.0, 3.0);
    const std::string header = "P5\n3 2\n65535\n";
    const auto lo = bytes_of(dir / "lo.pgm"), hi = bytes_of(dir / "hi.pgm");
    ASSERT_EQ(lo.size(), header.size() + 12);
    EXPECT_EQ(lo.substr(0, header.size()), header);
    for (std::size_t k = header.size(); k < lo.size(); ++k) {
        EXPECT_EQ(static_cast<unsigned char>(lo[k]), 0u);
        EXPECT_EQ(static_cast<unsigned char>(hi[k]), 255u);
    }

    HsCube mid(s, 1.0);  // (lo + hi) / 2 -> 32767.5 rounds half away from zero
    export_band_pgm(mid, 0, dir / "mid.pgm", -1.0, 3.0);
    const auto m = bytes_of(dir / "mid.pgm");
    const unsigned v = (static_cast<unsigned char>(m[header.size()]) << 8) |
                       static_cast<unsigned char>(m[header.size() + 1]);
    EXPECT_EQ(v, 32768u);

    EXPECT_THROW(export_band_pgm(c, 2, dir / "x.pgm", 0, 1), IoError);
    EXPECT_THROW(export_band_pgm(c, 0, dir / "x.pgm", 1, 1), IoError);
}

Manifest case5_manifest() {
    Manifest m;
    m.case_id = 5;
    m.seed = 42;
    m.noise = case_spec(5);
    m.noise.seed = 42;
    m.n1 = 10;
    m.n2 = 10;
    m.n3 = 10;
    m.observed_mean = 0.4125;
    m.radii = compute_radii(m.observed_mean, CubeShape(10, 10, 10), m.noise, rho_for_case(5));
    m.provenance = {"0.1.0", "simulate --case 5", {{"clean", "abc"}}};
    return m;
}

TEST(Manifest, RoundTrip) {
    const Manifest m = case5_manifest();
    const auto text = manifest_to_json(m);
    EXPECT_EQ(manifest_from_json(text), m);
    EXPECT_EQ(manifest_to_json(manifest_from_json(text)), text);
    TempDir dir;
    write_manifest(dir / "m.json", m);
    EXPECT_EQ(read_manifest(dir / "m.json"), m);
}

TEST(Manifest, CustomSpecHasNullCase) {
    Manifest m = case5_manifest();
    m.case_id.reset();
    EXPECT_EQ(manifest_from_json(manifest_to_json(m)), m);
}

TEST(Manifest, MissingFieldIsNamed) {
    auto doc = nlohmann::json::parse(manifest_to_json(case5_manifest()));
    doc["noise"].erase("sigma");
    try {
        manifest_from_json(doc.dump());
        FAIL() << "accepted a manifest without sigma";
    } catch (const IoError& e) {
        EXPECT_EQ(e.kind(), IoError::Kind::Schema);
        EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos) << e.what();
    }
    EXPECT_THROW(manifest_from_json("{not json"), IoError);
}

TEST(Manifest, RadiiRecompute) {
    const Manifest m = manifest_from_json(manifest_to_json(case5_manifest()));
    const auto r = compute_radii(m.observed_mean, CubeShape(m.n1, m.n2, m.n3), m.noise, m.radii.rho);
    EXPECT_NEAR(r.alpha, m.radii.alpha, 1e-12);
    EXPECT_NEAR(r.beta, m.radii.beta, 1e-12);
    EXPECT_NEAR(r.epsilon, m.radii.epsilon, 1e-12);
}

TEST(Reports, QualityCsvAndJson) {
    QualityReport q{25.0, 0.9, {24.0, 26.0}, {0.85, 0.95}};
    EXPECT_EQ(quality_report_csv(q), "band,psnr,ssim\n0,24,0.84999999999999998\n1,26,0.94999999999999996\n");
    const auto j = nlohmann::json::parse(quality_report_json(q, {"0.1.0", "evaluate", {}}));
    EXPECT_EQ(j["mpsnr_db"], 25.0);
    EXPECT_EQ(j["provenance"]["command_line"], "evaluate");
}

TEST(Hashing, Sha256) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    TempDir dir;
    write_text(dir / "f", "abc");
    EXPECT_EQ(file_sha256(dir / "f"), sha256_hex("abc"));
}

} // namespace
} // namespace geosstv
