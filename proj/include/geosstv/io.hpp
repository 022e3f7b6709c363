#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "geosstv/cube.hpp"
#include "geosstv/metrics.hpp"
#include "geosstv/noise.hpp"
#include "geosstv/solver.hpp"

namespace geosstv {

// HSC1 layout, all integers little-endian:
//   bytes 0-3   magic "HSC1"
//   bytes 4-15  n1, n2, n3 as uint32
//   byte  16    dtype (1 = float64, 2 = float32)
//   bytes 17-19 reserved, zero
//   payload     n1*n2*n3 samples, band-sequential, row-major within a band
// The header is 20 bytes; a (2,2,1) float64 cube is 52 bytes on disk.
enum class Dtype : std::uint8_t { Float64 = 1, Float32 = 2 };

inline constexpr std::size_t kHscHeaderSize = 20;

class IoError : public std::runtime_error {
public:
    enum class Kind { Io, BadMagic, Truncated, ZeroDims, NonFinite, BadDtype, Schema, Range };

    IoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

void write_cube(const std::filesystem::path& path, const HsCube& cube, Dtype dtype = Dtype::Float64);
HsCube read_cube(const std::filesystem::path& path);

/// 16-bit binary PGM of one band: round(clip((x-lo)/(hi-lo), 0, 1) * 65535),
/// rounding half away from zero, big-endian samples.
void export_band_pgm(const HsCube& cube, std::size_t band, const std::filesystem::path& path,
                     double lo, double hi);

struct Provenance {
    std::string version;
    std::string command_line;
    std::map<std::string, std::string> input_sha256;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Manifest {
    std::optional<int> case_id;
    std::uint64_t seed = 0;
    NoiseSpec noise;
    RadiusSet radii;
    double observed_mean = 0.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t n3 = 0;
    Provenance provenance;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

struct DenoiseRecord {
    ProblemParams params;  // observed is not serialized
    StepSizes steps;
    double tol = 0.0;
    std::size_t max_iter = 0;
    Provenance provenance;
};

std::string solve_report_json(const SolveReport& report, const DenoiseRecord& record);

std::string quality_report_json(const QualityReport& report, const Provenance& provenance);
/// band,psnr,ssim rows.
std::string quality_report_csv(const QualityReport& report);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Library version string recorded in provenance blocks.
std::string_view version();

} // namespace geosstv
