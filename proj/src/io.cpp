#include "geosstv/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

namespace geosstv {

using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'S', 'C', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) {
        out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
    }
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
    }
    return v;
}

template <typename UInt>
void put_le(std::string& out, UInt bits) {
    for (std::size_t k = 0; k < sizeof(UInt); ++k) {
        out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFFu));
    }
}

template <typename UInt>
UInt get_le(const std::string& in, std::size_t at) {
    UInt v = 0;
    for (std::size_t k = 0; k < sizeof(UInt); ++k) {
        v |= static_cast<UInt>(static_cast<unsigned char>(in[at + k])) << (8 * k);
    }
    return v;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(IoError::Kind::Io, "cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(IoError::Kind::Io, "cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError(IoError::Kind::Io, "write to '" + path.string() + "' failed");
    }
}

} // namespace

std::string_view version() { return "0.1.0"; }

void write_cube(const std::filesystem::path& path, const HsCube& cube, Dtype dtype) {
    if (!all_finite(cube.values())) {
        throw IoError(IoError::Kind::NonFinite, "cube contains non-finite entries");
    }
    const CubeShape& shape = cube.shape();
    std::string bytes(kMagic.begin(), kMagic.end());
    put_u32(bytes, static_cast<std::uint32_t>(shape.n1()));
    put_u32(bytes, static_cast<std::uint32_t>(shape.n2()));
    put_u32(bytes, static_cast<std::uint32_t>(shape.n3()));
    bytes.push_back(static_cast<char>(dtype));
    bytes.append(3, '\0');
    for (double x : cube.values()) {
        if (dtype == Dtype::Float64) {
            put_le(bytes, std::bit_cast<std::uint64_t>(x));
        } else {
            put_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
        }
    }
    spill(path, bytes);
}

HsCube read_cube(const std::filesystem::path& path) {
    const std::string bytes = slurp(path);
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw IoError(IoError::Kind::BadMagic, "bad magic in '" + path.string() + "'");
    }
    if (bytes.size() < kHscHeaderSize) {
        throw IoError(IoError::Kind::Truncated, "truncated header in '" + path.string() + "'");
    }
    const std::uint32_t n1 = get_u32(bytes, 4);
    const std::uint32_t n2 = get_u32(bytes, 8);
    const std::uint32_t n3 = get_u32(bytes, 12);
    if (n1 == 0 || n2 == 0 || n3 == 0) {
        throw IoError(IoError::Kind::ZeroDims, "zero dimension in '" + path.string() + "'");
    }
    const auto code = static_cast<unsigned char>(bytes[16]);
    if (code != 1 && code != 2) {
        throw IoError(IoError::Kind::BadDtype, "unknown dtype code " + std::to_string(code));
    }
    const std::size_t width = code == 1 ? 8 : 4;
    CubeShape shape;
    try {
        shape = CubeShape(n1, n2, n3);
    } catch (const std::invalid_argument& e) {
        throw IoError(IoError::Kind::Range, e.what());
    }
    const std::size_t expected = kHscHeaderSize + shape.voxels() * width;
    if (bytes.size() < expected) {
        throw IoError(IoError::Kind::Truncated, "truncated payload in '" + path.string() + "'");
    }
    if (bytes.size() > expected) {
        throw IoError(IoError::Kind::Truncated,
                      "payload length mismatch in '" + path.string() + "' (trailing bytes)");
    }
    std::vector<double> data(shape.voxels());
    for (std::size_t k = 0; k < data.size(); ++k) {
        const std::size_t at = kHscHeaderSize + k * width;
        data[k] = code == 1 ? std::bit_cast<double>(get_le<std::uint64_t>(bytes, at))
                            : static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(bytes, at)));
        if (!std::isfinite(data[k])) {
            throw IoError(IoError::Kind::NonFinite,
                          "non-finite sample at offset " + std::to_string(k) + " in '" +
                              path.string() + "'");
        }
    }
    return {shape, std::move(data)};
}

void export_band_pgm(const HsCube& cube, std::size_t band, const std::filesystem::path& path,
                     double lo, double hi) {
    const CubeShape& shape = cube.shape();
    if (band >= shape.n3()) {
        throw IoError(IoError::Kind::Range, "band " + std::to_string(band) + " out of range for " +
                                                shape.to_string());
    }
    if (!(lo < hi)) {
        throw IoError(IoError::Kind::Range, "export_band_pgm needs lo < hi");
    }
    std::string bytes = "P5\n" + std::to_string(shape.n2()) + " " + std::to_string(shape.n1()) +
                        "\n65535\n";
    for (std::size_t i = 0; i < shape.n1(); ++i) {
        for (std::size_t j = 0; j < shape.n2(); ++j) {
            const double x = std::clamp((cube.at(i, j, band) - lo) / (hi - lo), 0.0, 1.0);
            const auto v = static_cast<std::uint16_t>(std::lround(x * 65535.0));
            bytes.push_back(static_cast<char>(v >> 8));
            bytes.push_back(static_cast<char>(v & 0xFFu));
        }
    }
    spill(path, bytes);
}

// ---------------------------------------------------------------------------
// JSON documents

namespace {

json provenance_json(const Provenance& p) {
    return {{"version", p.version}, {"command_line", p.command_line}, {"input_sha256", p.input_sha256}};
}

json noise_json(const NoiseSpec& s) {
    return {{"sigma", s.sigma},
            {"p_sparse", s.p_sparse},
            {"p_stripe", s.p_stripe},
            {"stripe_lo", s.stripe_lo},
            {"stripe_hi", s.stripe_hi},
            {"p_dead", s.p_dead},
            {"dead_width_min", s.dead_width_min},
            {"dead_width_max", s.dead_width_max},
            {"seed", s.seed}};
}

json radii_json(const RadiusSet& r) {
    return {{"alpha", r.alpha}, {"beta", r.beta}, {"epsilon", r.epsilon}, {"rho", r.rho},
            {"c_dead", r.c_dead}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

/// Field access that reports the dotted path of anything missing or mistyped.
class Reader {
public:
    Reader(const json& doc, std::string prefix) : doc_(doc), prefix_(std::move(prefix)) {}

    const json& node(const std::string& key) const {
        if (!doc_.is_object() || !doc_.contains(key)) {
            throw IoError(IoError::Kind::Schema, "manifest: missing field \"" + path(key) + "\"");
        }
        return doc_.at(key);
    }

    Reader child(const std::string& key) const {
        const json& n = node(key);
        if (!n.is_object()) {
            throw IoError(IoError::Kind::Schema, "manifest: field \"" + path(key) + "\" must be an object");
        }
        return {n, path(key)};
    }

    double number(const std::string& key) const {
        const json& n = node(key);
        if (!n.is_number()) {
            throw IoError(IoError::Kind::Schema, "manifest: field \"" + path(key) + "\" must be a number");
        }
        return n.get<double>();
    }

    template <typename Int>
    Int integer(const std::string& key) const {
        const json& n = node(key);
        if (!n.is_number_integer()) {
            throw IoError(IoError::Kind::Schema,
                          "manifest: field \"" + path(key) + "\" must be an integer");
        }
        return n.get<Int>();
    }

    std::string text(const std::string& key) const {
        const json& n = node(key);
        if (!n.is_string()) {
            throw IoError(IoError::Kind::Schema, "manifest: field \"" + path(key) + "\" must be a string");
        }
        return n.get<std::string>();
    }

    const json& raw() const { return doc_; }
    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

private:
    const json& doc_;
    std::string prefix_;
};

} // namespace

std::string manifest_to_json(const Manifest& m) {
    json doc;
    doc["case_id"] = m.case_id ? json(*m.case_id) : json(nullptr);
    doc["seed"] = m.seed;
    doc["noise"] = noise_json(m.noise);
    doc["radii"] = radii_json(m.radii);
    doc["observed_mean"] = m.observed_mean;
    doc["shape"] = {m.n1, m.n2, m.n3};
    doc["provenance"] = provenance_json(m.provenance);
    return dump(doc);
}

Manifest manifest_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(IoError::Kind::Schema, std::string("manifest: invalid JSON: ") + e.what());
    }
    const Reader root(doc, "");
    Manifest m;
    const json& case_node = root.node("case_id");
    if (!case_node.is_null()) {
        m.case_id = root.integer<int>("case_id");
    }
    m.seed = root.integer<std::uint64_t>("seed");

    const Reader noise = root.child("noise");
    m.noise.sigma = noise.number("sigma");
    m.noise.p_sparse = noise.number("p_sparse");
    m.noise.p_stripe = noise.number("p_stripe");
    m.noise.stripe_lo = noise.number("stripe_lo");
    m.noise.stripe_hi = noise.number("stripe_hi");
    m.noise.p_dead = noise.number("p_dead");
    m.noise.dead_width_min = noise.integer<int>("dead_width_min");
    m.noise.dead_width_max = noise.integer<int>("dead_width_max");
    m.noise.seed = noise.integer<std::uint64_t>("seed");
    try {
        m.noise.validate();
    } catch (const std::invalid_argument& e) {
        throw IoError(IoError::Kind::Schema, std::string("manifest: noise: ") + e.what());
    }

    const Reader radii = root.child("radii");
    m.radii.alpha = radii.number("alpha");
    m.radii.beta = radii.number("beta");
    m.radii.epsilon = radii.number("epsilon");
    m.radii.rho = radii.number("rho");
    m.radii.c_dead = radii.number("c_dead");

    m.observed_mean = root.number("observed_mean");
    const json& shape = root.node("shape");
    if (!shape.is_array() || shape.size() != 3 ||
        !std::all_of(shape.begin(), shape.end(), [](const json& v) { return v.is_number_unsigned(); })) {
        throw IoError(IoError::Kind::Schema, "manifest: field \"shape\" must be three unsigned integers");
    }
    m.n1 = shape[0].get<std::size_t>();
    m.n2 = shape[1].get<std::size_t>();
    m.n3 = shape[2].get<std::size_t>();

    const Reader prov = root.child("provenance");
    m.provenance.version = prov.text("version");
    m.provenance.command_line = prov.text("command_line");
    const json& hashes = prov.node("input_sha256");
    if (!hashes.is_object()) {
        throw IoError(IoError::Kind::Schema,
                      "manifest: field \"provenance.input_sha256\" must be an object");
    }
    for (const auto& [key, value] : hashes.items()) {
        if (!value.is_string()) {
            throw IoError(IoError::Kind::Schema,
                          "manifest: field \"provenance.input_sha256." + key + "\" must be a string");
        }
        m.provenance.input_sha256[key] = value.get<std::string>();
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    spill(path, manifest_to_json(manifest));
}

Manifest read_manifest(const std::filesystem::path& path) { return manifest_from_json(slurp(path)); }

std::string solve_report_json(const SolveReport& report, const DenoiseRecord& record) {
    json doc;
    doc["iterations"] = report.iterations;
    doc["converged"] = report.converged;
    doc["constraint_residuals"] = report.constraint_residuals;
    doc["raw_constraint_residuals"] = report.raw_constraint_residuals;
    doc["rel_change_history"] = report.rel_change_history;
    doc["objective_history"] = report.objective_history;
    const auto& p = record.params;
    doc["problem"] = {{"omega", p.omega},
                      {"alpha", p.alpha},
                      {"beta", p.beta},
                      {"epsilon", p.epsilon},
                      {"mu_min", p.bounds.mu_min},
                      {"mu_max", p.bounds.mu_max}};
    const auto& g = record.steps;
    doc["step_sizes"] = {{"u", g.u},   {"w1", g.w1}, {"w2", g.w2}, {"s", g.s},  {"t", g.t},
                         {"y1", g.y1}, {"y2", g.y2}, {"y3", g.y3}, {"y4", g.y4}};
    doc["tol"] = record.tol;
    doc["max_iter"] = record.max_iter;
    doc["provenance"] = provenance_json(record.provenance);
    return dump(doc);
}

std::string quality_report_json(const QualityReport& report, const Provenance& provenance) {
    json doc;
    doc["mpsnr_db"] = report.mpsnr_db;
    doc["mssim"] = report.mssim;
    doc["per_band_psnr"] = report.per_band_psnr;
    doc["per_band_ssim"] = report.per_band_ssim;
    doc["provenance"] = provenance_json(provenance);
    return dump(doc);
}

std::string quality_report_csv(const QualityReport& report) {
    std::ostringstream out;
    out << "band,psnr,ssim\n" << std::setprecision(17);
    const std::size_t bands = std::max(report.per_band_psnr.size(), report.per_band_ssim.size());
    for (std::size_t b = 0; b < bands; ++b) {
        out << b << ',' << (b < report.per_band_psnr.size() ? report.per_band_psnr[b] : 0.0) << ','
            << (b < report.per_band_ssim.size() ? report.per_band_ssim[b] : 0.0) << '\n';
    }
    return out.str();
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw IoError(IoError::Kind::Io, "sha256 computation failed");
    }
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (unsigned int k = 0; k < len; ++k) {
        out << std::setw(2) << static_cast<int>(digest[k]);
    }
    return out.str();
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(slurp(path)); }

std::string read_text(const std::filesystem::path& path) { return slurp(path); }

void write_text(const std::filesystem::path& path, const std::string& text) { spill(path, text); }

} // namespace geosstv
