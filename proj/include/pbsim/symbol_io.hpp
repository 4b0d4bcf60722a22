#ifndef PBSIM_SYMBOL_IO_HPP
#define PBSIM_SYMBOL_IO_HPP

// Symbol stream files: a raw payload of little-endian float32 reals plus a
// JSON sidecar at "<payload>.json" carrying the stream metadata.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pbsim/config_io.hpp"
#include "pbsim/waveform.hpp"

namespace pbsim {

inline constexpr int kSymbolFormatVersion = 1;

struct SymbolStreamMeta {
    int format_version = kSymbolFormatVersion;
    std::string element_type = "float32le";
    std::size_t element_count = 0;  ///< L_e, summed over packets
    std::size_t source_length = 0;  ///< L_s per packet
    double bandwidth_ratio = 0.0;   ///< R = L_e / (2 L_s), per packet
    double power = 1.0;
    std::size_t pad_length = 0;
    std::string producer;
    std::string config_hash;
    std::size_t packet_count = 1;  ///< equal-length packets, normalized separately
};

struct SymbolStream {
    CodedSymbolVector symbols;
    SymbolStreamMeta meta;

    std::size_t packet_length() const { return meta.packet_count == 0 ? 0 : symbols.data.size() / meta.packet_count; }
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& payload) {
    std::filesystem::path p = payload;
    p += ".json";
    return p;
}

inline nlohmann::ordered_json to_json(const SymbolStreamMeta& m) {
    nlohmann::ordered_json j;
    j["format_version"] = m.format_version;
    j["element_type"] = m.element_type;
    j["element_count"] = m.element_count;
    j["source_length"] = m.source_length;
    j["bandwidth_ratio"] = m.bandwidth_ratio;
    j["power"] = m.power;
    j["pad_length"] = m.pad_length;
    j["producer"] = m.producer;
    j["config_hash"] = m.config_hash;
    j["packet_count"] = m.packet_count;
    return j;
}

inline void write_symbols(const std::filesystem::path& path, const CodedSymbolVector& s, SymbolStreamMeta meta) {
    meta.element_count = s.data.size();
    if (meta.source_length == 0) meta.source_length = s.source_length;
    if (meta.bandwidth_ratio == 0.0 && meta.source_length > 0 && meta.packet_count > 0)
        meta.bandwidth_ratio = static_cast<double>(s.data.size() / meta.packet_count) / (2.0 * static_cast<double>(meta.source_length));
    std::string payload(4 * s.data.size(), '\0');
    for (std::size_t i = 0; i < s.data.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(s.data[i]));
        for (int b = 0; b < 4; ++b) payload[4 * i + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
    write_file_atomic(path, payload);
    write_file_atomic(sidecar_path(path), to_json(meta).dump(2) + "\n");
}

/// Reads a stream; when expected_hash is given it must match the sidecar's.
inline SymbolStream read_symbols(const std::filesystem::path& path, const std::optional<std::string>& expected_hash = {}) {
    SymbolStream out;
    nlohmann::json j;
    {
        std::ifstream f(sidecar_path(path));
        if (!f) throw Error(ErrorCode::sidecar_unreadable, "missing sidecar " + sidecar_path(path).string());
        try {
            f >> j;
            auto& m = out.meta;
            m.format_version = j.at("format_version").get<int>();
            if (m.format_version != kSymbolFormatVersion)
                throw Error(ErrorCode::version_mismatch, "unsupported symbol stream version " + std::to_string(m.format_version));
            m.element_type = j.at("element_type").get<std::string>();
            if (m.element_type != "float32le") throw Error(ErrorCode::sidecar_unreadable, "unsupported element type " + m.element_type);
            m.element_count = j.at("element_count").get<std::size_t>();
            m.source_length = j.value("source_length", std::size_t{0});
            m.bandwidth_ratio = j.value("bandwidth_ratio", 0.0);
            m.power = j.value("power", 1.0);
            m.pad_length = j.value("pad_length", std::size_t{0});
            m.producer = j.value("producer", std::string{});
            m.config_hash = j.value("config_hash", std::string{});
            m.packet_count = j.value("packet_count", std::size_t{1});
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::sidecar_unreadable, std::string("bad sidecar: ") + e.what());
        }
    }
    if (out.meta.packet_count == 0 || out.meta.element_count % out.meta.packet_count != 0)
        throw Error(ErrorCode::sidecar_unreadable, "element_count is not a multiple of packet_count");
    if (expected_hash && !out.meta.config_hash.empty() && *expected_hash != out.meta.config_hash)
        throw Error(ErrorCode::config_hash_mismatch, "stream config hash " + out.meta.config_hash + " != " + *expected_hash);

    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_failure, "cannot open payload " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string bytes = ss.str();
    if (bytes.size() != 4 * out.meta.element_count)
        throw Error(ErrorCode::payload_length, "payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                                                   std::to_string(4 * out.meta.element_count));
    out.symbols.data.resize(out.meta.element_count);
    for (std::size_t i = 0; i < out.meta.element_count; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + static_cast<std::size_t>(b)])) << (8 * b);
        out.symbols.data[i] = std::bit_cast<float>(bits);
    }
    out.symbols.source_length = out.meta.source_length;
    return out;
}

/// i.i.d. N(0, P) reals.
inline CodedSymbolVector gen_gaussian_symbols(std::size_t length, double power, std::uint64_t seed) {
    if (length < 2) throw Error(ErrorCode::degenerate_input, "need at least two symbols");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, std::sqrt(power));
    CodedSymbolVector out;
    out.data.resize(length);
    for (auto& v : out.data) v = dist(gen);
    return out;
}

} // namespace pbsim

#endif // PBSIM_SYMBOL_IO_HPP
