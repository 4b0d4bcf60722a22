#ifndef PBSIM_CONFIG_IO_HPP
#define PBSIM_CONFIG_IO_HPP

// Flat key = value configuration files mirroring WaveformConfig, and the
// configuration hash stamped on every exported row.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pbsim/waveform.hpp"

namespace pbsim {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || p != last) throw Error(ErrorCode::invalid_config, "bad value for '" + key + "': '" + v + "'");
    return out;
}

} // namespace detail

inline void set_config_value(WaveformConfig& cfg, const std::string& key, const std::string& raw) {
    using detail::parse_number;
    const std::string v = detail::trim(raw);
    if (key == "M") cfg.M = parse_number<int>(key, v);
    else if (key == "N") cfg.N = parse_number<int>(key, v);
    else if (key == "allocation") {
        cfg.allocation.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) cfg.allocation.push_back(parse_number<int>(key, item));
        }
    } else if (key == "allocation_mode") {
        if (v == "random") cfg.allocation_mode = AllocationMode::random;
        else if (v == "localized") cfg.allocation_mode = AllocationMode::localized;
        else if (v == "interleaved") cfg.allocation_mode = AllocationMode::interleaved;
        else throw Error(ErrorCode::invalid_config, "unknown allocation_mode '" + v + "'");
    } else if (key == "interleave_offset") cfg.interleave_offset = parse_number<int>(key, v);
    else if (key == "allocation_seed") cfg.allocation_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "cp_len") cfg.cp_len = parse_number<int>(key, v);
    else if (key == "precoding") {
        if (v == "none") cfg.precoding = Precoding::none;
        else if (v == "dft") cfg.precoding = Precoding::dft;
        else throw Error(ErrorCode::invalid_config, "unknown precoding '" + v + "'");
    } else if (key == "rolloff") cfg.rolloff = parse_number<double>(key, v);
    else if (key == "baud") cfg.baud = parse_number<double>(key, v);
    else if (key == "oversample_factor") cfg.oversample_factor = parse_number<int>(key, v);
    else if (key == "carrier") cfg.carrier = parse_number<double>(key, v);
    else if (key == "passband_fs") cfg.passband_fs = parse_number<double>(key, v);
    else if (key == "power") cfg.power = parse_number<double>(key, v);
    else if (key == "snr") cfg.snr = parse_number<double>(key, v);
    else if (key == "rrc_span") cfg.rrc_span = parse_number<int>(key, v);
    else throw Error(ErrorCode::invalid_config, "unknown config key '" + key + "'");
}

/// Parses "key = value" lines; '#' starts a comment. Keys absent from the
/// text keep the defaults of `base`.
inline WaveformConfig parse_config(std::string_view text, WaveformConfig base = {}) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::invalid_config, "line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

inline WaveformConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::io_failure, "cannot open config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const WaveformConfig& c) {
    using detail::fmt_double;
    std::ostringstream o;
    o << "M = " << c.M << '\n' << "N = " << c.N << '\n' << "allocation = ";
    for (std::size_t i = 0; i < c.allocation.size(); ++i) o << (i ? "," : "") << c.allocation[i];
    o << '\n'
      << "allocation_mode = " << to_string(c.allocation_mode) << '\n'
      << "interleave_offset = " << c.interleave_offset << '\n'
      << "allocation_seed = " << c.allocation_seed << '\n'
      << "cp_len = " << c.cp_len << '\n'
      << "precoding = " << to_string(c.precoding) << '\n'
      << "rolloff = " << fmt_double(c.rolloff) << '\n'
      << "baud = " << fmt_double(c.baud) << '\n'
      << "oversample_factor = " << c.oversample_factor << '\n'
      << "carrier = " << fmt_double(c.carrier) << '\n'
      << "passband_fs = " << fmt_double(c.passband_fs) << '\n'
      << "power = " << fmt_double(c.power) << '\n'
      << "snr = " << fmt_double(c.snr) << '\n'
      << "rrc_span = " << c.rrc_span << '\n';
    return o.str();
}

/// FNV-1a 64 over the canonical text of the resolved config, as 16 hex digits.
inline std::string config_hash(const WaveformConfig& cfg) {
    const std::string text = serialize_config(cfg.allocation.empty() ? resolved(cfg) : cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::ordered_json config_json(const WaveformConfig& c) {
    nlohmann::ordered_json j;
    j["M"] = c.M;
    j["N"] = c.N;
    j["allocation"] = c.allocation;
    j["allocation_mode"] = to_string(c.allocation_mode);
    j["interleave_offset"] = c.interleave_offset;
    j["allocation_seed"] = c.allocation_seed;
    j["cp_len"] = c.cp_len;
    j["precoding"] = to_string(c.precoding);
    j["rolloff"] = c.rolloff;
    j["baud"] = c.baud;
    j["oversample_factor"] = c.oversample_factor;
    j["carrier"] = c.carrier;
    j["passband_fs"] = c.passband_fs;
    j["power"] = c.power;
    j["snr"] = c.snr;
    j["rrc_span"] = c.rrc_span;
    return j;
}

/// Writes via a temporary file and rename so readers never see partial output.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::io_failure, "cannot write " + tmp.string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw Error(ErrorCode::io_failure, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::io_failure, "cannot rename " + tmp.string() + ": " + ec.message());
}

} // namespace pbsim

#endif // PBSIM_CONFIG_IO_HPP
