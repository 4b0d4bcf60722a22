#ifndef PBSIM_SIGNAL_HPP
#define PBSIM_SIGNAL_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pbsim/common.hpp"

namespace pbsim {

/// Real passband samples. t0 is the time of samples[0] in samples relative
/// to the nominal start of the first OFDM symbol (negative: leading filter
/// transient). window_len/windows describe the OFDM symbol framing; a
/// signal without framing has windows == 0.
struct PassbandSignal {
    rvec samples;
    double fs = 0.0;
    std::ptrdiff_t t0 = 0;
    std::size_t window_len = 0;
    std::size_t windows = 0;
};

enum class WindowMode { per_ofdm_symbol, per_packet };

inline const char* to_string(WindowMode w) {
    return w == WindowMode::per_packet ? "per_packet" : "per_ofdm_symbol";
}

inline WindowMode parse_window_mode(const std::string& s) {
    if (s == "per_ofdm_symbol" || s == "symbol") return WindowMode::per_ofdm_symbol;
    if (s == "per_packet" || s == "packet") return WindowMode::per_packet;
    throw Error(ErrorCode::usage, "unknown window mode '" + s + "'");
}

using WindowBounds = std::vector<std::pair<std::size_t, std::size_t>>;

/// Half-open sample ranges of the measurement windows. Per-symbol windows
/// follow the OFDM symbol boundaries; the leading transient joins the first
/// window and the trailing transient the last, so the windows tile the
/// whole signal.
inline WindowBounds window_bounds(const PassbandSignal& s, WindowMode mode) {
    WindowBounds out;
    const std::size_t n = s.samples.size();
    if (n == 0) return out;
    if (mode == WindowMode::per_packet || s.windows <= 1 || s.window_len == 0) {
        out.emplace_back(0, n);
        return out;
    }
    const auto lead = static_cast<std::size_t>(s.t0 < 0 ? -s.t0 : 0);
    std::size_t begin = 0;
    for (std::size_t l = 0; l < s.windows; ++l) {
        std::size_t end = l + 1 == s.windows ? n : std::min(n, lead + (l + 1) * s.window_len);
        out.emplace_back(begin, end);
        begin = end;
    }
    return out;
}

} // namespace pbsim

#endif // PBSIM_SIGNAL_HPP
