#ifndef PBSIM_SOURCES_HPP
#define PBSIM_SOURCES_HPP

// Packet sources feeding the Monte-Carlo experiments. A source maps a
// packet index to the blocks of that packet, deterministically.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pbsim/symbol_io.hpp"
#include "pbsim/waveform.hpp"

namespace pbsim {

enum class AccessMode { ofdma, lfdma, ifdma };

inline const char* to_string(AccessMode m) {
    switch (m) {
    case AccessMode::ofdma: return "ofdma";
    case AccessMode::lfdma: return "lfdma";
    case AccessMode::ifdma: return "ifdma";
    }
    return "?";
}

inline AccessMode parse_access_mode(const std::string& s) {
    if (s == "ofdma") return AccessMode::ofdma;
    if (s == "lfdma") return AccessMode::lfdma;
    if (s == "ifdma") return AccessMode::ifdma;
    throw Error(ErrorCode::usage, "unknown mode '" + s + "' (expected ofdma, lfdma or ifdma)");
}

/// OFDMA: random allocation, no precoding. LFDMA/IFDMA: DFT precoding over
/// a localized / interleaved allocation. Any explicit allocation is dropped.
inline WaveformConfig with_access_mode(WaveformConfig cfg, AccessMode m) {
    cfg.allocation.clear();
    switch (m) {
    case AccessMode::ofdma:
        cfg.allocation_mode = AllocationMode::random;
        cfg.precoding = Precoding::none;
        break;
    case AccessMode::lfdma:
        cfg.allocation_mode = AllocationMode::localized;
        cfg.precoding = Precoding::dft;
        break;
    case AccessMode::ifdma:
        cfg.allocation_mode = AllocationMode::interleaved;
        cfg.precoding = Precoding::dft;
        break;
    }
    return resolved(cfg);
}

struct Packet {
    std::vector<SymbolBlock> blocks;  ///< before precoding
    std::vector<std::uint8_t> bits;   ///< digital sources only
    StreamFraming framing;
};

using PacketSource = std::function<Packet(std::size_t)>;

/// i.i.d. Gaussian coded symbols, `reals` per packet.
inline PacketSource gaussian_source(const WaveformConfig& cfg, std::size_t reals, std::uint64_t seed) {
    return [cfg, reals, seed](std::size_t i) {
        const CodedSymbolVector v = gen_gaussian_symbols(reals, 1.0, derive_seed(seed, i));
        EncodedStream e = encode_stream(v.data, cfg);
        return Packet{std::move(e.blocks), {}, e.framing};
    };
}

/// Packets read from a symbol stream; index wraps around the stored packets.
inline PacketSource stream_source(const WaveformConfig& cfg, SymbolStream stream) {
    const std::size_t n = stream.meta.packet_count;
    if (n == 0) throw Error(ErrorCode::sidecar_unreadable, "symbol stream has no packets");
    return [cfg, n, s = std::move(stream)](std::size_t i) {
        const std::size_t len = s.packet_length();
        std::span<const double> view(s.symbols.data.data() + (i % n) * len, len);
        EncodedStream e = encode_stream(view, cfg);
        return Packet{std::move(e.blocks), {}, e.framing};
    };
}

} // namespace pbsim

#endif // PBSIM_SOURCES_HPP
