#ifndef PBSIM_WAVEFORM_HPP
#define PBSIM_WAVEFORM_HPP

// Symbol-domain transmit chain: power normalization, IQ mapping, block
// partitioning, DFT precoding, subcarrier mapping, OFDM (de)modulation and
// cyclic prefix handling. Every transform uses the unitary DFT convention.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pbsim/common.hpp"
#include "pbsim/dft.hpp"

namespace pbsim {

enum class AllocationMode { random, localized, interleaved };
enum class Precoding { none, dft };

inline const char* to_string(AllocationMode m) {
    switch (m) {
    case AllocationMode::random: return "random";
    case AllocationMode::localized: return "localized";
    case AllocationMode::interleaved: return "interleaved";
    }
    return "?";
}

inline const char* to_string(Precoding p) { return p == Precoding::dft ? "dft" : "none"; }

/// System parameters of one allocated user. Defaults are the Table-1 style
/// setup: 128 subcarriers, 64 allocated, CP 16, RRC rolloff 0.5, 1 MBd,
/// 25 MHz carrier, 100 MHz passband sampling.
struct WaveformConfig {
    int M = 128;
    int N = 64;
    std::vector<int> allocation;  ///< resolved subcarrier indices k_n; empty until resolved
    AllocationMode allocation_mode = AllocationMode::random;
    int interleave_offset = 1;
    std::uint64_t allocation_seed = 1;
    int cp_len = 16;
    Precoding precoding = Precoding::none;
    double rolloff = 0.5;
    double baud = 1e6;           ///< 1/T in Hz
    int oversample_factor = 10;  ///< baseband samples per symbol
    double carrier = 25e6;
    double passband_fs = 100e6;
    double power = 1.0;  ///< P, per real coded symbol
    double snr = 10.0;   ///< eta = P/N0, linear
    int rrc_span = 16;   ///< RRC length in symbols

    int ofdm_symbol_len() const { return M + cp_len; }
    double symbol_period() const { return 1.0 / baud; }
    double ofdm_symbol_duration() const { return ofdm_symbol_len() / baud; }
    /// One-sided occupied bandwidth of the shaped baseband, (1+beta)/(2T).
    double occupied_bandwidth() const { return (1.0 + rolloff) * baud / 2.0; }

    /// Passband samples per baseband symbol; passband_fs must be an integer
    /// multiple of the baud rate.
    int passband_sps() const { return static_cast<int>(std::lround(passband_fs / baud)); }
};

namespace detail {

// Fisher-Yates with a fixed generator so draws are identical across
// standard library implementations.
inline std::vector<int> draw_distinct(int m, int n, std::uint64_t seed) {
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 gen(seed);
    for (int i = m - 1; i > 0; --i) {
        const auto j = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace detail

/// Allocation implied by the config's mode (ignores any explicit list).
inline std::vector<int> make_allocation(const WaveformConfig& cfg) {
    if (cfg.N <= 0 || cfg.N > cfg.M) throw Error(ErrorCode::invalid_config, "require 0 < N <= M");
    std::vector<int> k;
    switch (cfg.allocation_mode) {
    case AllocationMode::random:
        return detail::draw_distinct(cfg.M, cfg.N, cfg.allocation_seed);
    case AllocationMode::localized:
        k.resize(static_cast<std::size_t>(cfg.N));
        std::iota(k.begin(), k.end(), 0);
        return k;
    case AllocationMode::interleaved: {
        if (cfg.M % cfg.N != 0) throw Error(ErrorCode::invalid_config, "interleaved allocation requires N | M");
        const int spacing = cfg.M / cfg.N;
        if (cfg.interleave_offset < 0 || cfg.interleave_offset >= spacing)
            throw Error(ErrorCode::invalid_config, "interleave offset must lie in [0, M/N)");
        for (int n = 0; n < cfg.N; ++n) k.push_back(cfg.interleave_offset + n * spacing);
        return k;
    }
    }
    return k;
}

inline void validate(const WaveformConfig& cfg) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_config, m); };
    if (cfg.M <= 0) fail("M must be positive");
    if (cfg.N <= 0 || cfg.N > cfg.M) fail("require 0 < N <= M");
    if (cfg.cp_len < 0 || cfg.cp_len >= cfg.M) fail("require 0 <= cp_len < M");
    if (!(cfg.rolloff >= 0.0 && cfg.rolloff <= 1.0)) fail("rolloff must lie in [0, 1]");
    if (!(cfg.baud > 0.0)) fail("baud must be positive");
    if (cfg.oversample_factor < 1) fail("oversample_factor must be >= 1");
    if (!(cfg.power > 0.0)) fail("power must be positive");
    if (!(cfg.snr > 0.0)) fail("snr must be positive");
    if (cfg.rrc_span < 8 || cfg.rrc_span % 2 != 0) fail("rrc_span must be an even number >= 8");
    if (std::abs(cfg.passband_fs / cfg.baud - cfg.passband_sps()) > 1e-9 * cfg.passband_sps())
        fail("passband_fs must be an integer multiple of baud");
    if (!(cfg.passband_fs > 2.0 * (cfg.carrier + cfg.occupied_bandwidth())))
        throw Error(ErrorCode::nyquist_violation, "passband_fs must exceed 2*(carrier + (1+rolloff)/(2T))");

    if (cfg.allocation.size() != static_cast<std::size_t>(cfg.N))
        fail("allocation must list exactly N subcarriers");
    std::vector<int> sorted = cfg.allocation;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("allocation has duplicates");
    for (int k : cfg.allocation) {
        if (k < 0 || k >= cfg.M)
            throw Error(ErrorCode::allocation_out_of_range, "allocation index " + std::to_string(k) + " out of range");
    }
    if (cfg.allocation_mode == AllocationMode::interleaved) {
        if (cfg.M % cfg.N != 0) fail("interleaved allocation requires N | M");
        const int spacing = cfg.M / cfg.N;
        for (int n = 0; n < cfg.N; ++n) {
            if (cfg.allocation[static_cast<std::size_t>(n)] != cfg.interleave_offset + n * spacing)
                fail("interleaved allocation must be k_n = q + n*M/N");
        }
    }
}

/// Fills cfg.allocation from the mode when it is empty, then validates.
inline WaveformConfig resolved(WaveformConfig cfg) {
    if (cfg.allocation.empty()) cfg.allocation = make_allocation(cfg);
    validate(cfg);
    return cfg;
}

struct SymbolBlock {
    cvec data;
};

/// Real coded symbols plus the source length they encode.
struct CodedSymbolVector {
    rvec data;
    std::size_t source_length = 0;

    double bandwidth_ratio() const {
        return source_length == 0 ? 0.0 : static_cast<double>(data.size()) / (2.0 * static_cast<double>(source_length));
    }
};

/// Zero-mean rescaling to average per-element power P.
inline rvec normalize_power(std::span<const double> s, double power) {
    if (s.size() < 2) throw Error(ErrorCode::degenerate_input, "need at least two coded symbols");
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double dev2 = 0.0, sq = 0.0;
    for (double v : s) {
        dev2 += (v - mean) * (v - mean);
        sq += v * v;
    }
    // rounding in the mean leaves a residue of order eps^2 for constant input
    if (!(dev2 > 1e-24 * sq)) throw Error(ErrorCode::degenerate_input, "coded symbols are constant");
    const double scale = std::sqrt(static_cast<double>(s.size()) * power / dev2);
    rvec out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = (s[i] - mean) * scale;
    return out;
}

inline cvec iq_map(std::span<const double> s) {
    if (s.size() % 2 != 0) throw Error(ErrorCode::length_mismatch, "IQ mapping needs an even number of reals");
    cvec out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {s[2 * i], s[2 * i + 1]};
    return out;
}

inline rvec iq_demap(std::span<const cplx> c) {
    rvec out(2 * c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        out[2 * i] = c[i].real();
        out[2 * i + 1] = c[i].imag();
    }
    return out;
}

struct Partition {
    std::vector<SymbolBlock> blocks;
    std::size_t pad = 0;  ///< zeros appended to the final block
};

inline Partition partition_blocks(std::span<const cplx> s, std::size_t n) {
    if (s.empty()) throw Error(ErrorCode::length_mismatch, "cannot partition an empty vector");
    if (n == 0) throw Error(ErrorCode::invalid_config, "block length must be positive");
    Partition p;
    const std::size_t count = (s.size() + n - 1) / n;
    p.pad = count * n - s.size();
    p.blocks.reserve(count);
    for (std::size_t l = 0; l < count; ++l) {
        SymbolBlock b{cvec(n)};
        for (std::size_t i = 0; i < n && l * n + i < s.size(); ++i) b.data[i] = s[l * n + i];
        p.blocks.push_back(std::move(b));
    }
    return p;
}

inline cvec join_blocks(const std::vector<SymbolBlock>& blocks, std::size_t pad) {
    cvec out;
    for (const auto& b : blocks) out.insert(out.end(), b.data.begin(), b.data.end());
    out.resize(out.size() - std::min(pad, out.size()));
    return out;
}

inline SymbolBlock dft_precode(const SymbolBlock& b) { return {unitary_dft(b.data)}; }
inline SymbolBlock dft_deprecode(const SymbolBlock& b) { return {unitary_idft(b.data)}; }

inline cvec map_subcarriers(const SymbolBlock& b, const WaveformConfig& cfg) {
    if (b.data.size() != cfg.allocation.size())
        throw Error(ErrorCode::length_mismatch, "block length differs from allocation size");
    cvec out(static_cast<std::size_t>(cfg.M));
    for (std::size_t n = 0; n < b.data.size(); ++n) {
        const int k = cfg.allocation[n];
        if (k < 0 || k >= cfg.M) throw Error(ErrorCode::allocation_out_of_range, "allocation index out of range");
        out[static_cast<std::size_t>(k)] = b.data[n];
    }
    return out;
}

inline SymbolBlock demap_subcarriers(std::span<const cplx> bins, const WaveformConfig& cfg) {
    if (bins.size() != static_cast<std::size_t>(cfg.M)) throw Error(ErrorCode::length_mismatch, "expected M bins");
    SymbolBlock b{cvec(cfg.allocation.size())};
    for (std::size_t n = 0; n < b.data.size(); ++n) {
        const int k = cfg.allocation[n];
        if (k < 0 || k >= cfg.M) throw Error(ErrorCode::allocation_out_of_range, "allocation index out of range");
        b.data[n] = bins[static_cast<std::size_t>(k)];
    }
    return b;
}

inline cvec ofdm_modulate(std::span<const cplx> bins) { return unitary_idft(bins); }
inline cvec ofdm_demodulate(std::span<const cplx> samples) { return unitary_dft(samples); }

/// IFDMA time samples built directly by repetition and a frequency shift of
/// q bins. Equal to dft_precode -> map_subcarriers -> ofdm_modulate for the
/// interleaved allocation k_n = q + n*M/N.
inline cvec ifdma_fast_construct(const SymbolBlock& b, const WaveformConfig& cfg) {
    const auto m = static_cast<std::size_t>(cfg.M);
    const std::size_t n = b.data.size();
    if (n == 0 || m % n != 0) throw Error(ErrorCode::invalid_config, "IFDMA requires N | M");
    const double amp = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    const double q = cfg.interleave_offset;
    cvec out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double phase = 2.0 * kPi * std::fmod(q * static_cast<double>(i), static_cast<double>(m)) / static_cast<double>(m);
        out[i] = amp * std::polar(1.0, phase) * b.data[i % n];
    }
    return out;
}

inline cvec add_cp(std::span<const cplx> x, std::size_t cp_len) {
    if (cp_len > x.size()) throw Error(ErrorCode::invalid_config, "cyclic prefix longer than symbol");
    cvec out;
    out.reserve(x.size() + cp_len);
    out.insert(out.end(), x.end() - static_cast<std::ptrdiff_t>(cp_len), x.end());
    out.insert(out.end(), x.begin(), x.end());
    return out;
}

inline cvec remove_cp(std::span<const cplx> x, std::size_t cp_len) {
    if (cp_len > x.size()) throw Error(ErrorCode::length_mismatch, "input shorter than cyclic prefix");
    return cvec(x.begin() + static_cast<std::ptrdiff_t>(cp_len), x.end());
}

/// Block -> CP-extended OFDM symbol (precoding applied when configured).
inline cvec modulate_block(const SymbolBlock& b, const WaveformConfig& cfg) {
    const SymbolBlock& src = b;
    cvec bins = cfg.precoding == Precoding::dft ? map_subcarriers(dft_precode(src), cfg) : map_subcarriers(src, cfg);
    return add_cp(ofdm_modulate(bins), static_cast<std::size_t>(cfg.cp_len));
}

/// CP-extended OFDM symbol samples -> block.
inline SymbolBlock demodulate_block(std::span<const cplx> samples, const WaveformConfig& cfg) {
    cvec body = remove_cp(samples, static_cast<std::size_t>(cfg.cp_len));
    SymbolBlock b = demap_subcarriers(ofdm_demodulate(body), cfg);
    return cfg.precoding == Precoding::dft ? dft_deprecode(b) : b;
}

/// Bookkeeping needed to invert encode_stream at the receiver.
struct StreamFraming {
    std::size_t reals = 0;     ///< L_e before padding
    std::size_t real_pad = 0;  ///< 0 or 1 zero appended for IQ mapping
    std::size_t block_pad = 0; ///< complex zeros in the final block
};

struct EncodedStream {
    std::vector<SymbolBlock> blocks;
    StreamFraming framing;
};

/// normalize -> pad to even -> IQ map -> partition into N-symbol blocks.
inline EncodedStream encode_stream(std::span<const double> coded, const WaveformConfig& cfg) {
    EncodedStream out;
    rvec norm = normalize_power(coded, cfg.power);
    out.framing.reals = norm.size();
    if (norm.size() % 2 != 0) {
        norm.push_back(0.0);
        out.framing.real_pad = 1;
    }
    Partition p = partition_blocks(iq_map(norm), static_cast<std::size_t>(cfg.N));
    out.blocks = std::move(p.blocks);
    out.framing.block_pad = p.pad;
    return out;
}

inline rvec decode_stream(const std::vector<SymbolBlock>& blocks, const StreamFraming& f) {
    rvec r = iq_demap(join_blocks(blocks, f.block_pad));
    r.resize(f.reals);
    return r;
}

} // namespace pbsim

#endif // PBSIM_WAVEFORM_HPP
