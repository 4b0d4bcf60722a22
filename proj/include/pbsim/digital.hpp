#ifndef PBSIM_DIGITAL_HPP
#define PBSIM_DIGITAL_HPP

// Uncoded Gray QPSK / 16QAM through the passband chain: mapping, BER
// Monte-Carlo and PAPR baselines for OFDMA, LFDMA and IFDMA.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pbsim/sweep.hpp"

namespace pbsim {

/// Square Gray-labelled constellation with unit average power.
/// points[label] is the point for the label's bits, MSB first.
struct Constellation {
    int order = 4;
    cvec points;

    int bits_per_symbol() const { return order == 16 ? 4 : 2; }
};

namespace detail {

// Gray 4-PAM: 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3
inline double gray_pam4(unsigned b0, unsigned b1) {
    const double mag = b1 ? 1.0 : 3.0;
    return b0 ? -mag : mag;
}

} // namespace detail

inline Constellation make_constellation(int order) {
    Constellation c;
    c.order = order;
    if (order == 4) {
        const double a = 1.0 / std::sqrt(2.0);
        for (unsigned l = 0; l < 4; ++l) c.points.emplace_back((l & 2u) ? -a : a, (l & 1u) ? -a : a);
    } else if (order == 16) {
        const double a = 1.0 / std::sqrt(10.0);
        for (unsigned l = 0; l < 16; ++l) {
            const double i = detail::gray_pam4((l >> 3) & 1u, (l >> 2) & 1u);
            const double q = detail::gray_pam4((l >> 1) & 1u, l & 1u);
            c.points.emplace_back(a * i, a * q);
        }
    } else {
        throw Error(ErrorCode::invalid_config, "constellation order must be 4 or 16");
    }
    return c;
}

inline cvec qam_map(std::span<const std::uint8_t> bits, const Constellation& c) {
    const auto bps = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % bps != 0) throw Error(ErrorCode::length_mismatch, "bit count not divisible by bits per symbol");
    cvec out(bits.size() / bps);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned label = 0;
        for (std::size_t b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
        out[s] = c.points[label];
    }
    return out;
}

/// Minimum-Euclidean-distance hard decisions.
inline std::vector<std::uint8_t> qam_demap(std::span<const cplx> symbols, const Constellation& c) {
    const auto bps = static_cast<std::size_t>(c.bits_per_symbol());
    std::vector<std::uint8_t> bits(symbols.size() * bps);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        std::size_t best = 0;
        double best_d = kInf;
        for (std::size_t l = 0; l < c.points.size(); ++l) {
            const double d = std::norm(symbols[s] - c.points[l]);
            if (d < best_d) {
                best_d = d;
                best = l;
            }
        }
        for (std::size_t b = 0; b < bps; ++b) bits[s * bps + b] = static_cast<std::uint8_t>((best >> (bps - 1 - b)) & 1u);
    }
    return bits;
}

inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Closed-form Gray-coded AWGN bit error rate versus Eb/N0 (linear).
inline double ber_awgn(int order, double ebn0) {
    if (order == 4) return qfunc(std::sqrt(2.0 * ebn0));
    if (order == 16) {
        const double x = std::sqrt(0.8 * ebn0);
        return (3.0 * qfunc(x) + 2.0 * qfunc(3.0 * x) - qfunc(5.0 * x)) / 4.0;
    }
    throw Error(ErrorCode::invalid_config, "constellation order must be 4 or 16");
}

/// Random bits mapped to `blocks` blocks of N symbols, scaled to average
/// complex power 2P so they enter the chain like IQ-mapped coded symbols.
inline PacketSource qam_source(const WaveformConfig& cfg, const Constellation& c, std::size_t blocks, std::uint64_t seed) {
    return [cfg, c, blocks, seed](std::size_t i) {
        std::mt19937_64 gen(derive_seed(seed, i));
        Packet p;
        const std::size_t n = static_cast<std::size_t>(cfg.N);
        p.bits.resize(blocks * n * static_cast<std::size_t>(c.bits_per_symbol()));
        std::uint64_t word = 0;
        for (std::size_t b = 0; b < p.bits.size(); ++b) {
            if (b % 64 == 0) word = gen();
            p.bits[b] = static_cast<std::uint8_t>((word >> (b % 64)) & 1u);
        }
        cvec sym = qam_map(p.bits, c);
        const double amp = std::sqrt(2.0 * cfg.power);
        for (auto& v : sym) v *= amp;
        Partition part = partition_blocks(sym, n);
        p.blocks = std::move(part.blocks);
        return p;
    };
}

inline PaprSampleSet papr_baseline(const Constellation& c, const WaveformConfig& cfg, AccessMode mode, const RunOptions& opt,
                                   std::uint64_t seed, std::size_t blocks_per_packet = 4) {
    const WaveformConfig m = with_access_mode(cfg, mode);
    return collect_source_papr(m, qam_source(m, c, blocks_per_packet, seed), opt);
}

struct BerPoint {
    double eta = 0.0;  ///< Es/N0 = P/N0 per real dimension, linear
    double eta_db = 0.0;
    double ebn0_db = 0.0;
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    double ber = 0.0;
    double ci_lo = 0.0;  ///< 95% Wilson interval
    double ci_hi = 0.0;
};

inline std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials, double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    if (errors == 0) return {0.0, std::min(1.0, centre + half)};
    if (errors == trials) return {std::max(0.0, centre - half), 1.0};
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct BerOptions {
    std::uint64_t min_errors = 100;
    std::uint64_t max_bits = 100'000'000;
    std::size_t blocks_per_packet = 4;
    std::size_t packets_per_round = 32;  ///< stopping is checked between rounds
    double floor_ber = 0.0;              ///< also stop once the 95% upper bound is below this
    WindowMode window = WindowMode::per_ofdm_symbol;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

/// Monte-Carlo BER through the full passband chain. Each packet's waveform
/// is shared by all SNR points; noise for (point j, packet i) is seeded by
/// derive_seed(seed, j, i). A point stops once it has min_errors errors or
/// max_bits bits, checked after each round so results do not depend on jobs.
inline std::vector<BerPoint> ber_sim(const Constellation& c, const WaveformConfig& cfg, std::span<const double> etas,
                                     const ClipPolicy& clip, const BerOptions& opt) {
    if (opt.min_errors < 1) throw Error(ErrorCode::invalid_config, "min_errors must be positive");
    const WaveformConfig rc = resolved(cfg);
    const PacketSource source = qam_source(rc, c, opt.blocks_per_packet, opt.seed);
    auto workers = detail::make_workers(rc, opt.jobs);
    const double amp = std::sqrt(2.0 * rc.power);

    std::vector<BerPoint> pts(etas.size());
    std::vector<bool> done(etas.size(), false);
    for (std::size_t j = 0; j < etas.size(); ++j) {
        pts[j].eta = etas[j];
        pts[j].eta_db = to_db(etas[j]);
        pts[j].ebn0_db = pts[j].eta_db - to_db(c.bits_per_symbol());
    }
    std::size_t next_packet = 0;
    while (std::find(done.begin(), done.end(), false) != done.end()) {
        const std::size_t base = next_packet;
        next_packet += opt.packets_per_round;
        auto counts = parallel_map(opt.packets_per_round, opt.jobs, [&](std::size_t k, unsigned w) {
            const std::size_t i = base + k;
            const Transceiver& t = workers[w];
            const Packet p = source(i);
            const PassbandSignal tx = t.transmit(p.blocks, clip, opt.window);
            std::vector<std::uint64_t> errs(etas.size(), 0);
            PassbandSignal rx_sig;
            for (std::size_t j = 0; j < etas.size(); ++j) {
                if (done[j]) continue;
                rx_sig = tx;
                std::mt19937_64 gen(derive_seed(opt.seed ^ 0x6e6f697365ULL, j, i));
                add_awgn(std::span<double>(rx_sig.samples), calibrate_noise(etas[j], rc), gen);
                const auto rx = t.receive(rx_sig, p.blocks.size());
                cvec sym = join_blocks(rx, 0);
                for (auto& v : sym) v /= amp;
                const auto bits = qam_demap(sym, c);
                for (std::size_t b = 0; b < bits.size(); ++b) errs[j] += bits[b] != p.bits[b];
            }
            return errs;
        });
        const std::uint64_t bits_per_packet = opt.blocks_per_packet * static_cast<std::uint64_t>(rc.N) * static_cast<std::uint64_t>(c.bits_per_symbol());
        for (std::size_t j = 0; j < etas.size(); ++j) {
            if (done[j]) continue;
            for (const auto& e : counts) {
                pts[j].errors += e[j];
                pts[j].bits += bits_per_packet;
            }
            if (pts[j].errors >= opt.min_errors || pts[j].bits >= opt.max_bits) done[j] = true;
            if (opt.floor_ber > 0.0 && wilson_interval(pts[j].errors, pts[j].bits).second < opt.floor_ber) done[j] = true;
        }
    }
    for (auto& p : pts) {
        p.ber = p.bits ? static_cast<double>(p.errors) / static_cast<double>(p.bits) : 0.0;
        std::tie(p.ci_lo, p.ci_hi) = wilson_interval(p.errors, p.bits);
    }
    return pts;
}

/// SNR (dB, on the curve's eta axis) where the BER crosses `target`,
/// interpolating log10(BER) linearly between bracketing points. NaN when the
/// curve never crosses.
inline double snr_at_ber(const std::vector<BerPoint>& curve, double target) {
    for (std::size_t j = 1; j < curve.size(); ++j) {
        const auto& a = curve[j - 1];
        const auto& b = curve[j];
        if (a.ber >= target && b.ber < target) {
            if (b.ber <= 0.0) return b.eta_db;
            const double la = std::log10(a.ber), lb = std::log10(b.ber), lt = std::log10(target);
            return a.eta_db + (lt - la) / (lb - la) * (b.eta_db - a.eta_db);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace pbsim

#endif // PBSIM_DIGITAL_HPP
