#ifndef PBSIM_SWEEP_HPP
#define PBSIM_SWEEP_HPP

// Monte-Carlo PAPR collection over a packet source and clipping-ratio sweeps.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pbsim/chain.hpp"
#include "pbsim/papr.hpp"
#include "pbsim/parallel.hpp"
#include "pbsim/sources.hpp"

namespace pbsim {

struct RunOptions {
    std::size_t windows = 100000;  ///< PAPR windows to collect
    WindowMode window = WindowMode::per_ofdm_symbol;
    unsigned jobs = 1;
};

namespace detail {

inline std::size_t packets_for(std::size_t windows, WindowMode mode, std::size_t blocks_per_packet) {
    if (mode == WindowMode::per_packet) return windows;
    return (windows + blocks_per_packet - 1) / blocks_per_packet;
}

inline std::vector<Transceiver> make_workers(const WaveformConfig& cfg, unsigned jobs) {
    std::vector<Transceiver> w;
    const Transceiver first(cfg);
    for (unsigned i = 0; i < std::max(1u, jobs); ++i) w.push_back(first);
    return w;
}

} // namespace detail

/// PAPR of `opt.windows` windows drawn from consecutive packets of the source.
inline PaprSampleSet collect_source_papr(const WaveformConfig& cfg, const PacketSource& source, const RunOptions& opt,
                                         const ClipPolicy& clip = ClipPolicy::off()) {
    const std::size_t per_packet = source(0).blocks.size();
    const std::size_t packets = detail::packets_for(opt.windows, opt.window, per_packet);
    auto workers = detail::make_workers(cfg, opt.jobs);
    auto sets = parallel_map(packets, opt.jobs, [&](std::size_t i, unsigned w) {
        const Packet p = source(i);
        return collect_papr(workers[w].transmit(p.blocks, clip, opt.window), opt.window);
    });
    PaprSampleSet out;
    out.window = opt.window;
    for (const auto& s : sets) out.merge(s);
    out.values.resize(std::min(out.values.size(), opt.windows));
    return out;
}

/// PAPR of the discrete complex OFDM samples (no CP, no pulse shaping), one
/// value per OFDM symbol.
inline PaprSampleSet collect_baseband_papr(const WaveformConfig& cfg, const PacketSource& source, std::size_t windows,
                                           unsigned jobs = 1) {
    const WaveformConfig rc = resolved(cfg);
    const std::size_t per_packet = source(0).blocks.size();
    const std::size_t packets = detail::packets_for(windows, WindowMode::per_ofdm_symbol, per_packet);
    auto sets = parallel_map(packets, jobs, [&](std::size_t i, unsigned) {
        PaprSampleSet s;
        for (const auto& b : source(i).blocks) {
            const SymbolBlock x = rc.precoding == Precoding::dft ? dft_precode(b) : b;
            s.values.push_back(papr(std::span<const cplx>(ofdm_modulate(map_subcarriers(x, rc)))));
        }
        return s;
    });
    PaprSampleSet out;
    for (const auto& s : sets) out.merge(s);
    out.values.resize(std::min(out.values.size(), windows));
    return out;
}

/// A per-packet metric reduced as finish(sum of first, sum of second).
struct SweepMetric {
    std::string name;
    std::function<std::array<double, 2>(const Packet&, const PassbandSignal&, const Transceiver&, std::size_t)> partial;
    std::function<double(double, double)> finish;
};

/// Noiseless symbol-domain EVM in dB.
inline SweepMetric evm_metric() {
    return {"evm_db",
            [](const Packet& p, const PassbandSignal& s, const Transceiver& t, std::size_t) {
                const auto rx = t.receive(s, p.blocks.size());
                double err = 0.0, ref = 0.0;
                for (std::size_t l = 0; l < p.blocks.size(); ++l)
                    for (std::size_t i = 0; i < p.blocks[l].data.size(); ++i) {
                        err += std::norm(rx[l].data[i] - p.blocks[l].data[i]);
                        ref += std::norm(p.blocks[l].data[i]);
                    }
                return std::array<double, 2>{err, ref};
            },
            [](double err, double ref) { return to_db(err / ref); }};
}

struct SweepRow {
    double gamma;
    double gamma3_db;
    std::string metric_name;
    double metric_value;
};

/// For each clipping ratio, runs the chain over the same packets and reports
/// the 99.9-percentile PAPR and the metric. proto supplies mode, epsilon and
/// flags; gamma = inf is the unclipped baseline.
inline std::vector<SweepRow> clip_sweep(const WaveformConfig& cfg, const PacketSource& source, std::span<const double> gammas,
                                        const RunOptions& opt, const SweepMetric& metric,
                                        const ClipPolicy& proto = ClipPolicy::hard(kInf), double percentile_p = 1e-3) {
    for (double g : gammas)
        if (!(g > 0.0)) throw Error(ErrorCode::invalid_config, "clipping ratios must be positive");
    const std::size_t per_packet = source(0).blocks.size();
    const std::size_t packets = detail::packets_for(opt.windows, opt.window, per_packet);
    auto workers = detail::make_workers(cfg, opt.jobs);
    std::vector<SweepRow> rows;
    for (double g : gammas) {
        ClipPolicy clip = proto;
        clip.gamma = g;
        struct Part {
            PaprSampleSet papr;
            std::array<double, 2> m{};
        };
        auto parts = parallel_map(packets, opt.jobs, [&](std::size_t i, unsigned w) {
            const Packet p = source(i);
            const PassbandSignal s = workers[w].transmit(p.blocks, clip, opt.window);
            return Part{collect_papr(s, opt.window), metric.partial(p, s, workers[w], i)};
        });
        PaprSampleSet all;
        all.window = opt.window;
        std::array<double, 2> acc{};
        for (const auto& p : parts) {
            all.merge(p.papr);
            acc[0] += p.m[0];
            acc[1] += p.m[1];
        }
        all.values.resize(std::min(all.values.size(), opt.windows));
        rows.push_back({g, gamma_percentile(all, percentile_p), metric.name, metric.finish(acc[0], acc[1])});
    }
    return rows;
}

} // namespace pbsim

#endif // PBSIM_SWEEP_HPP
