#ifndef PBSIM_CHAIN_HPP
#define PBSIM_CHAIN_HPP

// End-to-end transmitter and receiver: blocks -> OFDM -> RRC shaping at the
// passband rate -> carrier -> optional clipping, and the ideal-sync
// matched-filter receiver back to blocks.

#include <vector>

#include "pbsim/clipping.hpp"
#include "pbsim/passband.hpp"
#include "pbsim/waveform.hpp"

namespace pbsim {

/// Polyphase form of a zero-stuff-and-filter interpolator; same output as
/// pulse_shape() but with the tap layout prepared once.
class PolyphaseShaper {
public:
    explicit PolyphaseShaper(const RrcFilter& f)
        : sps_(static_cast<std::size_t>(f.sps)), len_(f.taps.size()), per_phase_((len_ + sps_ - 1) / sps_),
          poly_(sps_ * per_phase_, 0.0) {
        for (std::size_t r = 0; r < sps_; ++r)
            for (std::size_t j = 0; j < per_phase_; ++j)
                if (r + j * sps_ < len_) poly_[r * per_phase_ + j] = f.taps[r + j * sps_];
    }

    std::size_t output_length(std::size_t symbols) const { return symbols == 0 ? 0 : (symbols - 1) * sps_ + len_; }

    /// Shapes and writes Re{x[n] * carrier(n)} straight into out.
    void shape_upconvert(std::span<const cplx> symbols, const Carrier& carrier, rvec& out) const {
        const std::size_t k = symbols.size();
        const std::size_t n_out = output_length(k);
        out.assign(n_out, 0.0);
        if (k == 0) return;
        re_.assign(k + 2 * per_phase_, 0.0);
        im_.assign(k + 2 * per_phase_, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            re_[i + per_phase_] = symbols[i].real();
            im_[i + per_phase_] = symbols[i].imag();
        }
        for (std::size_t a = 0; a * sps_ < n_out; ++a) {
            const double* sr = re_.data() + a + per_phase_;
            const double* si = im_.data() + a + per_phase_;
            for (std::size_t r = 0; r < sps_ && a * sps_ + r < n_out; ++r) {
                const double* p = poly_.data() + r * per_phase_;
                double ar = 0.0, ai = 0.0;
                for (std::size_t j = 0; j < per_phase_; ++j) {
                    ar += *(sr - j) * p[j];
                    ai += *(si - j) * p[j];
                }
                const std::size_t n = a * sps_ + r;
                const cplx c = carrier.at(n);
                out[n] = ar * c.real() - ai * c.imag();
            }
        }
    }

private:
    std::size_t sps_, len_, per_phase_;
    rvec poly_;
    mutable rvec re_, im_;  // scratch
};

/// Holds the filters and carrier tables for one configuration. Instances
/// carry per-object scratch buffers; use one per worker thread.
class Transceiver {
public:
    explicit Transceiver(WaveformConfig cfg)
        : cfg_(resolved(std::move(cfg))),
          filter_(design_rrc(cfg_.rolloff, cfg_.rrc_span, cfg_.passband_sps())),
          shaper_(filter_),
          carrier_(cfg_.carrier, cfg_.passband_fs) {
        const std::size_t len = filter_.taps.size();
        mf_re_.resize(len);
        mf_im_.resize(len);
        for (std::size_t i = 0; i < len; ++i) {
            const cplx g = 2.0 * filter_.taps[i] * std::conj(carrier_.at(i));
            mf_re_[i] = g.real();
            mf_im_[i] = g.imag();
        }
    }

    const WaveformConfig& config() const { return cfg_; }
    const RrcFilter& filter() const { return filter_; }
    const Carrier& carrier() const { return carrier_; }

    /// CP-extended OFDM samples of all blocks at the baud rate.
    cvec baseband(const std::vector<SymbolBlock>& blocks) const {
        cvec out;
        out.reserve(blocks.size() * static_cast<std::size_t>(cfg_.ofdm_symbol_len()));
        for (const auto& b : blocks) {
            cvec s = modulate_block(b, cfg_);
            out.insert(out.end(), s.begin(), s.end());
        }
        return out;
    }

    /// Shaped, upconverted (unclipped) passband signal for baud-rate samples.
    PassbandSignal passband(std::span<const cplx> symbols, std::size_t windows) const {
        check_nyquist(cfg_.carrier, cfg_.passband_fs, cfg_.occupied_bandwidth());
        PassbandSignal s;
        s.fs = cfg_.passband_fs;
        shaper_.shape_upconvert(symbols, carrier_, s.samples);
        s.t0 = -static_cast<std::ptrdiff_t>(filter_.group_delay());
        s.window_len = static_cast<std::size_t>(cfg_.ofdm_symbol_len()) * static_cast<std::size_t>(filter_.sps);
        s.windows = windows;
        return s;
    }

    PassbandSignal transmit(const std::vector<SymbolBlock>& blocks, const ClipPolicy& clip = ClipPolicy::off(),
                            WindowMode window = WindowMode::per_ofdm_symbol) const {
        cvec bb = baseband(blocks);
        PassbandSignal s = passband(bb, blocks.size());
        if (!clip.active()) return s;
        s = apply_clip(s, clip, window);
        if (clip.post_filter) {
            if (bandpass_.empty()) bandpass_ = design_bandpass(cfg_.carrier, 1.1 * cfg_.occupied_bandwidth(), cfg_.passband_fs);
            s.samples = filter_same(s.samples, bandpass_);
        }
        return s;
    }

    /// Downconversion and matched filtering evaluated at the first count
    /// symbol instants (ideal timing and carrier reference).
    cvec receive_symbols(const PassbandSignal& s, std::size_t count) const {
        const auto sps = static_cast<std::size_t>(filter_.sps);
        const std::size_t len = mf_re_.size();
        if (s.samples.size() < (count == 0 ? 0 : (count - 1) * sps + len))
            throw Error(ErrorCode::length_mismatch, "received signal shorter than expected");
        cvec out(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double* x = s.samples.data() + k * sps;
            double ar = 0.0, ai = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                ar += x[i] * mf_re_[i];
                ai += x[i] * mf_im_[i];
            }
            out[k] = cplx(ar, ai) * std::conj(carrier_.at(k * sps));
        }
        return out;
    }

    std::vector<SymbolBlock> receive(const PassbandSignal& s, std::size_t blocks) const {
        const auto sym_len = static_cast<std::size_t>(cfg_.ofdm_symbol_len());
        cvec y = receive_symbols(s, blocks * sym_len);
        std::vector<SymbolBlock> out;
        out.reserve(blocks);
        for (std::size_t l = 0; l < blocks; ++l)
            out.push_back(demodulate_block(std::span<const cplx>(y.data() + l * sym_len, sym_len), cfg_));
        return out;
    }

    std::vector<SymbolBlock> receive(const PassbandSignal& s) const { return receive(s, s.windows); }

private:
    WaveformConfig cfg_;
    RrcFilter filter_;
    PolyphaseShaper shaper_;
    Carrier carrier_;
    rvec mf_re_, mf_im_;
    mutable rvec bandpass_;
};

inline PassbandSignal transmit_chain(const std::vector<SymbolBlock>& blocks, const WaveformConfig& cfg,
                                     const ClipPolicy& clip = ClipPolicy::off(),
                                     WindowMode window = WindowMode::per_ofdm_symbol) {
    return Transceiver(cfg).transmit(blocks, clip, window);
}

inline std::vector<SymbolBlock> receive_chain(const PassbandSignal& s, const WaveformConfig& cfg) {
    return Transceiver(cfg).receive(s);
}

/// EVM in dB of rx against reference tx (blockwise, equal shapes).
inline double evm_db(const std::vector<SymbolBlock>& tx, const std::vector<SymbolBlock>& rx) {
    double err = 0.0, ref = 0.0;
    for (std::size_t l = 0; l < tx.size() && l < rx.size(); ++l) {
        for (std::size_t i = 0; i < tx[l].data.size(); ++i) {
            err += std::norm(rx[l].data[i] - tx[l].data[i]);
            ref += std::norm(tx[l].data[i]);
        }
    }
    return to_db(err / ref);
}

inline double evm_db(std::span<const cplx> tx, std::span<const cplx> rx) {
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < tx.size() && i < rx.size(); ++i) {
        err += std::norm(rx[i] - tx[i]);
        ref += std::norm(tx[i]);
    }
    return to_db(err / ref);
}

} // namespace pbsim

#endif // PBSIM_CHAIN_HPP
