#ifndef PBSIM_PASSBAND_HPP
#define PBSIM_PASSBAND_HPP

// RRC pulse shaping, carrier up/down conversion, and the AWGN channel.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>

#include "pbsim/common.hpp"
#include "pbsim/signal.hpp"
#include "pbsim/waveform.hpp"

namespace pbsim {

/// Unit-energy, linear-phase root-raised-cosine filter sampled at sps
/// samples per symbol over span symbols (span*sps + 1 taps).
struct RrcFilter {
    rvec taps;
    int span = 0;
    int sps = 0;
    double rolloff = 0.0;

    std::size_t group_delay() const { return static_cast<std::size_t>(span) * static_cast<std::size_t>(sps) / 2; }
};

/// Continuous RRC impulse response at t (in symbol periods), unnormalized.
inline double rrc_impulse(double t, double beta) {
    constexpr double eps = 1e-10;
    if (std::abs(t) < eps) return 1.0 - beta + 4.0 * beta / kPi;
    if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < eps) {
        const double a = kPi / (4.0 * beta);
        return beta / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
    const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
    return num / den;
}

inline RrcFilter design_rrc(double beta, int span, int sps) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::invalid_config, "RRC rolloff must lie in [0, 1]");
    if (span < 8 || span % 2 != 0) throw Error(ErrorCode::invalid_config, "RRC span must be even and >= 8");
    if (sps < 2) throw Error(ErrorCode::invalid_config, "RRC needs >= 2 samples per symbol");
    RrcFilter f;
    f.span = span;
    f.sps = sps;
    f.rolloff = beta;
    const std::size_t len = static_cast<std::size_t>(span) * static_cast<std::size_t>(sps) + 1;
    f.taps.resize(len);
    const double center = static_cast<double>(len - 1) / 2.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        f.taps[i] = rrc_impulse((static_cast<double>(i) - center) / sps, beta);
        energy += f.taps[i] * f.taps[i];
    }
    const double g = 1.0 / std::sqrt(energy);
    for (auto& v : f.taps) v *= g;
    return f;
}

/// Zero-stuff by filter.sps and filter with the RRC taps. Output sample
/// n corresponds to time (n - group_delay)/sps symbol periods; length is
/// (K-1)*sps + taps.size().
inline cvec pulse_shape(std::span<const cplx> symbols, const RrcFilter& f) {
    if (symbols.empty()) return {};
    const auto sps = static_cast<std::size_t>(f.sps);
    const std::size_t k = symbols.size();
    const std::size_t len = f.taps.size();
    const std::size_t per_phase = (len + sps - 1) / sps;
    // poly[r * per_phase + j] = taps[r + j*sps]
    rvec poly(sps * per_phase, 0.0);
    for (std::size_t r = 0; r < sps; ++r)
        for (std::size_t j = 0; j < per_phase; ++j)
            if (r + j * sps < len) poly[r * per_phase + j] = f.taps[r + j * sps];

    // symbols padded with per_phase zeros in front so a - j never underflows
    rvec re(k + 2 * per_phase, 0.0), im(k + 2 * per_phase, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        re[i + per_phase] = symbols[i].real();
        im[i + per_phase] = symbols[i].imag();
    }
    const std::size_t out_len = (k - 1) * sps + len;
    cvec out(out_len);
    for (std::size_t a = 0; a * sps < out_len; ++a) {
        const double* sr = re.data() + a + per_phase;  // sr[-j] = symbol a - j
        const double* si = im.data() + a + per_phase;
        for (std::size_t r = 0; r < sps && a * sps + r < out_len; ++r) {
            const double* p = poly.data() + r * per_phase;
            double ar = 0.0, ai = 0.0;
            for (std::size_t j = 0; j < per_phase; ++j) {
                ar += *(sr - j) * p[j];
                ai += *(si - j) * p[j];
            }
            out[a * sps + r] = {ar, ai};
        }
    }
    return out;
}

/// Matched filter sampled at symbol instants: y[k] = sum_i x[k*sps + i] h[i].
/// With x = pulse_shape(s), y[k] ~= s[k].
inline cvec matched_filter(std::span<const cplx> x, const RrcFilter& f, std::size_t count) {
    const auto sps = static_cast<std::size_t>(f.sps);
    cvec out(count);
    for (std::size_t k = 0; k < count; ++k) {
        cplx acc{};
        const std::size_t base = k * sps;
        for (std::size_t i = 0; i < f.taps.size() && base + i < x.size(); ++i) acc += x[base + i] * f.taps[i];
        out[k] = acc;
    }
    return out;
}

/// e^{j 2 pi fc n / fs} with exact phase reduction. When fc/fs is a ratio
/// of integers the phasors repeat and are served from a table.
class Carrier {
public:
    Carrier(double fc, double fs) : fc_(fc), fs_(fs) {
        const double ifc = std::round(fc), ifs = std::round(fs);
        if (ifc == fc && ifs == fs && ifs > 0 && ifc >= 0) {
            const auto g = std::gcd(static_cast<std::uint64_t>(ifc), static_cast<std::uint64_t>(ifs));
            const std::uint64_t period = g == 0 ? 1 : static_cast<std::uint64_t>(ifs) / g;
            if (period <= (1u << 20)) {
                table_.resize(period);
                const auto num = static_cast<std::uint64_t>(ifc) / (g == 0 ? 1 : g);
                for (std::uint64_t n = 0; n < period; ++n)
                    table_[n] = std::polar(1.0, 2.0 * kPi * static_cast<double>((num * n) % period) / static_cast<double>(period));
            }
        }
    }

    cplx at(std::size_t n) const {
        if (!table_.empty()) return table_[n % table_.size()];
        const long double cyc = static_cast<long double>(fc_) * static_cast<long double>(n) / static_cast<long double>(fs_);
        const long double frac = cyc - std::floor(cyc);
        return std::polar(1.0, static_cast<double>(2.0L * static_cast<long double>(kPi) * frac));
    }

    /// Table period in samples; 0 when not periodic.
    std::size_t period() const { return table_.size(); }

private:
    double fc_, fs_;
    cvec table_;
};

/// Hamming-windowed sinc band-pass centred on fc with one-sided bandwidth bw,
/// odd length, unit passband gain.
inline rvec design_bandpass(double fc, double bw, double fs, std::size_t taps = 801) {
    if (taps % 2 == 0) ++taps;
    if (!(bw > 0.0 && fc >= 0.0 && fs > 2.0 * (fc + bw))) throw Error(ErrorCode::invalid_config, "bad band-pass parameters");
    rvec h(taps);
    const double c = static_cast<double>(taps - 1) / 2.0;
    const double fcut = bw / fs;
    for (std::size_t i = 0; i < taps; ++i) {
        const double n = static_cast<double>(i) - c;
        const double lp = n == 0.0 ? 2.0 * fcut : std::sin(2.0 * kPi * fcut * n) / (kPi * n);
        const double w = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(taps - 1));
        h[i] = 2.0 * lp * w * std::cos(2.0 * kPi * fc / fs * n);
    }
    return h;
}

/// Zero-delay ("same" length) FIR filtering of a real signal with odd-length taps.
inline rvec filter_same(std::span<const double> x, std::span<const double> h) {
    const std::size_t half = h.size() / 2;
    rvec y(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        double acc = 0.0;
        const std::size_t lo = n + half >= x.size() ? n + half - (x.size() - 1) : 0;
        const std::size_t hi = std::min(h.size() - 1, n + half);
        for (std::size_t k = lo; k <= hi; ++k) acc += h[k] * x[n + half - k];
        y[n] = acc;
    }
    return y;
}

inline void check_nyquist(double fc, double fs, double occupied_bw) {
    if (!(fs > 2.0 * (fc + occupied_bw)))
        throw Error(ErrorCode::nyquist_violation, "passband sample rate below 2*(fc + bandwidth)");
}

/// x_RF[n] = Re{ x[n] e^{j 2 pi fc n / fs} }.
inline PassbandSignal upconvert(std::span<const cplx> baseband, double fc, double fs, double occupied_bw) {
    check_nyquist(fc, fs, occupied_bw);
    const Carrier c(fc, fs);
    PassbandSignal s;
    s.fs = fs;
    s.samples.resize(baseband.size());
    for (std::size_t n = 0; n < baseband.size(); ++n) {
        const cplx v = baseband[n] * c.at(n);
        s.samples[n] = v.real();
    }
    return s;
}

/// 2 x[n] e^{-j 2 pi fc n / fs}; the double-frequency image is left for
/// the matched filter to reject.
inline cvec downconvert(const PassbandSignal& s, double fc) {
    const Carrier c(fc, s.fs);
    cvec out(s.samples.size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = 2.0 * s.samples[n] * std::conj(c.at(n));
    return out;
}

/// Per-sample passband noise std. Receiver conventions (x2 downconversion,
/// unit-energy matched filter, unitary DFT) give each received real coded
/// symbol noise variance N0 = P/eta when sigma^2 = P/(2 eta).
inline double calibrate_noise(double eta, const WaveformConfig& cfg) {
    if (!(eta > 0.0)) throw Error(ErrorCode::invalid_config, "SNR must be positive");
    if (std::isinf(eta)) return 0.0;
    return std::sqrt(cfg.power / (2.0 * eta));
}

template <class Rng>
void add_awgn(std::span<double> x, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    std::normal_distribution<double> dist(0.0, sigma);
    for (auto& v : x) v += dist(rng);
}

template <class Rng>
PassbandSignal awgn_channel(const PassbandSignal& x, double sigma, Rng& rng) {
    if (sigma < 0.0) throw Error(ErrorCode::invalid_config, "noise std must be non-negative");
    PassbandSignal y = x;
    add_awgn(std::span<double>(y.samples), sigma, rng);
    return y;
}

} // namespace pbsim

#endif // PBSIM_PASSBAND_HPP
