#ifndef PBSIM_CLIPPING_HPP
#define PBSIM_CLIPPING_HPP

#include <cmath>
#include <span>

#include "pbsim/common.hpp"
#include "pbsim/signal.hpp"

namespace pbsim {

enum class ClipMode { none, hard, soft };

inline const char* to_string(ClipMode m) {
    switch (m) {
    case ClipMode::none: return "none";
    case ClipMode::hard: return "hard";
    case ClipMode::soft: return "soft";
    }
    return "?";
}

/// Clipping ratio gamma is relative to the window's mean absolute amplitude.
/// gamma = +inf is equivalent to mode none.
struct ClipPolicy {
    ClipMode mode = ClipMode::none;
    double gamma = kInf;
    double epsilon = 1e-8;
    bool renormalize = true;
    bool post_filter = false;  ///< band-limit the clipped signal to the occupied band

    bool active() const { return mode != ClipMode::none && std::isfinite(gamma); }

    static ClipPolicy off() { return {}; }
    static ClipPolicy hard(double gamma, bool renorm = true) { return {ClipMode::hard, gamma, 1e-8, renorm, false}; }
    static ClipPolicy soft(double gamma, double eps = 1e-8, bool renorm = true) { return {ClipMode::soft, gamma, eps, renorm, false}; }
};

inline void check_policy(const ClipPolicy& p) {
    if (!(p.gamma > 0.0)) throw Error(ErrorCode::invalid_config, "clipping ratio must be positive");
    if (!(p.epsilon > 0.0)) throw Error(ErrorCode::invalid_config, "soft clip epsilon must be positive");
}

inline double mean_abs(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += std::abs(v);
    return acc / static_cast<double>(x.size());
}

/// Sign-preserving clip at gamma * mean|x|.
inline rvec hard_clip(std::span<const double> x, double gamma) {
    const double thr = gamma * mean_abs(x);
    rvec out(x.begin(), x.end());
    if (!std::isfinite(thr)) return out;
    for (auto& v : out) {
        if (std::abs(v) > thr) v = std::copysign(thr, v);
    }
    return out;
}

/// x * (1 - ReLU(|x| - gamma*xbar) / (|x| + eps)); differentiable
/// surrogate of hard_clip with O(eps) deviation.
inline rvec soft_clip(std::span<const double> x, double gamma, double eps = 1e-8) {
    const double thr = gamma * mean_abs(x);
    rvec out(x.begin(), x.end());
    if (!std::isfinite(thr)) return out;
    for (auto& v : out) {
        const double a = std::abs(v);
        const double excess = a > thr ? a - thr : 0.0;
        v *= 1.0 - excess / (a + eps);
    }
    return out;
}

/// Rescales clipped to the mean power of original.
inline rvec renormalize(std::span<const double> clipped, std::span<const double> original) {
    double pc = 0.0, po = 0.0;
    for (double v : clipped) pc += v * v;
    for (double v : original) po += v * v;
    if (!(pc > 0.0)) throw Error(ErrorCode::degenerate_input, "clipped signal has zero power");
    // equal lengths in every caller, but keep the ratio of means
    const double scale = std::sqrt((po / static_cast<double>(original.size())) / (pc / static_cast<double>(clipped.size())));
    rvec out(clipped.begin(), clipped.end());
    for (auto& v : out) v *= scale;
    return out;
}

/// Applies the policy window by window (threshold and renormalization are
/// both computed per window).
inline PassbandSignal apply_clip(const PassbandSignal& s, const ClipPolicy& p, WindowMode window) {
    check_policy(p);
    if (!p.active()) return s;
    PassbandSignal out = s;
    for (const auto& [b, e] : window_bounds(s, window)) {
        std::span<const double> w(s.samples.data() + b, e - b);
        rvec c = p.mode == ClipMode::hard ? hard_clip(w, p.gamma) : soft_clip(w, p.gamma, p.epsilon);
        if (p.renormalize) {
            double pc = 0.0;
            for (double v : c) pc += v * v;
            if (pc > 0.0) c = renormalize(c, w);
        }
        std::copy(c.begin(), c.end(), out.samples.begin() + static_cast<std::ptrdiff_t>(b));
    }
    return out;
}

} // namespace pbsim

#endif // PBSIM_CLIPPING_HPP
