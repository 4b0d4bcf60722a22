#ifndef PBSIM_PAPR_HPP
#define PBSIM_PAPR_HPP

// PAPR measurement, empirical CCDF and percentile estimation, and the
// analytic tail model 1 - (1 - exp(-G/k1))^(k2*M) with its least-squares fit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "pbsim/common.hpp"
#include "pbsim/signal.hpp"

namespace pbsim {

/// max x^2 / mean x^2 over one window.
inline double papr(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorCode::degenerate_input, "empty PAPR window");
    double peak = 0.0, acc = 0.0;
    for (double v : x) {
        const double p = v * v;
        acc += p;
        peak = std::max(peak, p);
    }
    if (!(acc > 0.0)) throw Error(ErrorCode::degenerate_input, "all-zero PAPR window");
    return peak / (acc / static_cast<double>(x.size()));
}

/// Complex-sample variant, max |x|^2 / mean |x|^2.
inline double papr(std::span<const cplx> x) {
    if (x.empty()) throw Error(ErrorCode::degenerate_input, "empty PAPR window");
    double peak = 0.0, acc = 0.0;
    for (const auto& v : x) {
        const double p = std::norm(v);
        acc += p;
        peak = std::max(peak, p);
    }
    if (!(acc > 0.0)) throw Error(ErrorCode::degenerate_input, "all-zero PAPR window");
    return peak / (acc / static_cast<double>(x.size()));
}

struct PaprSampleSet {
    rvec values;  ///< linear PAPR per window
    WindowMode window = WindowMode::per_ofdm_symbol;

    std::size_t count() const { return values.size(); }

    void merge(const PaprSampleSet& other) { values.insert(values.end(), other.values.begin(), other.values.end()); }
};

inline PaprSampleSet collect_papr(const PassbandSignal& s, WindowMode mode) {
    PaprSampleSet out;
    out.window = mode;
    for (const auto& [b, e] : window_bounds(s, mode)) out.values.push_back(papr(std::span<const double>(s.samples.data() + b, e - b)));
    return out;
}

/// Peak power max x^2 in each window.
inline rvec window_peaks(const PassbandSignal& s, WindowMode mode) {
    rvec out;
    for (const auto& [b, e] : window_bounds(s, mode)) {
        double peak = 0.0;
        for (std::size_t i = b; i < e; ++i) peak = std::max(peak, s.samples[i] * s.samples[i]);
        out.push_back(peak);
    }
    return out;
}

struct CcdfPoint {
    double gamma_db;
    double prob;  ///< Pr(rho > Gamma)
};

struct CcdfCurve {
    std::vector<CcdfPoint> points;
    std::size_t count = 0;
    bool insufficient = false;  ///< fewer than 10/target_probability samples
};

/// 0.1 dB grid covering [min, max] of the samples.
inline rvec default_grid(const PaprSampleSet& s, double step_db = 0.1) {
    rvec grid;
    if (s.values.empty()) return grid;
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    const double a = std::floor(to_db(*lo) / step_db) * step_db;
    const double b = std::ceil(to_db(*hi) / step_db) * step_db;
    const auto steps = static_cast<std::size_t>(std::llround((b - a) / step_db));
    for (std::size_t i = 0; i <= steps; ++i) grid.push_back(a + static_cast<double>(i) * step_db);
    return grid;
}

inline CcdfCurve ccdf(const PaprSampleSet& s, std::span<const double> thresholds_db, double target_probability = 1e-3) {
    CcdfCurve c;
    c.count = s.count();
    c.insufficient = static_cast<double>(c.count) < 10.0 / target_probability;
    if (s.values.empty()) return c;
    rvec sorted = s.values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (double g : thresholds_db) {
        const double lin = from_db(g);
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), lin);
        c.points.push_back({g, static_cast<double>(above) / n});
    }
    return c;
}

inline CcdfCurve ccdf(const PaprSampleSet& s) {
    const rvec grid = default_grid(s);
    return ccdf(s, grid);
}

/// Empirical (1-p)-quantile of rho in dB, linear interpolation between
/// order statistics. Needs at least 100/p samples.
inline double gamma_percentile(const PaprSampleSet& s, double p = 1e-3) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_config, "percentile probability must lie in (0, 1)");
    const double need = 100.0 / p;
    if (static_cast<double>(s.count()) < need - 0.5)
        throw Error(ErrorCode::insufficient_samples,
                    "need " + std::to_string(static_cast<long long>(std::ceil(need))) + " PAPR samples, have " + std::to_string(s.count()));
    rvec v = s.values;
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * (1.0 - p);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double q = v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    return to_db(q);
}

struct CcdfModel {
    double kappa1 = 1.0;
    double kappa2 = 1.0;
    int M = 1;
};

/// log10 of the model tail probability, evaluated without cancellation.
inline double ccdf_model_log10(double gamma_db, const CcdfModel& m) {
    const double g = from_db(gamma_db);
    const double a = std::exp(-g / m.kappa1);
    const double prob = -std::expm1(m.kappa2 * m.M * std::log1p(-a));
    return std::log10(prob);
}

inline double ccdf_model(double gamma_db, const CcdfModel& m) {
    if (!(m.kappa1 > 0.0 && m.kappa2 > 0.0 && m.M > 0)) throw Error(ErrorCode::invalid_config, "invalid CCDF model");
    return std::pow(10.0, ccdf_model_log10(gamma_db, m));
}

struct KappaFit {
    CcdfModel model;
    double rms_decades = 0.0;
    std::size_t points = 0;
    int iterations = 0;
};

class FitError : public Error {
public:
    FitError(const std::string& what, KappaFit best) : Error(ErrorCode::no_convergence, what), best_(best) {}
    const KappaFit& best() const { return best_; }

private:
    KappaFit best_;
};

/// Least-squares fit of log10(model) to log10(empirical) over curve points
/// with probability in [p_lo, p_hi]. Levenberg-Marquardt on (ln k1, ln k2).
inline KappaFit fit_kappa(const CcdfCurve& curve, int M, double kappa2_init, double p_lo = 1e-3, double p_hi = 1e-1) {
    std::vector<CcdfPoint> pts;
    for (const auto& p : curve.points)
        if (p.prob >= p_lo && p.prob <= p_hi && p.prob > 0.0) pts.push_back(p);
    if (pts.size() < 3) throw Error(ErrorCode::insufficient_samples, "too few CCDF points in the fitting band");

    struct Residuals {
        using Scalar = double;
        using InputType = Eigen::VectorXd;
        using ValueType = Eigen::VectorXd;
        using JacobianType = Eigen::MatrixXd;
        enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
        const std::vector<CcdfPoint>* pts;
        int M;
        int inputs() const { return 2; }
        int values() const { return static_cast<int>(pts->size()); }
        int operator()(const Eigen::VectorXd& th, Eigen::VectorXd& r) const {
            const CcdfModel m{std::exp(th[0]), std::exp(th[1]), M};
            for (std::size_t i = 0; i < pts->size(); ++i)
                r[static_cast<Eigen::Index>(i)] = ccdf_model_log10((*pts)[i].gamma_db, m) - std::log10((*pts)[i].prob);
            return r.allFinite() ? 0 : -1;
        }
    };

    Residuals f{&pts, M};
    Eigen::VectorXd th(2);
    th << 0.0, std::log(kappa2_init);
    Eigen::VectorXd r(f.values());
    if (f(th, r) != 0) throw Error(ErrorCode::no_convergence, "model not finite at the initial guess");

    Eigen::NumericalDiff<Residuals, Eigen::Central> diff(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals, Eigen::Central>> lm(diff);
    lm.parameters.maxfev = 2000;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-14;
    const auto status = lm.minimize(th);
    // 1-4 are the tolerance tests; 6-8 mean the tolerances hit machine precision
    namespace lms = Eigen::LevenbergMarquardtSpace;
    const bool converged = status != lms::ImproperInputParameters && status != lms::TooManyFunctionEvaluation && status != lms::UserAsked;
    f(th, r);
    const double cost = r.squaredNorm();
    const int it = static_cast<int>(lm.iter);

    KappaFit fit;
    fit.model = {std::exp(th[0]), std::exp(th[1]), M};
    fit.rms_decades = std::sqrt(cost / static_cast<double>(pts.size()));
    fit.points = pts.size();
    fit.iterations = it;
    if (!converged || !std::isfinite(cost)) throw FitError("kappa fit did not converge", fit);
    return fit;
}

} // namespace pbsim

#endif // PBSIM_PAPR_HPP
