#ifndef PBSIM_DFT_HPP
#define PBSIM_DFT_HPP

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>

#include <fftw3.h>

#include "pbsim/common.hpp"

namespace pbsim {

/// Unitary K-point DFT (scale 1/sqrt(K) in both directions), backed by FFTW.
class DftPlan {
public:
    explicit DftPlan(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(static_cast<double>(n))) {
        if (n == 0) throw Error(ErrorCode::length_mismatch, "DFT size must be positive");
        // planner is not thread-safe; execution on new arrays is
        static std::mutex planner;
        std::lock_guard lock(planner);
        cvec a(n), b(n);
        const int k = static_cast<int>(n);
        fwd_ = fftw_plan_dft_1d(k, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        inv_ = fftw_plan_dft_1d(k, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !inv_) throw Error(ErrorCode::invalid_config, "FFTW planning failed");
    }
    ~DftPlan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    DftPlan(const DftPlan&) = delete;
    DftPlan& operator=(const DftPlan&) = delete;

    std::size_t size() const noexcept { return n_; }

    cvec forward(std::span<const cplx> x) const { return run(x, fwd_); }
    cvec inverse(std::span<const cplx> x) const { return run(x, inv_); }

private:
    static fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

    cvec run(std::span<const cplx> x, fftw_plan plan) const {
        if (x.size() != n_) throw Error(ErrorCode::length_mismatch, "DFT input length mismatch");
        cvec in(x.begin(), x.end()), out(n_);
        fftw_execute_dft(plan, as_fftw(in.data()), as_fftw(out.data()));
        for (auto& v : out) v *= scale_;
        return out;
    }

    std::size_t n_;
    double scale_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

/// Per-thread plan cache.
inline const DftPlan& dft_plan(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<DftPlan>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<DftPlan>(n)).first;
    return *it->second;
}

inline cvec unitary_dft(std::span<const cplx> x) { return dft_plan(x.size()).forward(x); }
inline cvec unitary_idft(std::span<const cplx> x) { return dft_plan(x.size()).inverse(x); }

} // namespace pbsim

#endif // PBSIM_DFT_HPP
