#ifndef PBSIM_COMMON_HPP
#define PBSIM_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbsim {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using rvec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Machine-readable error categories. The CLI reports these verbatim.
enum class ErrorCode {
    invalid_config,
    degenerate_input,
    length_mismatch,
    allocation_out_of_range,
    nyquist_violation,
    insufficient_samples,
    no_convergence,
    version_mismatch,
    payload_length,
    sidecar_unreadable,
    io_failure,
    config_hash_mismatch,
    usage,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::allocation_out_of_range: return "allocation_out_of_range";
    case ErrorCode::nyquist_violation: return "nyquist_violation";
    case ErrorCode::insufficient_samples: return "insufficient_samples";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::payload_length: return "payload_length";
    case ErrorCode::sidecar_unreadable: return "sidecar_unreadable";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::config_hash_mismatch: return "config_hash_mismatch";
    case ErrorCode::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// splitmix64 finalizer; used to derive independent per-worker seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for work item (a, b) under a master seed. Independent of the
/// schedule that executes the item.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

inline double mean_power(const rvec& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

inline double mean_power(const cvec& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

} // namespace pbsim

#endif // PBSIM_COMMON_HPP
