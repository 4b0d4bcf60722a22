#include <gtest/gtest.h>

#include <random>

#include "pbsim/dft.hpp"

using namespace pbsim;

namespace {

// Direct evaluation of the unitary DFT sum; independent of the plan code.
cvec naive_dft(const cvec& x, bool inverse) {
    const std::size_t n = x.size();
    cvec out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t m = 0; m < n; ++m)
            acc += x[m] * std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(k * m) / static_cast<double>(n));
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

cvec random_vec(std::size_t n, std::mt19937_64& g) {
    std::normal_distribution<double> d;
    cvec v(n);
    for (auto& x : v) x = {d(g), d(g)};
    return v;
}

double norm2(const cvec& v) {
    double a = 0;
    for (auto& x : v) a += std::norm(x);
    return std::sqrt(a);
}

} // namespace

TEST(Dft, MatchesDirectSumForPowerOfTwoAndOtherSizes) {
    std::mt19937_64 g(3);
    for (std::size_t n : {1u, 2u, 4u, 8u, 12u, 64u, 128u, 30u}) {
        const cvec x = random_vec(n, g);
        const cvec f = unitary_dft(x), ref = naive_dft(x, false);
        const cvec fi = unitary_idft(x), refi = naive_dft(x, true);
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(std::abs(f[k] - ref[k]), 0.0, 1e-10) << "n=" << n;
            EXPECT_NEAR(std::abs(fi[k] - refi[k]), 0.0, 1e-10) << "n=" << n;
        }
    }
}

TEST(Dft, UnitaryNormPreservation) {
    std::mt19937_64 g(5);
    for (std::size_t n : {64u, 128u, 48u}) {
        for (int trial = 0; trial < 20; ++trial) {
            const cvec x = random_vec(n, g);
            EXPECT_NEAR(norm2(unitary_dft(x)) / norm2(x), 1.0, 1e-12);
            EXPECT_NEAR(norm2(unitary_idft(x)) / norm2(x), 1.0, 1e-12);
        }
    }
}

TEST(Dft, InverseRoundTrip) {
    std::mt19937_64 g(7);
    const cvec x = random_vec(128, g);
    const cvec y = unitary_idft(unitary_dft(x));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(std::abs(y[i] - x[i]), 0.0, 1e-12);
}

TEST(Dft, RejectsWrongLength) {
    const DftPlan p(8);
    cvec x(7);
    EXPECT_THROW(p.forward(x), Error);
}
