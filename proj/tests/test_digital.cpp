#include <gtest/gtest.h>

#include <bitset>
#include <random>

#include "pbsim/digital.hpp"

using namespace pbsim;

TEST(Constellation, UnitPowerAndDistinctPoints) {
    for (int order : {4, 16}) {
        const Constellation c = make_constellation(order);
        ASSERT_EQ(c.points.size(), static_cast<std::size_t>(order));
        EXPECT_NEAR(mean_power(c.points), 1.0, 1e-12);
        for (std::size_t a = 0; a < c.points.size(); ++a)
            for (std::size_t b = a + 1; b < c.points.size(); ++b) EXPECT_GT(std::abs(c.points[a] - c.points[b]), 0.1);
    }
    EXPECT_THROW(make_constellation(8), Error);
}

TEST(Constellation, GrayNeighboursDifferInOneBit) {
    for (int order : {4, 16}) {
        const Constellation c = make_constellation(order);
        double dmin = kInf;
        for (std::size_t a = 0; a < c.points.size(); ++a)
            for (std::size_t b = a + 1; b < c.points.size(); ++b) dmin = std::min(dmin, std::abs(c.points[a] - c.points[b]));
        for (std::size_t a = 0; a < c.points.size(); ++a)
            for (std::size_t b = a + 1; b < c.points.size(); ++b)
                if (std::abs(std::abs(c.points[a] - c.points[b]) - dmin) < 1e-9) {
                    EXPECT_EQ(std::bitset<8>(a ^ b).count(), 1u) << order << ": " << a << " " << b;
                }
    }
}

TEST(Constellation, SixteenQamLayout) {
    const Constellation c = make_constellation(16);
    const double a = 1 / std::sqrt(10.0);
    EXPECT_NEAR(std::abs(c.points[0b0000] - cplx(3 * a, 3 * a)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(c.points[0b1010] - cplx(-3 * a, -3 * a)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(c.points[0b0111] - cplx(1 * a, -1 * a)), 0.0, 1e-12);
}

TEST(Mapping, RoundTripAndNoisyDecisions) {
    std::mt19937_64 g(1);
    for (int order : {4, 16}) {
        const Constellation c = make_constellation(order);
        std::vector<std::uint8_t> bits(4000);
        for (auto& b : bits) b = static_cast<std::uint8_t>(g() & 1u);
        const cvec s = qam_map(bits, c);
        EXPECT_EQ(qam_demap(s, c), bits);
        cvec n = s;
        std::normal_distribution<double> d(0.0, 0.01);
        for (auto& v : n) v += cplx(d(g), d(g));
        EXPECT_EQ(qam_demap(n, c), bits);
    }
    const std::vector<std::uint8_t> odd(3, 0);
    EXPECT_THROW(qam_map(odd, make_constellation(4)), Error);
}

TEST(AnalyticBer, ReferenceValues) {
    EXPECT_NEAR(qfunc(0.0), 0.5, 1e-15);
    EXPECT_NEAR(qfunc(1.0), 0.15865525393145707, 1e-14);
    // QPSK at Eb/N0 = 9.6 dB is the classic 1e-5 point
    EXPECT_NEAR(std::log10(ber_awgn(4, from_db(9.5879))), -5.0, 0.01);
    // Gray 16QAM nearest-neighbour form at high SNR
    const double e = from_db(16.0);
    EXPECT_NEAR(ber_awgn(16, e) / (0.75 * qfunc(std::sqrt(0.8 * e))), 1.0, 1e-3);
}

TEST(Wilson, IntervalCoversAndShrinks) {
    const auto [lo, hi] = wilson_interval(100, 100000);
    EXPECT_LT(lo, 1e-3);
    EXPECT_GT(hi, 1e-3);
    EXPECT_NEAR(lo, 8.22e-4, 2e-5);
    EXPECT_NEAR(hi, 1.216e-3, 2e-5);
    const auto [l0, h0] = wilson_interval(0, 1000000);
    EXPECT_EQ(l0, 0.0);
    EXPECT_GT(h0, 0.0);
    EXPECT_LT(h0, 5e-6);
}

TEST(QamSource, ScaledToChainPower) {
    WaveformConfig cfg = resolved(WaveformConfig{});
    cfg.power = 0.5;
    const Constellation c = make_constellation(16);
    const Packet p = qam_source(cfg, c, 8, 3)(0);
    ASSERT_EQ(p.blocks.size(), 8u);
    ASSERT_EQ(p.bits.size(), 8u * 64 * 4);
    cvec all = join_blocks(p.blocks, 0);
    EXPECT_NEAR(mean_power(all), 2 * cfg.power, 0.1);
    EXPECT_EQ(qam_source(cfg, c, 8, 3)(5).bits, qam_source(cfg, c, 8, 3)(5).bits);
    EXPECT_NE(qam_source(cfg, c, 8, 3)(5).bits, qam_source(cfg, c, 8, 3)(6).bits);
}

TEST(BerSim, NoiselessIsErrorFree) {
    const Constellation c = make_constellation(16);
    const WaveformConfig cfg = with_access_mode(WaveformConfig{}, AccessMode::ofdma);
    BerOptions o;
    o.max_bits = 20000;
    const std::vector<double> etas{kInf};
    const auto pts = ber_sim(c, cfg, etas, ClipPolicy::off(), o);
    EXPECT_EQ(pts[0].errors, 0u);
    EXPECT_GE(pts[0].bits, 20000u);
}

TEST(BerSim, AgreesWithAnalyticCurve) {
    for (int order : {4, 16}) {
        const Constellation c = make_constellation(order);
        const WaveformConfig cfg = with_access_mode(WaveformConfig{}, AccessMode::ofdma);
        BerOptions o;
        o.min_errors = 200;
        o.max_bits = 2'000'000;
        const double ebn0_db = order == 4 ? 4.0 : 8.0;
        const std::vector<double> etas{from_db(ebn0_db) * c.bits_per_symbol()};
        const auto pts = ber_sim(c, cfg, etas, ClipPolicy::off(), o);
        const double truth = ber_awgn(order, from_db(ebn0_db));
        const auto [lo, hi] = wilson_interval(pts[0].errors, pts[0].bits, 3.5);
        EXPECT_LE(lo, truth) << order;
        EXPECT_GE(hi, truth) << order;
        EXPECT_NEAR(pts[0].ebn0_db, ebn0_db, 1e-9);
    }
}

TEST(BerSim, ResultIndependentOfJobs) {
    const Constellation c = make_constellation(4);
    const WaveformConfig cfg = with_access_mode(WaveformConfig{}, AccessMode::lfdma);
    BerOptions o;
    o.min_errors = 20;
    o.max_bits = 200000;
    o.packets_per_round = 4;
    const std::vector<double> etas{from_db(4.0), from_db(7.0)};
    const auto a = ber_sim(c, cfg, etas, ClipPolicy::hard(3.0), o);
    o.jobs = 3;
    const auto b = ber_sim(c, cfg, etas, ClipPolicy::hard(3.0), o);
    for (std::size_t j = 0; j < etas.size(); ++j) {
        EXPECT_EQ(a[j].errors, b[j].errors);
        EXPECT_EQ(a[j].bits, b[j].bits);
    }
}

TEST(SnrAtBer, LogLinearInterpolation) {
    std::vector<BerPoint> curve(3);
    curve[0].eta_db = 10;
    curve[0].ber = 1e-3;
    curve[1].eta_db = 12;
    curve[1].ber = 1e-4;
    curve[2].eta_db = 14;
    curve[2].ber = 1e-6;
    EXPECT_NEAR(snr_at_ber(curve, 1e-5), 13.0, 1e-12);
    EXPECT_NEAR(snr_at_ber(curve, std::pow(10.0, -3.5)), 11.0, 1e-12);
    EXPECT_TRUE(std::isnan(snr_at_ber(curve, 1e-8)));
}
