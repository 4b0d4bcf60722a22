#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pbsim/config_io.hpp"
#include "pbsim/sources.hpp"
#include "pbsim/symbol_io.hpp"

using namespace pbsim;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("pbsim_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::usage;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
}

} // namespace

TEST(GaussianSymbols, MomentsAndSeeding) {
    const CodedSymbolVector v = gen_gaussian_symbols(1000000, 2.0, 5);
    double m = 0, p = 0, k4 = 0;
    for (double x : v.data) m += x;
    m /= 1e6;
    for (double x : v.data) {
        p += (x - m) * (x - m);
        k4 += std::pow(x - m, 4);
    }
    p /= 1e6;
    k4 /= 1e6;
    EXPECT_NEAR(m, 0.0, 5 * std::sqrt(2.0 / 1e6));
    EXPECT_NEAR(p / 2.0, 1.0, 0.01);
    EXPECT_NEAR(k4 / (p * p), 3.0, 0.05);
    EXPECT_EQ(gen_gaussian_symbols(100, 1.0, 9).data, gen_gaussian_symbols(100, 1.0, 9).data);
    EXPECT_NE(gen_gaussian_symbols(100, 1.0, 9).data, gen_gaussian_symbols(100, 1.0, 10).data);
    EXPECT_THROW(gen_gaussian_symbols(1, 1.0, 1), Error);
}

TEST_F(TempDir, SymbolStreamRoundTrip) {
    CodedSymbolVector v = gen_gaussian_symbols(1000, 1.0, 3);
    v.source_length = 250;
    SymbolStreamMeta meta;
    meta.producer = "unit-test";
    meta.config_hash = "0123456789abcdef";
    const fs::path p = dir / "s.f32";
    write_symbols(p, v, meta);
    EXPECT_EQ(fs::file_size(p), 4000u);
    EXPECT_FALSE(fs::exists(dir / "s.f32.tmp"));

    const SymbolStream s = read_symbols(p, std::string("0123456789abcdef"));
    ASSERT_EQ(s.symbols.data.size(), 1000u);
    for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(s.symbols.data[i], static_cast<double>(static_cast<float>(v.data[i])));
    EXPECT_EQ(s.meta.element_count, 1000u);
    EXPECT_EQ(s.meta.source_length, 250u);
    EXPECT_DOUBLE_EQ(s.meta.bandwidth_ratio, 2.0);
    EXPECT_EQ(s.meta.producer, "unit-test");
    EXPECT_EQ(s.meta.packet_count, 1u);

    std::ifstream side(sidecar_path(p));
    const auto j = nlohmann::json::parse(side);
    EXPECT_EQ(j.at("format_version"), 1);
    EXPECT_EQ(j.at("element_type"), "float32le");
}

TEST_F(TempDir, PayloadIsLittleEndianFloat32) {
    CodedSymbolVector v;
    v.data = {1.0, -2.0};
    const fs::path p = dir / "le.f32";
    write_symbols(p, v, {});
    std::ifstream f(p, std::ios::binary);
    std::vector<unsigned char> b((std::istreambuf_iterator<char>(f)), {});
    const std::vector<unsigned char> expect{0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
    EXPECT_EQ(b, expect);
}

TEST_F(TempDir, DistinctErrorsForBadStreams) {
    const fs::path p = dir / "x.f32";
    CodedSymbolVector v = gen_gaussian_symbols(16, 1.0, 1);
    SymbolStreamMeta meta;
    meta.config_hash = "aaaaaaaaaaaaaaaa";
    write_symbols(p, v, meta);

    EXPECT_EQ(code_of([&] { read_symbols(dir / "missing.f32"); }), ErrorCode::sidecar_unreadable);
    EXPECT_EQ(code_of([&] { read_symbols(p, std::string("bbbbbbbbbbbbbbbb")); }), ErrorCode::config_hash_mismatch);

    write_text(dir / "trunc.f32", std::string(60, '\0'));
    fs::copy_file(sidecar_path(p), sidecar_path(dir / "trunc.f32"));
    EXPECT_EQ(code_of([&] { read_symbols(dir / "trunc.f32"); }), ErrorCode::payload_length);

    fs::copy_file(p, dir / "v2.f32");
    auto j = to_json(meta);
    j["element_count"] = 16;
    j["format_version"] = 2;
    write_text(sidecar_path(dir / "v2.f32"), j.dump());
    EXPECT_EQ(code_of([&] { read_symbols(dir / "v2.f32"); }), ErrorCode::version_mismatch);

    fs::copy_file(p, dir / "garbled.f32");
    write_text(sidecar_path(dir / "garbled.f32"), "{ not json");
    EXPECT_EQ(code_of([&] { read_symbols(dir / "garbled.f32"); }), ErrorCode::sidecar_unreadable);

    write_text(sidecar_path(dir / "nopayload.f32"), to_json(meta).dump());
    EXPECT_EQ(code_of([&] { read_symbols(dir / "nopayload.f32"); }), ErrorCode::io_failure);
}

TEST_F(TempDir, StreamSourceSplitsPackets) {
    CodedSymbolVector v = gen_gaussian_symbols(3 * 256, 1.0, 4);
    SymbolStreamMeta meta;
    meta.packet_count = 3;
    meta.source_length = 64;
    write_symbols(dir / "p.f32", v, meta);
    const SymbolStream s = read_symbols(dir / "p.f32");
    EXPECT_EQ(s.packet_length(), 256u);
    EXPECT_DOUBLE_EQ(s.meta.bandwidth_ratio, 2.0);
    const WaveformConfig cfg = resolved(WaveformConfig{});
    const PacketSource src = stream_source(cfg, s);
    const Packet p1 = src(1);
    ASSERT_EQ(p1.blocks.size(), 2u);
    std::vector<double> slice(s.symbols.data.begin() + 256, s.symbols.data.begin() + 512);
    const EncodedStream e = encode_stream(slice, cfg);
    EXPECT_EQ(p1.blocks[0].data, e.blocks[0].data);
    EXPECT_EQ(src(4).blocks[1].data, p1.blocks[1].data);
}

TEST(Config, ParseSerializeRoundTrip) {
    const WaveformConfig c = parse_config(R"(
        # comment line
        M = 64
        N = 16      # trailing comment
        allocation_mode = interleaved
        interleave_offset = 2
        precoding = dft
        rolloff = 0.35
        carrier = 20e6
        passband_fs = 90e6
        baud = 0.9e6
        snr = 31.6227766
    )");
    EXPECT_EQ(c.M, 64);
    EXPECT_EQ(c.N, 16);
    EXPECT_EQ(c.allocation_mode, AllocationMode::interleaved);
    EXPECT_EQ(c.precoding, Precoding::dft);
    EXPECT_DOUBLE_EQ(c.rolloff, 0.35);
    const WaveformConfig r = resolved(c);
    const WaveformConfig back = parse_config(serialize_config(r));
    EXPECT_EQ(serialize_config(back), serialize_config(r));
    EXPECT_EQ(back.allocation, r.allocation);
    EXPECT_EQ(config_hash(back), config_hash(r));
}

TEST(Config, HashTracksContent) {
    const WaveformConfig a = resolved(WaveformConfig{});
    EXPECT_EQ(config_hash(a).size(), 16u);
    EXPECT_EQ(config_hash(a), config_hash(WaveformConfig{}));
    WaveformConfig b = a;
    b.rolloff = 0.25;
    EXPECT_NE(config_hash(a), config_hash(b));
    WaveformConfig c = WaveformConfig{};
    c.allocation_seed = 2;
    EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_EQ(code_of([] { parse_config("colour = blue"); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([] { parse_config("M = 12x"); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([] { parse_config("just words"); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([] { parse_config("precoding = fft"); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([] { load_config("/nonexistent/pbsim.cfg"); }), ErrorCode::io_failure);
}

TEST(Config, ExplicitAllocationIsKept) {
    const WaveformConfig c = parse_config("M = 8\nN = 3\nallocation = 1, 4,6\ncp_len = 2\n");
    EXPECT_EQ(resolved(c).allocation, (std::vector<int>{1, 4, 6}));
    const WaveformConfig bad = parse_config("M = 8\nN = 2\nallocation = 1,9\ncp_len = 2\n");
    EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::allocation_out_of_range);
}

TEST(Config, Json) {
    const auto j = config_json(resolved(WaveformConfig{}));
    EXPECT_EQ(j.at("M"), 128);
    EXPECT_EQ(j.at("allocation").size(), 64u);
    EXPECT_EQ(j.at("precoding"), "none");
}
