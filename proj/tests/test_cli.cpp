#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PBSIM_CLI_PATH;
const std::string kCfg = PBSIM_DEFAULT_CFG;

struct CliResult {
    int status;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("pbsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    CliResult run(const std::string& args, const std::string& env = "") {
        const fs::path err = dir / "stderr.txt";
        const std::string cmd = env + " \"" + kCli + "\" " + args + " > /dev/null 2> \"" + err.string() + "\"";
        const int rc = std::system(cmd.c_str());
        return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(err)};
    }

    std::string common(const std::string& sub) { return "--config \"" + kCfg + "\" --out \"" + (dir / sub).string() + "\""; }

    fs::path dir;
};

} // namespace

TEST_F(Cli, ChainOnDefaultConfigReportsLoopbackEvm) {
    for (const char* mode : {"ofdma", "lfdma", "ifdma"}) {
        const CliResult r = run(std::string("chain ") + common(mode) + " --mode " + mode + " --source qam16 --blocks 4");
        ASSERT_EQ(r.status, 0) << r.err;
        const auto j = nlohmann::json::parse(slurp(dir / mode / "chain.json"));
        EXPECT_LE(j.at("evm_db").get<double>(), -40.0) << mode;
        EXPECT_NEAR(j.at("power").at("passband_over_baseband").get<double>(), 0.5, 0.02);
        EXPECT_NEAR(j.at("power").at("ofdm_time_domain").get<double>() / j.at("power").at("ofdm_time_domain_expected").get<double>(), 1.0,
                    0.15);
        EXPECT_EQ(j.at("seed"), 1);
        EXPECT_EQ(j.at("config").at("M"), 128);
    }
}

TEST_F(Cli, IdenticalSeedsGiveIdenticalCsv) {
    const std::string args = " --source qam16 --mode all --windows 3000 --seed 7";
    ASSERT_EQ(run("ccdf " + common("a") + args).status, 0);
    ASSERT_EQ(run("ccdf " + common("b") + args + " --jobs 3").status, 0);
    ASSERT_EQ(run("ccdf " + common("c") + " --source qam16 --mode all --windows 3000 --seed 8").status, 0);
    const std::string a = slurp(dir / "a" / "ccdf.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir / "b" / "ccdf.csv"));
    EXPECT_NE(a, slurp(dir / "c" / "ccdf.csv"));
}

TEST_F(Cli, RowsCarryConfigHashAndSummaryHasSnapshot) {
    ASSERT_EQ(run("ccdf " + common("h") + " --source gaussian --mode ofdma,ifdma --windows 2000 --window-mode packet").status, 0);
    const auto j = nlohmann::json::parse(slurp(dir / "h" / "ccdf.json"));
    EXPECT_EQ(j.at("window_mode"), "per_packet");
    EXPECT_EQ(j.at("passband_fs").get<double>(), 100e6);
    ASSERT_EQ(j.at("results").size(), 2u);
    EXPECT_TRUE(j.at("results")[0].at("gamma3_db").is_null());
    std::map<std::string, std::string> hash_of;
    for (const auto& r : j.at("results")) hash_of[r.at("mode")] = r.at("config_hash");
    EXPECT_NE(hash_of["ofdma"], hash_of["ifdma"]);

    std::istringstream csv(slurp(dir / "h" / "ccdf.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "mode,source,domain,gamma_db,prob,window_mode,seed,config_hash");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        const std::string mode = line.substr(0, line.find(','));
        EXPECT_EQ(line.substr(line.rfind(',') + 1), hash_of[mode]);
        ++rows;
    }
    EXPECT_GT(rows, 20u);
}

TEST_F(Cli, UsageErrorsAreMachineReadable) {
    struct Case {
        std::string args;
        std::string code;
    };
    const std::vector<Case> cases{
        {"ber " + common("u") + " --order 8", "usage"},
        {"clip-sweep " + common("u") + " --metric ber --source gaussian --windows 100", "usage"},
        {"ccdf " + common("u") + " --bogus-flag", "usage"},
        {"ccdf " + common("u") + " --mode tdma", "usage"},
        {"ccdf " + common("u") + " --domain baseband --clip-gamma 3", "usage"},
        {"ccdf " + common("u") + " --set colour=blue", "invalid_config"},
        {"ccdf " + common("u") + " --set passband_fs=40e6", "nyquist_violation"},
        {"ccdf --config /nonexistent.cfg", "io_failure"},
        {"", "usage"},
    };
    for (const auto& c : cases) {
        const CliResult r = run(c.args);
        EXPECT_NE(r.status, 0) << c.args;
        const auto j = nlohmann::json::parse(r.err, nullptr, false);
        ASSERT_FALSE(j.is_discarded()) << c.args << ": " << r.err;
        EXPECT_EQ(j.at("error"), c.code) << c.args;
        EXPECT_TRUE(j.contains("message"));
    }
}

TEST_F(Cli, SymbolFileIngestion) {
    const fs::path sym = dir / "s" / "enc.f32";
    ASSERT_EQ(run("gen-symbols " + common("s") + " --length 512 --packets 250 --seed 3 --output \"" + sym.string() + "\"").status, 0);
    const auto side = nlohmann::json::parse(slurp(sym.string() + ".json"));
    EXPECT_EQ(side.at("element_count"), 512 * 250);
    EXPECT_EQ(side.at("packet_count"), 250);
    EXPECT_NEAR(side.at("bandwidth_ratio").get<double>(), 1.0 / 12.0, 1e-12);
    EXPECT_EQ(fs::file_size(sym), 4u * 512 * 250);

    const CliResult r = run("ccdf " + common("f") + " --source file:" + sym.string() + " --windows 1000 --p 0.1");
    ASSERT_EQ(r.status, 0) << r.err;
    ASSERT_EQ(run("ccdf " + common("g") + " --source gaussian --reals 512 --seed 3 --windows 1000 --p 0.1").status, 0);
    // float32 payload vs double generator: same draws, PAPR agrees to quantization
    const auto a = nlohmann::json::parse(slurp(dir / "f" / "ccdf.json"));
    const auto b = nlohmann::json::parse(slurp(dir / "g" / "ccdf.json"));
    EXPECT_NEAR(a.at("results")[0].at("gamma3_db").get<double>(), b.at("results")[0].at("gamma3_db").get<double>(), 1e-4);

    const CliResult bad = run("ccdf " + common("x") + " --set rolloff=0.3 --source file:" + sym.string() + " --windows 10");
    EXPECT_NE(bad.status, 0);
    EXPECT_EQ(nlohmann::json::parse(bad.err).at("error"), "config_hash_mismatch");

    const CliResult missing = run("ccdf " + common("x") + " --source file:" + (dir / "none.f32").string() + " --windows 10");
    EXPECT_EQ(nlohmann::json::parse(missing.err).at("error"), "sidecar_unreadable");
}

TEST_F(Cli, FitKappaReadsCcdfOutput) {
    ASSERT_EQ(run("ccdf " + common("k") + " --source gaussian --windows 20000 --jobs 2").status, 0);
    const CliResult r = run("fit-kappa " + common("k") + " --curve \"" + (dir / "k" / "ccdf.csv").string() + "\"");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(dir / "k" / "fit-kappa.json"));
    EXPECT_TRUE(j.at("converged").get<bool>());
    EXPECT_GT(j.at("kappa1").get<double>(), 0.0);
    EXPECT_LT(j.at("rms_decades").get<double>(), 0.3);
    EXPECT_EQ(j.at("kappa2_init").get<double>(), 10.0);
    const std::string csv = slurp(dir / "k" / "fit-kappa.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "mode,kappa1,kappa2,M,rms_decades,points,iterations,converged,seed,config_hash");
}

TEST_F(Cli, ClipSweepAndBerTables) {
    ASSERT_EQ(run("clip-sweep " + common("c") + " --source qam16 --gammas inf,3 --windows 2000 --p 0.05").status, 0);
    std::istringstream csv(slurp(dir / "c" / "clip-sweep.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "gamma,gamma3_db,metric_name,metric_value,window_mode,seed,config_hash");
    std::getline(csv, line);
    EXPECT_EQ(line.substr(0, 4), "inf,");
    EXPECT_NE(line.find(",evm_db,"), std::string::npos);
    std::getline(csv, line);
    EXPECT_EQ(line.substr(0, 2), "3,");

    const CliResult b = run("ber " + common("b") + " --order 4 --eta-db 6,inf --max-bits 20000 --min-errors 10");
    ASSERT_EQ(b.status, 0) << b.err;
    const std::string ber = slurp(dir / "b" / "ber.csv");
    EXPECT_NE(ber.find("mode,order,gamma,eta_db"), std::string::npos);
    EXPECT_NE(ber.find(",inf,"), std::string::npos);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    const fs::path env_dir = dir / "env";
    const CliResult r = run("chain --config \"" + kCfg + "\" --source gaussian", "PBSIM_OUT_DIR=\"" + env_dir.string() + "\"");
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(fs::exists(env_dir / "chain.csv"));
    EXPECT_TRUE(fs::exists(env_dir / "chain.json"));
    EXPECT_FALSE(fs::exists(env_dir / "chain.csv.tmp"));
}
