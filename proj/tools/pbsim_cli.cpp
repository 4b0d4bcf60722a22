// pbsim-cli: runs the passband PAPR / BER experiments and writes CSV + JSON.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pbsim/config_io.hpp"
#include "pbsim/digital.hpp"
#include "pbsim/sweep.hpp"
#include "pbsim/symbol_io.hpp"

using namespace pbsim;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::size_t windows = 100000;
    std::string window_mode = "per_ofdm_symbol";
    std::string name;
};

struct ClipArgs {
    double gamma = kInf;
    std::string mode = "hard";
    bool post_filter = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Configuration file (key = value)");
    app->add_option("--set", c.sets, "Override a config key, key=value (repeatable)");
    app->add_option("--out", c.out, "Output directory (default $PBSIM_OUT_DIR or .)");
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--windows", c.windows, "PAPR windows to collect")->check(CLI::PositiveNumber);
    app->add_option("--window-mode", c.window_mode, "per_ofdm_symbol | per_packet");
    app->add_option("--name", c.name, "Output file stem (default: subcommand name)");
}

void add_clip(CLI::App* app, ClipArgs& c) {
    app->add_option("--clip-gamma", c.gamma, "Clipping ratio (inf: no clipping)");
    app->add_option("--clip-mode", c.mode, "hard | soft")->check(CLI::IsMember({"hard", "soft"}));
    app->add_flag("--post-filter", c.post_filter, "Band-limit the clipped passband signal");
}

ClipPolicy make_clip(const ClipArgs& a) {
    if (!(a.gamma > 0.0)) throw Error(ErrorCode::usage, "--clip-gamma must be positive");
    if (a.post_filter && !std::isfinite(a.gamma)) throw Error(ErrorCode::usage, "--post-filter needs a finite --clip-gamma");
    ClipPolicy p{a.mode == "soft" ? ClipMode::soft : ClipMode::hard, a.gamma, 1e-8, true, a.post_filter};
    if (!std::isfinite(a.gamma)) p = ClipPolicy::off();
    return p;
}

WaveformConfig base_config(const Common& c) {
    WaveformConfig cfg = c.config.empty() ? WaveformConfig{} : load_config(c.config);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::usage, "--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }
    return resolved(cfg);
}

fs::path out_dir(const Common& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("PBSIM_OUT_DIR"); env && *env) return env;
    return ".";
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(num(v)); }

rvec parse_list(const std::string& spec, const std::string& what) {
    rvec out;
    auto parse_one = [&](const std::string& s) {
        const std::string t = detail::trim(s);
        if (t == "inf") return kInf;
        try {
            std::size_t pos = 0;
            const double v = std::stod(t, &pos);
            if (pos != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw Error(ErrorCode::usage, "bad number '" + t + "' in " + what);
        }
    };
    // a:step:b ranges, or comma lists
    if (spec.find(':') != std::string::npos) {
        std::stringstream ss(spec);
        std::string a, st, b;
        std::getline(ss, a, ':');
        std::getline(ss, st, ':');
        std::getline(ss, b);
        const double lo = parse_one(a), step = parse_one(st), hi = parse_one(b);
        if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::usage, "bad range '" + spec + "' in " + what);
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!detail::trim(item).empty()) out.push_back(parse_one(item));
    }
    if (out.empty()) throw Error(ErrorCode::usage, "empty list for " + what);
    return out;
}

std::vector<AccessMode> parse_modes(const std::string& spec) {
    std::vector<AccessMode> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item == "all") {
            out = {AccessMode::ofdma, AccessMode::lfdma, AccessMode::ifdma};
            continue;
        }
        if (!item.empty()) out.push_back(parse_access_mode(item));
    }
    if (out.empty()) throw Error(ErrorCode::usage, "no access mode given");
    return out;
}

struct SourceArgs {
    std::string source = "gaussian";
    std::size_t reals = 512;
    std::size_t blocks = 4;
};

void add_source(CLI::App* app, SourceArgs& s) {
    app->add_option("--source", s.source, "gaussian | qam4 | qam16 | file:<path>");
    app->add_option("--reals", s.reals, "Coded reals per packet for the gaussian source")->check(CLI::Range(2, 1 << 26));
    app->add_option("--blocks", s.blocks, "OFDM symbols per packet for qam sources")->check(CLI::PositiveNumber);
}

bool is_qam(const SourceArgs& s) { return s.source == "qam4" || s.source == "qam16"; }

/// Stream files carry the hash of the base config they were made for.
PacketSource make_source(const SourceArgs& s, const WaveformConfig& base, const WaveformConfig& cfg, std::uint64_t seed) {
    if (s.source == "gaussian") return gaussian_source(cfg, s.reals, seed);
    if (s.source == "qam4") return qam_source(cfg, make_constellation(4), s.blocks, seed);
    if (s.source == "qam16") return qam_source(cfg, make_constellation(16), s.blocks, seed);
    if (s.source.rfind("file:", 0) == 0) return stream_source(cfg, read_symbols(s.source.substr(5), config_hash(base)));
    throw Error(ErrorCode::usage, "unknown source '" + s.source + "'");
}

ojson run_header(const std::string& experiment, const Common& c, const WaveformConfig& cfg) {
    ojson j;
    j["experiment"] = experiment;
    j["config"] = config_json(cfg);
    j["config_hash"] = config_hash(cfg);
    j["seed"] = c.seed;
    j["window_mode"] = to_string(parse_window_mode(c.window_mode));
    j["passband_fs"] = cfg.passband_fs;
    return j;
}

void write_outputs(const Common& c, const std::string& cmd, const std::string& csv, const ojson& summary) {
    const fs::path dir = out_dir(c);
    const std::string stem = c.name.empty() ? cmd : c.name;
    write_file_atomic(dir / (stem + ".csv"), csv);
    write_file_atomic(dir / (stem + ".json"), summary.dump(2) + "\n");
    std::cout << (dir / (stem + ".csv")).string() << "\n" << (dir / (stem + ".json")).string() << "\n";
}

// ---- ccdf ----

struct CcdfArgs {
    std::string modes = "ofdma";
    std::string domain = "passband";
    double p = 1e-3;
};

int cmd_ccdf(const Common& c, const SourceArgs& s, const CcdfArgs& a, const ClipArgs& ca) {
    const WaveformConfig base = base_config(c);
    const WindowMode wm = parse_window_mode(c.window_mode);
    const ClipPolicy clip = make_clip(ca);
    if (a.domain != "passband" && a.domain != "baseband") throw Error(ErrorCode::usage, "--domain must be passband or baseband");
    if (a.domain == "baseband" && (clip.active() || wm == WindowMode::per_packet))
        throw Error(ErrorCode::usage, "baseband domain supports neither clipping nor per-packet windows");

    std::string csv = "mode,source,domain,gamma_db,prob,window_mode,seed,config_hash\n";
    ojson summary = run_header("ccdf", c, base);
    summary["source"] = s.source;
    summary["domain"] = a.domain;
    summary["clip"] = {{"mode", to_string(clip.mode)}, {"gamma", jnum(clip.gamma)}, {"post_filter", clip.post_filter}};
    summary["percentile_p"] = a.p;
    ojson results = ojson::array();
    for (AccessMode m : parse_modes(a.modes)) {
        const WaveformConfig cfg = with_access_mode(base, m);
        const std::string hash = config_hash(cfg);
        const PacketSource src = make_source(s, base, cfg, c.seed);
        const PaprSampleSet set = a.domain == "baseband" ? collect_baseband_papr(cfg, src, c.windows, c.jobs)
                                                         : collect_source_papr(cfg, src, RunOptions{c.windows, wm, c.jobs}, clip);
        const CcdfCurve curve = ccdf(set, default_grid(set), a.p);
        for (const auto& pt : curve.points)
            csv += std::string(to_string(m)) + "," + s.source + "," + a.domain + "," + num(pt.gamma_db) + "," + num(pt.prob) + "," +
                   to_string(wm) + "," + std::to_string(c.seed) + "," + hash + "\n";
        ojson r;
        r["mode"] = to_string(m);
        r["config_hash"] = hash;
        r["windows"] = set.count();
        r["insufficient"] = curve.insufficient;
        try {
            r["gamma3_db"] = gamma_percentile(set, a.p);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::insufficient_samples) throw;
            r["gamma3_db"] = nullptr;
            r["warning"] = e.what();
        }
        results.push_back(r);
    }
    summary["results"] = results;
    write_outputs(c, "ccdf", csv, summary);
    return 0;
}

// ---- fit-kappa ----

struct FitArgs {
    std::string curve;
    std::string mode;
    double kappa2_init = 0.0;
    double p_lo = 1e-3, p_hi = 1e-1;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(detail::trim(f));
    return out;
}

int cmd_fit(const Common& c, const FitArgs& a) {
    const WaveformConfig base = base_config(c);
    std::ifstream in(a.curve);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open curve " + a.curve);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::io_failure, "empty curve file " + a.curve);
    const auto head = split_csv(line);
    auto col = [&](const std::string& n) -> std::ptrdiff_t {
        const auto it = std::find(head.begin(), head.end(), n);
        return it == head.end() ? -1 : it - head.begin();
    };
    const auto cg = col("gamma_db"), cp = col("prob"), cm = col("mode");
    if (cg < 0 || cp < 0) throw Error(ErrorCode::io_failure, "curve file needs gamma_db and prob columns");
    CcdfCurve curve;
    std::string mode = a.mode;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != head.size()) throw Error(ErrorCode::io_failure, "ragged row in " + a.curve);
        if (cm >= 0) {
            if (mode.empty()) mode = f[static_cast<std::size_t>(cm)];
            if (f[static_cast<std::size_t>(cm)] != mode) continue;
        }
        curve.points.push_back({std::stod(f[static_cast<std::size_t>(cg)]), std::stod(f[static_cast<std::size_t>(cp)])});
    }
    const double k2 = a.kappa2_init > 0.0 ? a.kappa2_init : static_cast<double>(base.oversample_factor);

    ojson summary = run_header("fit-kappa", c, base);
    summary["curve"] = a.curve;
    summary["mode"] = mode;
    summary["M"] = base.M;
    summary["kappa2_init"] = k2;
    summary["band"] = {a.p_lo, a.p_hi};
    KappaFit fit;
    bool converged = true;
    try {
        fit = fit_kappa(curve, base.M, k2, a.p_lo, a.p_hi);
    } catch (const FitError& e) {
        fit = e.best();
        converged = false;
    }
    const std::string hash = config_hash(base);
    std::string csv = "mode,kappa1,kappa2,M,rms_decades,points,iterations,converged,seed,config_hash\n";
    csv += mode + "," + num(fit.model.kappa1) + "," + num(fit.model.kappa2) + "," + std::to_string(base.M) + "," + num(fit.rms_decades) + "," +
           std::to_string(fit.points) + "," + std::to_string(fit.iterations) + "," + (converged ? "1" : "0") + "," + std::to_string(c.seed) +
           "," + hash + "\n";
    summary["kappa1"] = fit.model.kappa1;
    summary["kappa2"] = fit.model.kappa2;
    summary["rms_decades"] = fit.rms_decades;
    summary["points"] = fit.points;
    summary["converged"] = converged;
    write_outputs(c, "fit-kappa", csv, summary);
    if (!converged) throw Error(ErrorCode::no_convergence, "kappa fit did not converge; best iterate written");
    return 0;
}

// ---- ber ----

struct BerArgs {
    int order = 16;
    std::string etas = "0:2:20";
    std::string mode = "ofdma";
    std::uint64_t min_errors = 100;
    std::uint64_t max_bits = 100'000'000;
    std::size_t blocks = 4;
    double target = 1e-5;
};

int cmd_ber(const Common& c, const BerArgs& a, const ClipArgs& ca) {
    const WaveformConfig base = base_config(c);
    const WindowMode wm = parse_window_mode(c.window_mode);
    if (a.order != 4 && a.order != 16) throw Error(ErrorCode::usage, "--order must be 4 or 16");
    const Constellation con = make_constellation(a.order);
    const ClipPolicy clip = make_clip(ca);
    const AccessMode m = parse_access_mode(a.mode);
    const WaveformConfig cfg = with_access_mode(base, m);
    rvec etas = parse_list(a.etas, "--eta-db");
    for (auto& e : etas) e = std::isinf(e) ? kInf : from_db(e);
    BerOptions o;
    o.min_errors = a.min_errors;
    o.max_bits = a.max_bits;
    o.blocks_per_packet = a.blocks;
    o.window = wm;
    o.seed = c.seed;
    o.jobs = c.jobs;
    const auto pts = ber_sim(con, cfg, etas, clip, o);
    const std::string hash = config_hash(cfg);
    std::string csv = "mode,order,gamma,eta_db,ebn0_db,bits,errors,ber,ci_lo,ci_hi,ber_analytic,window_mode,seed,config_hash\n";
    for (const auto& p : pts)
        csv += std::string(to_string(m)) + "," + std::to_string(a.order) + "," + num(clip.gamma) + "," + num(p.eta_db) + "," + num(p.ebn0_db) +
               "," + std::to_string(p.bits) + "," + std::to_string(p.errors) + "," + num(p.ber) + "," + num(p.ci_lo) + "," + num(p.ci_hi) +
               "," + num(ber_awgn(a.order, from_db(p.ebn0_db))) + "," + to_string(wm) + "," + std::to_string(c.seed) + "," + hash + "\n";
    ojson summary = run_header("ber", c, cfg);
    summary["mode"] = to_string(m);
    summary["order"] = a.order;
    summary["clip"] = {{"mode", to_string(clip.mode)}, {"gamma", jnum(clip.gamma)}, {"post_filter", clip.post_filter}};
    summary["target_ber"] = a.target;
    summary["eta_db_at_target"] = jnum(snr_at_ber(pts, a.target));
    write_outputs(c, "ber", csv, summary);
    return 0;
}

// ---- clip-sweep ----

struct SweepArgs {
    std::string gammas = "inf,3,4,5,6,8";
    std::string mode = "ofdma";
    std::string metric = "evm";
    double eta_db = 10.0;
    double p = 1e-3;
};

SweepMetric ber_metric(const WaveformConfig& cfg, const Constellation& con, double eta, std::uint64_t seed) {
    return {"ber",
            [cfg, con, eta, seed](const Packet& p, const PassbandSignal& s, const Transceiver& t, std::size_t i) {
                PassbandSignal rx = s;
                std::mt19937_64 gen(derive_seed(seed ^ 0x6e6f697365ULL, 0, i));
                add_awgn(std::span<double>(rx.samples), calibrate_noise(eta, cfg), gen);
                cvec sym = join_blocks(t.receive(rx, p.blocks.size()), 0);
                const double amp = std::sqrt(2.0 * cfg.power);
                for (auto& v : sym) v /= amp;
                const auto bits = qam_demap(sym, con);
                double err = 0;
                for (std::size_t b = 0; b < bits.size(); ++b) err += bits[b] != p.bits[b];
                return std::array<double, 2>{err, static_cast<double>(bits.size())};
            },
            [](double err, double n) { return err / n; }};
}

int cmd_sweep(const Common& c, const SourceArgs& s, const SweepArgs& a, const ClipArgs& ca) {
    const WaveformConfig base = base_config(c);
    const WindowMode wm = parse_window_mode(c.window_mode);
    const AccessMode m = parse_access_mode(a.mode);
    const WaveformConfig cfg = with_access_mode(base, m);
    const rvec gammas = parse_list(a.gammas, "--gammas");
    SweepMetric metric;
    if (a.metric == "evm") {
        metric = evm_metric();
    } else if (a.metric == "ber") {
        if (!is_qam(s)) throw Error(ErrorCode::usage, "--metric ber needs a qam4 or qam16 source");
        metric = ber_metric(cfg, make_constellation(s.source == "qam4" ? 4 : 16), from_db(a.eta_db), c.seed);
    } else {
        throw Error(ErrorCode::usage, "--metric must be evm or ber");
    }
    ClipPolicy proto{ca.mode == "soft" ? ClipMode::soft : ClipMode::hard, kInf, 1e-8, true, ca.post_filter};
    const auto rows = clip_sweep(cfg, make_source(s, base, cfg, c.seed), gammas, RunOptions{c.windows, wm, c.jobs}, metric, proto, a.p);
    const std::string hash = config_hash(cfg);
    std::string csv = "gamma,gamma3_db,metric_name,metric_value,window_mode,seed,config_hash\n";
    for (const auto& r : rows)
        csv += num(r.gamma) + "," + num(r.gamma3_db) + "," + r.metric_name + "," + num(r.metric_value) + "," + to_string(wm) + "," +
               std::to_string(c.seed) + "," + hash + "\n";
    ojson summary = run_header("clip-sweep", c, cfg);
    summary["source"] = s.source;
    summary["mode"] = to_string(m);
    summary["clip_mode"] = ca.mode;
    summary["post_filter"] = ca.post_filter;
    summary["percentile_p"] = a.p;
    if (a.metric == "ber") summary["eta_db"] = a.eta_db;
    write_outputs(c, "clip-sweep", csv, summary);
    return 0;
}

// ---- chain ----

struct ChainArgs {
    std::string mode = "ofdma";
    double eta_db = kInf;
};

int cmd_chain(const Common& c, const SourceArgs& s, const ChainArgs& a, const ClipArgs& ca) {
    const WaveformConfig base = base_config(c);
    const WindowMode wm = parse_window_mode(c.window_mode);
    const AccessMode m = parse_access_mode(a.mode);
    const WaveformConfig cfg = with_access_mode(base, m);
    const ClipPolicy clip = make_clip(ca);
    const Transceiver t(cfg);
    const Packet p = make_source(s, base, cfg, c.seed)(0);
    const cvec bb = t.baseband(p.blocks);
    PassbandSignal tx = t.transmit(p.blocks, clip, wm);
    PassbandSignal rx = tx;
    if (std::isfinite(a.eta_db)) {
        std::mt19937_64 gen(derive_seed(c.seed, 0x636861696eULL));
        rx = awgn_channel(tx, calibrate_noise(from_db(a.eta_db), cfg), gen);
    }
    const auto out = t.receive(rx, p.blocks.size());
    const std::string hash = config_hash(cfg);

    cvec sym = join_blocks(p.blocks, 0);
    double bb_power = 0.0;
    for (const auto& b : p.blocks) bb_power += mean_power(ofdm_modulate(map_subcarriers(cfg.precoding == Precoding::dft ? dft_precode(b) : b, cfg)));
    bb_power /= static_cast<double>(p.blocks.size());
    const cvec shaped = pulse_shape(bb, t.filter());
    // interior of the shaped signal, away from the filter transients
    const std::size_t skip = t.filter().taps.size();
    double shaped_power = 0.0, pass_power = 0.0;
    std::size_t cnt = 0;
    PassbandSignal clean = t.transmit(p.blocks);
    for (std::size_t i = skip; i + skip < shaped.size(); ++i, ++cnt) {
        shaped_power += std::norm(shaped[i]);
        pass_power += clean.samples[i] * clean.samples[i];
    }
    shaped_power /= static_cast<double>(std::max<std::size_t>(cnt, 1));
    pass_power /= static_cast<double>(std::max<std::size_t>(cnt, 1));

    std::string csv = "window,papr_db,peak_power,mean_power,window_mode,seed,config_hash\n";
    std::size_t w = 0;
    for (const auto& [b, e] : window_bounds(tx, wm)) {
        std::span<const double> v(tx.samples.data() + b, e - b);
        double pk = 0, acc = 0;
        for (double x : v) {
            pk = std::max(pk, x * x);
            acc += x * x;
        }
        csv += std::to_string(w++) + "," + num(to_db(papr(v))) + "," + num(pk) + "," + num(acc / static_cast<double>(v.size())) + "," +
               to_string(wm) + "," + std::to_string(c.seed) + "," + hash + "\n";
    }
    ojson summary = run_header("chain", c, cfg);
    summary["source"] = s.source;
    summary["mode"] = to_string(m);
    summary["blocks"] = p.blocks.size();
    summary["eta_db"] = jnum(a.eta_db);
    summary["clip"] = {{"mode", to_string(clip.mode)}, {"gamma", jnum(clip.gamma)}, {"post_filter", clip.post_filter}};
    summary["evm_db"] = evm_db(p.blocks, out);
    summary["power"] = {{"real_symbol", cfg.power},
                        {"complex_symbol", mean_power(sym)},
                        {"ofdm_time_domain", bb_power},
                        {"ofdm_time_domain_expected", 2.0 * cfg.N / cfg.M * cfg.power},
                        {"shaped_baseband", shaped_power},
                        {"passband", pass_power},
                        {"passband_over_baseband", pass_power / shaped_power}};
    summary["filter"] = {{"taps", t.filter().taps.size()}, {"sps", t.filter().sps}, {"group_delay", t.filter().group_delay()}};
    write_outputs(c, "chain", csv, summary);
    return 0;
}

// ---- gen-symbols ----

struct GenArgs {
    std::size_t length = 512;
    std::size_t packets = 1;
    double power = 1.0;
    std::size_t source_length = 3072;
    std::string output;
};

int cmd_gen(const Common& c, const GenArgs& a) {
    const WaveformConfig base = base_config(c);
    CodedSymbolVector all;
    for (std::size_t i = 0; i < a.packets; ++i) {
        // same per-packet seeds as the built-in gaussian source
        const auto v = gen_gaussian_symbols(a.length, a.power, derive_seed(c.seed, i));
        all.data.insert(all.data.end(), v.data.begin(), v.data.end());
    }
    all.source_length = a.source_length;
    SymbolStreamMeta meta;
    meta.power = a.power;
    meta.producer = "pbsim-cli gen-symbols seed=" + std::to_string(c.seed);
    meta.config_hash = config_hash(base);
    meta.packet_count = a.packets;
    meta.pad_length = a.length % 2;
    const fs::path path = a.output.empty() ? out_dir(c) / "symbols.f32" : fs::path(a.output);
    write_symbols(path, all, meta);
    std::cout << path.string() << "\n" << sidecar_path(path).string() << "\n";
    return 0;
}

int emit_error(const std::string& code, const std::string& msg, int exit_code) {
    ojson j;
    j["error"] = code;
    j["message"] = msg;
    std::cerr << j.dump() << std::endl;
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passband OFDMA/SC-FDMA PAPR and BER experiments"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common common;
    SourceArgs src;
    ClipArgs clip;

    CcdfArgs ccdf_a;
    auto* ccdf_cmd = app.add_subcommand("ccdf", "PAPR CCDF and the 99.9th percentile");
    add_common(ccdf_cmd, common);
    add_source(ccdf_cmd, src);
    add_clip(ccdf_cmd, clip);
    ccdf_cmd->add_option("--mode", ccdf_a.modes, "ofdma | lfdma | ifdma, comma list or all");
    ccdf_cmd->add_option("--domain", ccdf_a.domain, "passband | baseband (discrete complex samples)");
    ccdf_cmd->add_option("--p", ccdf_a.p, "Tail probability of the reported percentile")->check(CLI::Range(1e-9, 0.5));

    FitArgs fit_a;
    auto* fit_cmd = app.add_subcommand("fit-kappa", "Fit (kappa1, kappa2) to a CCDF curve file");
    add_common(fit_cmd, common);
    fit_cmd->add_option("--curve", fit_a.curve, "CSV written by ccdf")->required();
    fit_cmd->add_option("--mode", fit_a.mode, "Rows to use when the file holds several modes");
    fit_cmd->add_option("--kappa2-init", fit_a.kappa2_init, "Initial kappa2 (default: oversample_factor)");
    fit_cmd->add_option("--p-lo", fit_a.p_lo, "Lower edge of the fitting band");
    fit_cmd->add_option("--p-hi", fit_a.p_hi, "Upper edge of the fitting band");

    BerArgs ber_a;
    auto* ber_cmd = app.add_subcommand("ber", "Uncoded BER through the passband chain");
    add_common(ber_cmd, common);
    add_clip(ber_cmd, clip);
    ber_cmd->add_option("--order", ber_a.order, "4 or 16");
    ber_cmd->add_option("--eta-db", ber_a.etas, "SNR list in dB: a:step:b or comma list");
    ber_cmd->add_option("--mode", ber_a.mode, "ofdma | lfdma | ifdma");
    ber_cmd->add_option("--min-errors", ber_a.min_errors, "Stop a point after this many bit errors");
    ber_cmd->add_option("--max-bits", ber_a.max_bits, "Stop a point after this many bits");
    ber_cmd->add_option("--blocks", ber_a.blocks, "OFDM symbols per packet")->check(CLI::PositiveNumber);
    ber_cmd->add_option("--target", ber_a.target, "BER at which the SNR is reported");

    SweepArgs sweep_a;
    auto* sweep_cmd = app.add_subcommand("clip-sweep", "Percentile PAPR and EVM/BER versus clipping ratio");
    add_common(sweep_cmd, common);
    add_source(sweep_cmd, src);
    sweep_cmd->add_option("--gammas", sweep_a.gammas, "Clipping ratios: comma list or a:step:b, inf allowed");
    sweep_cmd->add_option("--mode", sweep_a.mode, "ofdma | lfdma | ifdma");
    sweep_cmd->add_option("--metric", sweep_a.metric, "evm | ber");
    sweep_cmd->add_option("--eta-db", sweep_a.eta_db, "SNR for the ber metric");
    sweep_cmd->add_option("--clip-mode", clip.mode, "hard | soft")->check(CLI::IsMember({"hard", "soft"}));
    sweep_cmd->add_flag("--post-filter", clip.post_filter, "Band-limit the clipped passband signal");
    sweep_cmd->add_option("--p", sweep_a.p, "Tail probability of the reported percentile")->check(CLI::Range(1e-9, 0.5));

    ChainArgs chain_a;
    auto* chain_cmd = app.add_subcommand("chain", "Loopback diagnostics for one packet");
    add_common(chain_cmd, common);
    add_source(chain_cmd, src);
    add_clip(chain_cmd, clip);
    chain_cmd->add_option("--mode", chain_a.mode, "ofdma | lfdma | ifdma");
    chain_cmd->add_option("--eta-db", chain_a.eta_db, "Channel SNR in dB (default: noiseless)");

    GenArgs gen_a;
    auto* gen_cmd = app.add_subcommand("gen-symbols", "Write a Gaussian symbol stream file");
    add_common(gen_cmd, common);
    gen_cmd->add_option("--length", gen_a.length, "Coded reals per packet")->check(CLI::Range(2, 1 << 28));
    gen_cmd->add_option("--packets", gen_a.packets, "Packets in the stream")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--power", gen_a.power, "Symbol variance")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--source-length", gen_a.source_length, "Source length recorded in the sidecar");
    gen_cmd->add_option("--output", gen_a.output, "Payload path (default <out>/symbols.f32)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error("usage", e.what(), 2);
    }

    try {
        if (*ccdf_cmd) return cmd_ccdf(common, src, ccdf_a, clip);
        if (*fit_cmd) return cmd_fit(common, fit_a);
        if (*ber_cmd) return cmd_ber(common, ber_a, clip);
        if (*sweep_cmd) return cmd_sweep(common, src, sweep_a, clip);
        if (*chain_cmd) return cmd_chain(common, src, chain_a, clip);
        if (*gen_cmd) return cmd_gen(common, gen_a);
    } catch (const Error& e) {
        return emit_error(to_string(e.code()), e.what(), e.code() == ErrorCode::usage ? 2 : 1);
    } catch (const std::exception& e) {
        return emit_error("internal", e.what(), 1);
    }
    return emit_error("usage", "no subcommand", 2);
}
