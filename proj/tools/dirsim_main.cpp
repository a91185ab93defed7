#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dirsim/config_io.hpp"
#include "dirsim/estimator.hpp"
#include "dirsim/evaluation.hpp"
#include "dirsim/plot.hpp"
#include "dirsim/training.hpp"

namespace fs = std::filesystem;
using namespace dirsim;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int workers = 0;  // 0: machine parallelism
    bool equal_overhead = false;
    bool genie_cancel = false;
    std::string nmse_mode;
};

struct IntRange {
    long lo = 0, hi = -1;
};

IntRange parse_range(const std::string& text) {
    IntRange r;
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            r.lo = r.hi = std::stol(text);
        } else {
            r.lo = std::stol(text.substr(0, colon));
            r.hi = std::stol(text.substr(colon + 1));
        }
    } catch (const std::exception&) {
        throw InvalidRange("range must be <lo>:<hi>, got: " + text);
    }
    if (r.hi < r.lo) throw InvalidRange("empty range: " + text);
    return r;
}

std::vector<double> parse_powers(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw InvalidRange("empty power list");
    return out;
}

SystemConfig resolve_config(const GlobalArgs& g) {
    SystemConfig cfg = g.config_path.empty() ? SystemConfig{} : load_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.trials) cfg.trials = *g.trials;
    if (!g.nmse_mode.empty()) cfg.nmse_mode = parse_nmse_mode(g.nmse_mode);
    cfg.validate();
    return cfg;
}

int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

class Manifest {
  public:
    Manifest(const fs::path& out_dir, const std::string& command, const SystemConfig& cfg)
        : out_dir_(out_dir), start_(std::chrono::steady_clock::now()) {
        j_["command"] = command;
        j_["tool_version"] = kVersion;
        j_["config"] = nlohmann::json::parse(config_to_json(cfg));
    }

    std::ofstream open(const std::string& name) {
        fs::create_directories(out_dir_);
        outputs_.push_back(name);
        std::ofstream f(out_dir_ / name, std::ios::binary);
        if (!f) throw Error("cannot write output file: " + (out_dir_ / name).string());
        return f;
    }

    void finish(int exit_status) {
        using std::chrono::duration_cast;
        using std::chrono::milliseconds;
        for (const auto& name : outputs_)
            if (!fs::exists(out_dir_ / name))
                throw Error("manifest output missing: " + name);
        j_["outputs"] = outputs_;
        j_["wall_ms"] =
            duration_cast<milliseconds>(std::chrono::steady_clock::now() - start_).count();
        j_["exit_status"] = exit_status;
        fs::create_directories(out_dir_);
        std::ofstream f(out_dir_ / "manifest.json", std::ios::binary);
        f << j_.dump(2) << '\n';
    }

  private:
    fs::path out_dir_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json j_;
    std::vector<std::string> outputs_;
};

int cmd_overhead(const GlobalArgs& g, const std::string& n_range_s,
                 const std::string& k_range_s) {
    SystemConfig cfg = resolve_config(g);
    const IntRange nr = parse_range(n_range_s);
    const IntRange kr = k_range_s.empty() ? IntRange{cfg.k, cfg.k} : parse_range(k_range_s);
    if (nr.lo < 1 || kr.lo < 1) throw InvalidRange("N and K must be >= 1");

    Manifest manifest(g.out_dir, "overhead", cfg);
    {
        auto f = manifest.open("overhead.csv");
        f << "N,K,proposed,benchmark\n";
        for (long n = nr.lo; n <= nr.hi; ++n)
            for (long k = kr.lo; k <= kr.hi; ++k)
                f << n << ',' << k << ',' << overhead_proposed(n, cfg.m1, cfg.m2, k)
                  << ',' << overhead_benchmark(cfg.m1, cfg.m2, k) << '\n';
    }
    {
        PlotSpec spec;
        spec.title = "Training overhead vs BS antennas (K=" + std::to_string(kr.lo) + ")";
        spec.xlabel = "N";
        spec.ylabel = "pilot slots";
        PlotSeries prop{"proposed", {}, {}}, bench{"benchmark", {}, {}};
        for (long n = nr.lo; n <= nr.hi; ++n) {
            prop.x.push_back(n);
            prop.y.push_back(overhead_proposed(n, cfg.m1, cfg.m2, kr.lo));
            bench.x.push_back(n);
            bench.y.push_back(overhead_benchmark(cfg.m1, cfg.m2, kr.lo));
        }
        spec.series = {prop, bench};
        auto f = manifest.open("overhead_vs_n.svg");
        write_svg_plot(spec, f);
    }
    if (kr.hi > kr.lo) {
        PlotSpec spec;
        spec.title = "Training overhead vs users (N=" + std::to_string(cfg.n) + ")";
        spec.xlabel = "K";
        spec.ylabel = "pilot slots";
        PlotSeries prop{"proposed", {}, {}}, bench{"benchmark", {}, {}};
        for (long k = kr.lo; k <= kr.hi; ++k) {
            prop.x.push_back(k);
            prop.y.push_back(overhead_proposed(cfg.n, cfg.m1, cfg.m2, k));
            bench.x.push_back(k);
            bench.y.push_back(overhead_benchmark(cfg.m1, cfg.m2, k));
        }
        spec.series = {prop, bench};
        auto f = manifest.open("overhead_vs_k.svg");
        write_svg_plot(spec, f);
    }
    manifest.finish(0);
    return 0;
}

int cmd_mse_sweep(const GlobalArgs& g, const std::string& powers_s) {
    SystemConfig cfg = resolve_config(g);
    const std::vector<double> powers = parse_powers(powers_s);

    Manifest manifest(g.out_dir, "mse-sweep", cfg);
    SweepOptions sopts;
    sopts.genie_cancel = g.genie_cancel;
    sopts.workers = effective_workers(g.workers);

    std::optional<SweepResult> free_sweep, equal_sweep;
    if (!g.equal_overhead) {
        sopts.equal_overhead = false;
        free_sweep = run_sweep(cfg, powers, sopts);
        auto f = manifest.open("mse_free.csv");
        write_sweep_csv(*free_sweep, f);
    }
    sopts.equal_overhead = true;
    equal_sweep = run_sweep(cfg, powers, sopts);
    {
        auto f = manifest.open("mse_equal.csv");
        write_sweep_csv(*equal_sweep, f);
    }
    {
        TrainingPlan plan = make_plan(cfg);
        auto f = manifest.open("plan.txt");
        serialize_plan(plan, f);
    }
    for (int fam = 0; fam < 3; ++fam) {
        PlotSpec spec;
        spec.title = std::string("NMSE of ") + family_name(fam) + " vs transmit power"
                     " (equal overhead)";
        spec.xlabel = "P [dBm]";
        spec.ylabel = "NMSE";
        spec.log_y = true;
        for (int s = 0; s < 2; ++s) {
            PlotSeries series{scheme_name(s), {}, {}};
            for (const auto& p : equal_sweep->points) {
                series.x.push_back(p.p_dbm);
                series.y.push_back(p.stats[s][fam].nmse);
            }
            spec.series.push_back(std::move(series));
        }
        auto f = manifest.open(std::string("nmse_") + family_name(fam) + ".svg");
        write_svg_plot(spec, f);
    }
    manifest.finish(0);
    return 0;
}

struct CheckReport {
    bool all_pass = true;
    void line(const std::string& name, bool pass, double margin, double limit) {
        all_pass = all_pass && pass;
        std::printf("[%s] %-48s margin=%.3g limit=%.3g\n", pass ? "PASS" : "FAIL",
                    name.c_str(), margin, limit);
    }
};

double exactness_margin(const EstimationResult& res, const CascadedCsi& csi) {
    double worst = 0.0;
    for (std::size_t k = 0; k < csi.r.size(); ++k) {
        worst = std::max(worst, rel_err(res.r_hat[k], csi.r[k]));
        worst = std::max(worst, rel_err(res.r_tilde_hat[k], csi.r_tilde[k]));
        for (std::size_t m = 0; m < csi.q[k].size(); ++m)
            worst = std::max(worst, rel_err(res.q_hat[k][m], csi.q[k][m]));
    }
    return worst;
}

int cmd_validate(const GlobalArgs& g) {
    SystemConfig cfg = resolve_config(g);
    CheckReport rep;

    // Golden overhead values.
    {
        const bool pass = overhead_proposed(20, 20, 20, 1) == 60 &&
                          overhead_proposed(8, 20, 20, 4) == 106 &&
                          overhead_benchmark(20, 20, 4) == 1760;
        rep.line("overhead golden values", pass, pass ? 0 : 1, 0);
    }
    {
        bool mono = true, plateau = true;
        long prev = overhead_proposed(1, 20, 20, 4);
        for (long n = 2; n <= 64; ++n) {
            const long cur = overhead_proposed(n, 20, 20, 4);
            mono = mono && cur <= prev;
            if (n >= 20) plateau = plateau && cur == 2 * 20 + 20 + 2 * (4 - 1);
            prev = cur;
        }
        rep.line("overhead monotone in N with plateau", mono && plateau,
                 (mono && plateau) ? 0 : 1, 0);
    }

    // Formulation equivalence at the configured geometry.
    {
        std::mt19937_64 rng(cfg.seed ^ 0xF0F0F0F0ull);
        std::uniform_real_distribution<double> amp(0.0, 1.0), phase(0.0, 2 * M_PI);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const ChannelRealization real = draw_realization(cfg, 100000 + t);
            const CascadedCsi csi = cascaded_csi(real, cfg.degeneracy_floor);
            CVec th1(cfg.m1), th2(cfg.m2);
            for (int m = 0; m < cfg.m1; ++m) th1(m) = std::polar(amp(rng), phase(rng));
            for (int m = 0; m < cfg.m2; ++m) th2(m) = std::polar(amp(rng), phase(rng));
            const int k = t % cfg.k;
            const CVec h1 = effective_channel(real, th1, th2, k);
            const CVec h2 = effective_channel_cascaded(csi, th1, th2, k);
            const CVec h4 = effective_channel_scaled_user(csi, th1, th2, k);
            const double scale = h1.norm();
            worst = std::max(worst, (h2 - h1).norm() / scale);
            worst = std::max(worst, (h4 - h1).norm() / scale);
            if (k == 0) {
                const CVec h3 = effective_channel_scaled_ref(csi, th1, th2);
                worst = std::max(worst, (h3 - h1).norm() / scale);
            }
        }
        rep.line("formulation equivalence (100 tuples)", worst <= 1e-12, worst, 1e-12);
    }

    // Noiseless exactness, oracle equivalence, benchmark exactness on two
    // desk-scale scenarios covering both case splits.
    double worst_exact = 0.0, worst_oracle = 0.0, worst_bench = 0.0;
    bool slots_ok = true;
    for (int scen = 0; scen < 2; ++scen) {
        SystemConfig small = cfg;
        small.m1 = 4;
        small.m2 = 5;
        small.k = 3;
        small.n = scen == 0 ? 6 : 2;
        small.trials = 5;
        const TrainingPlan plan = make_plan(small);
        slots_ok = slots_ok &&
                   plan.total_slots() == overhead_proposed(small.n, small.m1, small.m2, small.k);
        EstimatorOptions opts;
        opts.noise_power = 0.0;
        opts.cross_check = true;
        opts.sv_tol = small.sv_tol;
        for (int t = 0; t < small.trials; ++t) {
            const ChannelRealization real = draw_realization(small, t);
            const CascadedCsi csi = cascaded_csi(real, small.degeneracy_floor);
            std::mt19937_64 rng(7 + t);
            const EstimationResult res = run_proposed(real, plan, opts, rng);
            worst_exact = std::max(worst_exact, exactness_margin(res, csi));
            worst_oracle = std::max(worst_oracle, res.max_oracle_rel_err);
            const EstimationResult bench = run_benchmark(real, opts, rng);
            worst_bench = std::max(worst_bench, exactness_margin(bench, csi));
            slots_ok = slots_ok && bench.total_slots() ==
                                       overhead_benchmark(small.m1, small.m2, small.k);
        }
    }
    rep.line("noiseless end-to-end exactness", worst_exact <= 1e-9, worst_exact, 1e-9);
    rep.line("LS oracle equivalence", worst_oracle <= 1e-10, worst_oracle, 1e-10);
    rep.line("benchmark noiseless exactness", worst_bench <= 1e-9, worst_bench, 1e-9);
    rep.line("plan slot counts match overhead formulas", slots_ok, slots_ok ? 0 : 1, 0);

    return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double-IRS uplink channel estimation simulator"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "JSON scenario file");
    app.add_option("--seed", g.seed, "RNG seed override");
    app.add_option("--trials", g.trials, "Monte Carlo trials override");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--workers", g.workers, "worker threads (0 = machine parallelism)");
    app.add_flag("--equal-overhead", g.equal_overhead,
                 "match the proposed scheme's total training overhead to the benchmark");
    app.add_option("--nmse-mode", g.nmse_mode, "literal | per-matrix");
    app.add_flag("--genie-cancel", g.genie_cancel,
                 "cancel phase-III pilots with the true channels (debug)");

    std::string n_range = "4:32", k_range, powers = "20,25,30,35,40,45,50";
    auto* sub_overhead = app.add_subcommand("overhead", "training-overhead tables");
    sub_overhead->add_option("--n-range", n_range, "BS antenna range lo:hi");
    sub_overhead->add_option("--k-range", k_range, "user-count range lo:hi");
    auto* sub_sweep = app.add_subcommand("mse-sweep", "NMSE vs transmit power sweep");
    sub_sweep->add_option("--powers", powers, "comma-separated transmit powers [dBm]");
    auto* sub_validate = app.add_subcommand("validate", "run the self-check suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sub_overhead->parsed()) return cmd_overhead(g, n_range, k_range);
        if (sub_sweep->parsed()) return cmd_mse_sweep(g, powers);
        if (sub_validate->parsed()) return cmd_validate(g);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
