#include "dirsim/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace dirsim {

double nmse(const std::vector<CMat>& est, const std::vector<CMat>& truth,
            NmseMode mode, int k, int n, long m_dim) {
    if (est.size() != truth.size() || est.empty())
        throw ShapeMismatch("nmse: estimate/truth list sizes disagree");
    double sum = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (est[i].rows() != truth[i].rows() || est[i].cols() != truth[i].cols())
            throw ShapeMismatch("nmse: matrix shapes disagree");
        const double denom = truth[i].squaredNorm();
        if (!(denom > 0.0)) throw ZeroTruth("nmse: zero ground-truth matrix");
        sum += (est[i] - truth[i]).squaredNorm() / denom;
    }
    if (mode == NmseMode::kLiteral)
        return sum / (static_cast<double>(k) * n * static_cast<double>(m_dim));
    return sum / static_cast<double>(est.size());
}

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, int power_idx, int trial,
                          std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(power_idx),
                      static_cast<std::uint32_t>(trial), tag};
    return std::mt19937_64(seq);
}

struct TrialOut {
    bool ok = false;
    // [scheme][family] per-trial normalized error statistic
    std::array<std::array<double, 3>, 2> s{};
    double cond3 = 0.0;
    bool extended = false;
};

std::vector<CMat> flat_q(const std::vector<std::vector<CMat>>& q) {
    std::vector<CMat> flat;
    for (const auto& per_user : q)
        for (const auto& m : per_user) flat.push_back(m);
    return flat;
}

}  // namespace

SweepResult run_sweep(const SystemConfig& cfg, const std::vector<double>& powers_dbm,
                      const SweepOptions& opts) {
    cfg.validate();
    if (powers_dbm.empty()) throw InvalidRange("run_sweep: empty power grid");

    TrainingPlan plan = make_plan(cfg);
    SweepResult sweep;
    sweep.benchmark_slots = overhead_benchmark(cfg.m1, cfg.m2, cfg.k);
    sweep.equal_overhead = opts.equal_overhead;
    if (opts.equal_overhead) pad_plan(plan, sweep.benchmark_slots);
    sweep.proposed_slots = plan.total_slots();

    const long m_q = static_cast<long>(cfg.m1) * cfg.m2;
    const int workers = std::max(1, opts.workers);

    for (std::size_t pi = 0; pi < powers_dbm.size(); ++pi) {
        PowerPoint point;
        point.p_dbm = powers_dbm[pi];
        point.p_watts = std::pow(10.0, (point.p_dbm - 30.0) / 10.0);
        point.sigma2 = cfg.noise_watts() / point.p_watts;

        std::vector<TrialOut> outs(cfg.trials);
        auto work = [&](int first) {
            for (int t = first; t < cfg.trials; t += workers) {
                TrialOut& out = outs[t];
                try {
                    const ChannelRealization real = draw_realization(cfg, t);
                    const CascadedCsi csi = cascaded_csi(real, cfg.degeneracy_floor);

                    EstimatorOptions eopts;
                    eopts.noise_power = point.sigma2;
                    eopts.genie_cancel = opts.genie_cancel;
                    eopts.sv_tol = cfg.sv_tol;

                    auto rng_p = trial_rng(cfg.seed, static_cast<int>(pi), t, 0x50u);
                    const EstimationResult prop = run_proposed(real, plan, eopts, rng_p);
                    auto rng_b = trial_rng(cfg.seed, static_cast<int>(pi), t, 0xB0u);
                    const EstimationResult bench = run_benchmark(real, eopts, rng_b);

                    for (int s = 0; s < 2; ++s) {
                        const EstimationResult& res = s == kProposed ? prop : bench;
                        out.s[s][kFamilyR] = nmse(res.r_hat, csi.r, cfg.nmse_mode,
                                                  cfg.k, cfg.n, cfg.m1);
                        out.s[s][kFamilyRTilde] = nmse(res.r_tilde_hat, csi.r_tilde,
                                                       cfg.nmse_mode, cfg.k, cfg.n, cfg.m2);
                        out.s[s][kFamilyQ] = nmse(flat_q(res.q_hat), flat_q(csi.q),
                                                  cfg.nmse_mode, cfg.k, cfg.n, m_q);
                    }
                    out.cond3 = prop.condition[2];
                    out.extended = prop.rank_extended;
                    out.ok = true;
                } catch (const Error&) {
                    out.ok = false;  // failed trial: reported via the excluded count
                }
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
            for (auto& th : pool) th.join();
        }

        // Deterministic reduction in trial order.
        std::array<std::array<double, 3>, 2> sum{}, sumsq{};
        double cond_sum = 0.0;
        for (const TrialOut& out : outs) {
            if (!out.ok) {
                ++point.excluded;
                continue;
            }
            ++point.trials;
            for (int s = 0; s < 2; ++s)
                for (int f = 0; f < 3; ++f) {
                    sum[s][f] += out.s[s][f];
                    sumsq[s][f] += out.s[s][f] * out.s[s][f];
                }
            cond_sum += out.cond3;
            point.any_rank_extension = point.any_rank_extension || out.extended;
        }
        if (point.trials > 0) {
            const double tn = point.trials;
            for (int s = 0; s < 2; ++s)
                for (int f = 0; f < 3; ++f) {
                    const double mean = sum[s][f] / tn;
                    point.stats[s][f].nmse = mean;
                    const double var = std::max(0.0, sumsq[s][f] / tn - mean * mean);
                    point.stats[s][f].stderr_ = std::sqrt(var / tn);
                }
            point.mean_cond_phase3 = cond_sum / tn;
        }
        sweep.points.push_back(point);
    }
    return sweep;
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& os) {
    os << "scheme,family,P_dBm,sigma2,nmse,stderr,trials,excluded\n";
    char buf[128];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (int s = 0; s < 2; ++s)
        for (int f = 0; f < 3; ++f)
            for (const PowerPoint& p : sweep.points) {
                os << scheme_name(s) << ',' << family_name(f) << ',' << num(p.p_dbm)
                   << ',' << num(p.sigma2) << ',' << num(p.stats[s][f].nmse) << ','
                   << num(p.stats[s][f].stderr_) << ',' << p.trials << ','
                   << p.excluded << '\n';
            }
}

}  // namespace dirsim
