#include <doctest.h>

#include <random>

#include "dirsim/estimator.hpp"

using namespace dirsim;

namespace {

SystemConfig small_cfg(int n) {
    SystemConfig cfg;
    cfg.n = n;
    cfg.m1 = 4;
    cfg.m2 = 5;
    cfg.k = 3;
    return cfg;
}

double worst_rel_err(const EstimationResult& res, const CascadedCsi& csi) {
    double worst = 0.0;
    for (std::size_t k = 0; k < csi.r.size(); ++k) {
        worst = std::max(worst, rel_err(res.r_hat[k], csi.r[k]));
        worst = std::max(worst, rel_err(res.r_tilde_hat[k], csi.r_tilde[k]));
        for (std::size_t m = 0; m < csi.q[k].size(); ++m)
            worst = std::max(worst, rel_err(res.q_hat[k][m], csi.q[k][m]));
    }
    return worst;
}

}  // namespace

TEST_CASE("synthesize_rx superposes pilots and matches the noise moment") {
    const SystemConfig cfg = small_cfg(4);
    const ChannelRealization real = draw_realization(cfg, 1);
    std::mt19937_64 rng(5);

    // zero pilots, zero noise: silence
    const CVec silent = synthesize_rx(real, CVec::Ones(4), CVec::Ones(5),
                                      CVec::Zero(3), 0.0, rng);
    CHECK(silent.norm() == 0.0);

    // single active user reproduces that user's effective channel
    CVec pilots = CVec::Zero(3);
    pilots(1) = cxd(0.0, 2.0);
    const CVec th1 = CVec::Ones(4), th2 = CVec::Ones(5);
    const CVec y = synthesize_rx(real, th1, th2, pilots, 0.0, rng);
    const CVec expect = cxd(0.0, 2.0) * effective_channel(real, th1, th2, 1);
    CHECK((y - expect).norm() <= 1e-14 * expect.norm());

    // noise-only slots: per-entry power close to the configured variance
    const double s2 = 0.01;
    double sum = 0.0;
    long count = 0;
    for (int t = 0; t < 2000; ++t) {
        const CVec v = synthesize_rx(real, th1, th2, CVec::Zero(3), s2, rng);
        sum += v.squaredNorm();
        count += v.size();
    }
    CHECK(sum / count == doctest::Approx(s2).epsilon(0.05));

    CHECK_THROWS_AS(synthesize_rx(real, th1, th2, CVec::Zero(2), 0.0, rng),
                    DimensionMismatch);
}

TEST_CASE("phase I recovers the reference single-reflection channel exactly") {
    const SystemConfig cfg = small_cfg(4);
    const ChannelRealization real = draw_realization(cfg, 2);
    const CascadedCsi csi = cascaded_csi(real);
    const CMat theta1 = dft_training(cfg.m1, cfg.m1);
    CVec ref_pilot = CVec::Zero(cfg.k);
    ref_pilot(0) = 1.0;
    std::mt19937_64 rng(6);
    CMat y_stack(cfg.n, cfg.m1);
    for (int j = 0; j < cfg.m1; ++j)
        y_stack.col(j) = synthesize_rx(real, theta1.col(j), CVec::Zero(cfg.m2),
                                       ref_pilot, 0.0, rng);
    const CMat r_hat = phase1_estimate(y_stack, theta1);
    CHECK(rel_err(r_hat, csi.r[0]) <= 1e-12);
}

TEST_CASE("phase3_cancel removes exactly the single-reflection part") {
    const SystemConfig cfg = small_cfg(4);
    const ChannelRealization real = draw_realization(cfg, 3);
    const CascadedCsi csi = cascaded_csi(real);
    const CVec th1 = CVec::Ones(cfg.m1), th2 = CVec::Ones(cfg.m2);
    std::mt19937_64 rng(7);
    CVec ref_pilot = CVec::Zero(cfg.k);
    ref_pilot(0) = 1.0;
    const CVec y = synthesize_rx(real, th1, th2, ref_pilot, 0.0, rng);
    const CVec resid = phase3_cancel(y, csi.r[0], csi.r_tilde[0], th1, th2);
    // what remains is the double-reflection contribution
    CVec expect = CVec::Zero(cfg.n);
    for (int m = 0; m < cfg.m1; ++m) expect += csi.q[0][m] * th2 * th1(m);
    CHECK((resid - expect).norm() <= 1e-12 * expect.norm());

    // cancelling a pure single-reflection signal leaves nothing
    const CVec y1 = synthesize_rx(real, th1, CVec::Zero(cfg.m2), ref_pilot, 0.0, rng);
    const CVec r1 = phase3_cancel(y1, csi.r[0], CMat::Zero(cfg.n, cfg.m2), th1,
                                  CVec::Zero(cfg.m2));
    CHECK(r1.norm() <= 1e-12 * y1.norm());
}

TEST_CASE("noiseless pipeline is exact in the sequential regime") {
    const SystemConfig cfg = small_cfg(6);  // N >= M2
    const TrainingPlan plan = make_plan(cfg);
    REQUIRE(plan.case3 == SolveCase::kSequential);
    EstimatorOptions opts;
    for (int t = 0; t < 5; ++t) {
        const ChannelRealization real = draw_realization(cfg, t);
        const CascadedCsi csi = cascaded_csi(real);
        std::mt19937_64 rng(t);
        const EstimationResult res = run_proposed(real, plan, opts, rng);
        CHECK(worst_rel_err(res, csi) <= 1e-10);
        CHECK(res.total_slots() == overhead_proposed(cfg.n, cfg.m1, cfg.m2, cfg.k));
        CHECK_FALSE(res.rank_extended);
    }
}

TEST_CASE("noiseless pipeline is exact in the joint regime") {
    const SystemConfig cfg = small_cfg(2);  // N < M2 everywhere
    const TrainingPlan plan = make_plan(cfg);
    REQUIRE(plan.case3 == SolveCase::kJoint);
    REQUIRE(plan.case4 == SolveCase::kJoint);
    EstimatorOptions opts;
    for (int t = 0; t < 5; ++t) {
        const ChannelRealization real = draw_realization(cfg, t);
        const CascadedCsi csi = cascaded_csi(real);
        std::mt19937_64 rng(t);
        const EstimationResult res = run_proposed(real, plan, opts, rng);
        CHECK(worst_rel_err(res, csi) <= 1e-9);
        CHECK(res.total_slots() == overhead_proposed(cfg.n, cfg.m1, cfg.m2, cfg.k));
    }
}

TEST_CASE("forced joint solve agrees with the sequential solve noiselessly") {
    const SystemConfig cfg = small_cfg(6);
    const TrainingPlan seq_plan = make_plan(cfg);
    const TrainingPlan joint_plan = make_plan(cfg, /*force_joint_phase3=*/true);
    REQUIRE(joint_plan.case3 == SolveCase::kJoint);
    EstimatorOptions opts;
    const ChannelRealization real = draw_realization(cfg, 11);
    std::mt19937_64 rng_a(1), rng_b(1);
    const EstimationResult seq = run_proposed(real, seq_plan, opts, rng_a);
    const EstimationResult jnt = run_proposed(real, joint_plan, opts, rng_b);
    for (int m = 0; m < cfg.m1; ++m)
        CHECK((seq.a_hat[m] - jnt.a_hat[m]).norm() <=
              1e-9 * (seq.a_hat[m].norm() + 1.0));
}

TEST_CASE("closed-form cross-check agrees with the pseudo-inverse path") {
    const SystemConfig cfg = small_cfg(2);
    const TrainingPlan plan = make_plan(cfg);
    EstimatorOptions opts;
    opts.cross_check = true;
    opts.noise_power = 1e-6;  // a noisy system keeps the solves non-trivial
    const ChannelRealization real = draw_realization(cfg, 13);
    std::mt19937_64 rng(13);
    const EstimationResult res = run_proposed(real, plan, opts, rng);
    CHECK(res.max_oracle_rel_err <= 1e-10);
}

TEST_CASE("single-user run skips the multi-user phases") {
    SystemConfig cfg = small_cfg(6);
    cfg.k = 1;
    const TrainingPlan plan = make_plan(cfg);
    const ChannelRealization real = draw_realization(cfg, 17);
    const CascadedCsi csi = cascaded_csi(real);
    EstimatorOptions opts;
    std::mt19937_64 rng(17);
    const EstimationResult res = run_proposed(real, plan, opts, rng);
    CHECK(res.slots_used[3] == 0);
    CHECK(res.slots_used[4] == 0);
    CHECK(worst_rel_err(res, csi) <= 1e-10);
    CHECK((res.b_hat[0] - CVec::Ones(cfg.m1)).norm() == 0.0);
}

TEST_CASE("per-antenna benchmark is exact and uses the full slot budget") {
    const SystemConfig cfg = small_cfg(4);
    EstimatorOptions opts;
    for (int t = 0; t < 3; ++t) {
        const ChannelRealization real = draw_realization(cfg, t);
        const CascadedCsi csi = cascaded_csi(real);
        std::mt19937_64 rng(t);
        const EstimationResult res = run_benchmark(real, opts, rng);
        CHECK(worst_rel_err(res, csi) <= 1e-10);
        CHECK(res.total_slots() == overhead_benchmark(cfg.m1, cfg.m2, cfg.k));
    }
}

TEST_CASE("padded plan averages repeats and stays exact without noise") {
    const SystemConfig cfg = small_cfg(2);
    TrainingPlan plan = make_plan(cfg);
    pad_plan(plan, overhead_benchmark(cfg.m1, cfg.m2, cfg.k));
    EstimatorOptions opts;
    const ChannelRealization real = draw_realization(cfg, 19);
    const CascadedCsi csi = cascaded_csi(real);
    std::mt19937_64 rng(19);
    const EstimationResult res = run_proposed(real, plan, opts, rng);
    CHECK(worst_rel_err(res, csi) <= 1e-9);
    CHECK(res.total_slots() == overhead_benchmark(cfg.m1, cfg.m2, cfg.k));
}

TEST_CASE("averaging repeated slots reduces the noise level") {
    const SystemConfig cfg = small_cfg(2);
    TrainingPlan base = make_plan(cfg);
    TrainingPlan padded = make_plan(cfg);
    pad_plan(padded, 4 * base.total_slots());
    EstimatorOptions opts;
    opts.noise_power = 1e-8;
    double err_base = 0.0, err_padded = 0.0;
    for (int t = 0; t < 40; ++t) {
        const ChannelRealization real = draw_realization(cfg, t);
        const CascadedCsi csi = cascaded_csi(real);
        std::mt19937_64 rng_a(100 + t), rng_b(200 + t);
        err_base += worst_rel_err(run_proposed(real, base, opts, rng_a), csi);
        err_padded += worst_rel_err(run_proposed(real, padded, opts, rng_b), csi);
    }
    CHECK(err_padded < err_base);
}

TEST_CASE("sequential solver rejects slots from the wrong pattern") {
    std::vector<Phase3Slot> slots(1);
    slots[0].theta1 = CVec::Ones(3);  // not one-hot
    slots[0].theta2 = CVec::Ones(4);
    std::vector<CVec> ybar{CVec::Zero(4)};
    const CMat rt = CMat::Identity(4, 4);
    CHECK_THROWS_AS(
        phase3_estimate_a(ybar, slots, rt, SolveCase::kSequential), CaseMismatch);
}
