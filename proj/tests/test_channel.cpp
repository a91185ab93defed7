#include <doctest.h>

#include <random>

#include "dirsim/channel.hpp"

using namespace dirsim;

TEST_CASE("default geometry link distances") {
    const LinkDistances d = link_distances(SystemConfig{});
    CHECK(d.user_irs1 == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(d.irs2_bs == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(d.irs1_irs2 == doctest::Approx(49.0).epsilon(1e-14));
    CHECK(d.irs1_bs == doctest::Approx(49.52019789944301).epsilon(1e-14));
    CHECK(d.user_irs2 == doctest::Approx(49.52019789944301).epsilon(1e-14));
}

TEST_CASE("path loss model") {
    CHECK(path_loss(1.0, 2.2, 1e-3) == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(path_loss(1.5, 2.2, 1e-3) ==
          doctest::Approx(4.0982573843632343e-4).epsilon(1e-13));
    CHECK(path_loss(49.0, 3.0, 1e-3) ==
          doctest::Approx(8.499859752314087e-9).epsilon(1e-13));
    CHECK_THROWS_AS(path_loss(0.0, 2.2, 1e-3), NonPositiveDistance);
}

TEST_CASE("default geometry link gains") {
    const LinkGains g = link_gains(SystemConfig{});
    CHECK(g.u == doctest::Approx(4.0982573843632343e-4).epsilon(1e-13));
    CHECK(g.g2 == doctest::Approx(4.0982573843632343e-4).epsilon(1e-13));
    CHECK(g.d == doctest::Approx(8.499859752314087e-9).epsilon(1e-13));
    CHECK(g.g1 == doctest::Approx(8.234796764091675e-9).epsilon(1e-13));
    CHECK(g.u_tilde == doctest::Approx(8.234796764091675e-9).epsilon(1e-13));
}

TEST_CASE("co-located nodes are rejected") {
    SystemConfig cfg;
    cfg.user_pos = cfg.irs1_pos;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("power accounting") {
    SystemConfig cfg;
    cfg.tx_dbm = 30.0;
    cfg.noise_dbm = -60.0;
    CHECK(cfg.tx_watts() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cfg.noise_watts() == doctest::Approx(1e-9).epsilon(1e-14));
    CHECK(cfg.normalized_noise() == doctest::Approx(1e-9).epsilon(1e-14));
    // +10 dB transmit power scales the normalized noise down by 10x
    CHECK(cfg.normalized_noise_at(40.0) == doctest::Approx(1e-10).epsilon(1e-12));
}

TEST_CASE("realization draws are deterministic in (seed, trial)") {
    SystemConfig cfg;
    cfg.n = 4;
    cfg.m1 = 5;
    cfg.m2 = 6;
    cfg.k = 2;
    const ChannelRealization a = draw_realization(cfg, 3);
    const ChannelRealization b = draw_realization(cfg, 3);
    CHECK((a.g1 - b.g1).norm() == 0.0);
    CHECK((a.d - b.d).norm() == 0.0);
    CHECK((a.u[1] - b.u[1]).norm() == 0.0);

    const ChannelRealization c = draw_realization(cfg, 4);
    CHECK((a.g1 - c.g1).norm() > 0.0);

    cfg.seed = 2;
    const ChannelRealization e = draw_realization(cfg, 3);
    CHECK((a.g1 - e.g1).norm() > 0.0);
}

TEST_CASE("per-entry variance matches the link gain") {
    SystemConfig cfg;
    cfg.n = 4;
    cfg.m1 = 8;
    cfg.m2 = 8;
    cfg.k = 1;
    const LinkGains gains = link_gains(cfg);
    double sum_u = 0.0, sum_g2 = 0.0;
    long n_u = 0, n_g2 = 0;
    for (int t = 0; t < 4000; ++t) {
        const ChannelRealization real = draw_realization(cfg, t);
        sum_u += real.u[0].squaredNorm();
        n_u += real.u[0].size();
        sum_g2 += real.g2.squaredNorm();
        n_g2 += real.g2.size();
    }
    CHECK(sum_u / n_u == doctest::Approx(gains.u).epsilon(0.02));
    CHECK(sum_g2 / n_g2 == doctest::Approx(gains.g2).epsilon(0.02));
}

TEST_CASE("cascaded quantities satisfy the defining identities") {
    SystemConfig cfg;
    cfg.n = 3;
    cfg.m1 = 4;
    cfg.m2 = 5;
    cfg.k = 3;
    const ChannelRealization real = draw_realization(cfg, 9);
    const CascadedCsi csi = cascaded_csi(real);

    // direct definitions from the physical links
    for (int k = 0; k < cfg.k; ++k) {
        const CMat r_def = real.g1 * real.u[k].asDiagonal();
        const CMat rt_def = real.g2 * real.u_tilde[k].asDiagonal();
        CHECK(rel_err(csi.r[k], r_def) <= 1e-14);
        CHECK(rel_err(csi.r_tilde[k], rt_def) <= 1e-14);
        for (int m = 0; m < cfg.m1; ++m) {
            const CMat q_def =
                real.g2 * (real.d.col(m) * real.u[k](m)).asDiagonal();
            CHECK(rel_err(csi.q[k][m], q_def) <= 1e-14);
        }
    }

    // scaling identities tying everything to the reference user
    CHECK((csi.b[0] - CVec::Ones(cfg.m1)).norm() <= 1e-14);
    CHECK((csi.b_tilde[0] - CVec::Ones(cfg.m2)).norm() <= 1e-14);
    for (int m = 0; m < cfg.m1; ++m)
        CHECK(rel_err(CMat(csi.r_tilde[0] * csi.a[m].asDiagonal()), csi.q[0][m]) <= 1e-12);
    for (int k = 1; k < cfg.k; ++k) {
        CHECK(rel_err(CMat(csi.r[0] * csi.b[k].asDiagonal()), csi.r[k]) <= 1e-12);
        CHECK(rel_err(CMat(csi.r_tilde[0] * csi.b_tilde[k].asDiagonal()),
                      csi.r_tilde[k]) <= 1e-12);
        for (int m = 0; m < cfg.m1; ++m)
            CHECK(rel_err(CMat(csi.q[0][m] * csi.b[k](m)), csi.q[k][m]) <= 1e-12);
    }
}

TEST_CASE("all-ones user link collapses R to the surface-to-BS matrix") {
    ChannelRealization real;
    real.g1 = CMat::Random(3, 4);
    real.g2 = CMat::Random(3, 5);
    real.d = CMat::Random(5, 4);
    real.u = {CVec::Ones(4)};
    real.u_tilde = {CVec::Ones(5)};
    const CascadedCsi csi = cascaded_csi(real);
    CHECK(rel_err(csi.r[0], real.g1) <= 1e-14);
    CHECK(rel_err(csi.r_tilde[0], real.g2) <= 1e-14);
}

TEST_CASE("effective channel formulations agree") {
    SystemConfig cfg;
    cfg.n = 4;
    cfg.m1 = 6;
    cfg.m2 = 5;
    cfg.k = 3;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> amp(0.0, 1.0), ph(0.0, 6.283185307179586);
    for (int t = 0; t < 20; ++t) {
        const ChannelRealization real = draw_realization(cfg, t);
        const CascadedCsi csi = cascaded_csi(real);
        CVec th1(cfg.m1), th2(cfg.m2);
        for (int m = 0; m < cfg.m1; ++m) th1(m) = std::polar(amp(rng), ph(rng));
        for (int m = 0; m < cfg.m2; ++m) th2(m) = std::polar(amp(rng), ph(rng));
        const int k = t % cfg.k;
        const CVec h_phys = effective_channel(real, th1, th2, k);
        const CVec h_casc = effective_channel_cascaded(csi, th1, th2, k);
        const CVec h_user = effective_channel_scaled_user(csi, th1, th2, k);
        CHECK((h_casc - h_phys).norm() / h_phys.norm() <= 1e-12);
        CHECK((h_user - h_phys).norm() / h_phys.norm() <= 1e-12);
        if (k == 0) {
            const CVec h_ref = effective_channel_scaled_ref(csi, th1, th2);
            CHECK((h_ref - h_phys).norm() / h_phys.norm() <= 1e-12);
        }
    }
}

TEST_CASE("reflection amplitudes above one are rejected") {
    SystemConfig cfg;
    cfg.n = 2;
    cfg.m1 = 3;
    cfg.m2 = 3;
    cfg.k = 1;
    const ChannelRealization real = draw_realization(cfg, 1);
    CVec th1 = CVec::Ones(3), th2 = CVec::Ones(3);
    th1(0) = 1.5;
    CHECK_THROWS_AS(effective_channel(real, th1, th2, 0), AmplitudeOutOfRange);
}
