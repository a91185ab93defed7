#include "dirsim/channel.hpp"

#include <cmath>

namespace dirsim {

namespace {

constexpr int kRedrawLimit = 16;

double dbm_to_watts(double dbm) {
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

CMat draw_matrix(Eigen::Index rows, Eigen::Index cols, double gain,
                 std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = std::sqrt(gain / 2.0);
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = cxd(scale * gauss(rng), scale * gauss(rng));
    return m;
}

CVec draw_vector(Eigen::Index len, double gain, std::mt19937_64& rng) {
    return draw_matrix(len, 1, gain, rng).col(0);
}

bool above_floor(const CVec& v, double floor_abs) {
    return (v.cwiseAbs().array() >= floor_abs).all();
}

void check_amplitudes(const CVec& theta, const char* which) {
    if ((theta.cwiseAbs().array() > 1.0 + 1e-12).any())
        throw AmplitudeOutOfRange(std::string("reflection amplitude above 1 on ") + which);
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double SystemConfig::noise_watts() const { return dbm_to_watts(noise_dbm); }
double SystemConfig::tx_watts() const { return dbm_to_watts(tx_dbm); }
double SystemConfig::normalized_noise() const { return noise_watts() / tx_watts(); }
double SystemConfig::normalized_noise_at(double tx_dbm_override) const {
    return noise_watts() / dbm_to_watts(tx_dbm_override);
}

void SystemConfig::validate() const {
    if (n < 1 || m1 < 1 || m2 < 1 || k < 1)
        throw ConfigError("antenna/subsurface/user counts must be >= 1");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
    if (!(noise_watts() > 0.0) || !(tx_watts() > 0.0))
        throw ConfigError("powers must be positive");
    if (!(sv_tol > 0.0) || !(degeneracy_floor > 0.0))
        throw ConfigError("tolerances must be positive");
    const LinkDistances ld = link_distances(*this);
    for (double d : {ld.user_irs1, ld.irs2_bs, ld.irs1_irs2, ld.irs1_bs, ld.user_irs2})
        if (!(d > 0.0)) throw ConfigError("co-located scenario nodes (zero link distance)");
}

LinkDistances link_distances(const SystemConfig& cfg) {
    LinkDistances ld;
    ld.user_irs1 = distance(cfg.user_pos, cfg.irs1_pos);
    ld.irs2_bs = distance(cfg.irs2_pos, cfg.bs_pos);
    ld.irs1_irs2 = distance(cfg.irs1_pos, cfg.irs2_pos);
    ld.irs1_bs = distance(cfg.irs1_pos, cfg.bs_pos);
    ld.user_irs2 = distance(cfg.user_pos, cfg.irs2_pos);
    return ld;
}

double path_loss(double d, double alpha, double gamma0) {
    if (!(d > 0.0)) throw NonPositiveDistance("path_loss: distance must be positive");
    return gamma0 / std::pow(d, alpha);
}

LinkGains link_gains(const SystemConfig& cfg) {
    const LinkDistances ld = link_distances(cfg);
    LinkGains g;
    g.u = path_loss(ld.user_irs1, cfg.alpha_near, cfg.gamma0);
    g.g2 = path_loss(ld.irs2_bs, cfg.alpha_near, cfg.gamma0);
    g.d = path_loss(ld.irs1_irs2, cfg.alpha_far, cfg.gamma0);
    g.g1 = path_loss(ld.irs1_bs, cfg.alpha_far, cfg.gamma0);
    g.u_tilde = path_loss(ld.user_irs2, cfg.alpha_far, cfg.gamma0);
    return g;
}

ChannelRealization draw_realization(const SystemConfig& cfg, std::uint64_t trial_seed) {
    const LinkGains gains = link_gains(cfg);
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(trial_seed),
                      static_cast<std::uint32_t>(trial_seed >> 32),
                      std::uint32_t{0x4348414e}};
    std::mt19937_64 rng(seq);

    ChannelRealization real;
    real.g1 = draw_matrix(cfg.n, cfg.m1, gains.g1, rng);
    real.g2 = draw_matrix(cfg.n, cfg.m2, gains.g2, rng);
    real.d = draw_matrix(cfg.m2, cfg.m1, gains.d, rng);

    real.u.resize(cfg.k);
    real.u_tilde.resize(cfg.k);
    const double floor_u = cfg.degeneracy_floor * std::sqrt(gains.u);
    const double floor_ut = cfg.degeneracy_floor * std::sqrt(gains.u_tilde);
    for (int k = 0; k < cfg.k; ++k) {
        real.u[k] = draw_vector(cfg.m1, gains.u, rng);
        real.u_tilde[k] = draw_vector(cfg.m2, gains.u_tilde, rng);
    }
    // The scaling vectors divide by the reference user's entries; redraw user 0
    // if any entry sits below the degeneracy floor.
    for (int tries = 0; !above_floor(real.u[0], floor_u); ++tries) {
        if (tries >= kRedrawLimit)
            throw DegenerateRealization("reference user->IRS1 link below degeneracy floor");
        real.u[0] = draw_vector(cfg.m1, gains.u, rng);
    }
    for (int tries = 0; !above_floor(real.u_tilde[0], floor_ut); ++tries) {
        if (tries >= kRedrawLimit)
            throw DegenerateRealization("reference user->IRS2 link below degeneracy floor");
        real.u_tilde[0] = draw_vector(cfg.m2, gains.u_tilde, rng);
    }
    return real;
}

CascadedCsi cascaded_csi(const ChannelRealization& real, double floor_rel) {
    const int k_users = static_cast<int>(real.u.size());
    const Eigen::Index m1 = real.g1.cols();
    const Eigen::Index m2 = real.g2.cols();

    const double rms_u = std::sqrt(real.u[0].squaredNorm() / double(m1));
    const double rms_ut = std::sqrt(real.u_tilde[0].squaredNorm() / double(m2));
    if (!above_floor(real.u[0], floor_rel * rms_u) ||
        !above_floor(real.u_tilde[0], floor_rel * rms_ut))
        throw DegenerateReference("reference user entry below degeneracy floor");

    CascadedCsi csi;
    csi.r.resize(k_users);
    csi.r_tilde.resize(k_users);
    csi.q.resize(k_users);
    csi.b.resize(k_users);
    csi.b_tilde.resize(k_users);
    for (int k = 0; k < k_users; ++k) {
        csi.r[k] = real.g1 * real.u[k].asDiagonal();
        csi.r_tilde[k] = real.g2 * real.u_tilde[k].asDiagonal();
        csi.q[k].resize(m1);
        for (Eigen::Index m = 0; m < m1; ++m) {
            const CVec d_km = real.d.col(m) * real.u[k](m);
            csi.q[k][m] = real.g2 * d_km.asDiagonal();
        }
        csi.b[k] = real.u[k].cwiseQuotient(real.u[0]);
        csi.b_tilde[k] = real.u_tilde[k].cwiseQuotient(real.u_tilde[0]);
    }
    csi.a.resize(m1);
    for (Eigen::Index m = 0; m < m1; ++m) {
        const CVec d_1m = real.d.col(m) * real.u[0](m);
        csi.a[m] = d_1m.cwiseQuotient(real.u_tilde[0]);
    }
    return csi;
}

CVec effective_channel(const ChannelRealization& real, const CVec& theta1,
                       const CVec& theta2, int k) {
    if (theta1.size() != real.g1.cols() || theta2.size() != real.g2.cols())
        throw DimensionMismatch("effective_channel: reflection vector length");
    check_amplitudes(theta1, "IRS 1");
    check_amplitudes(theta2, "IRS 2");
    const CVec via1 = theta1.cwiseProduct(real.u[k]);
    return real.g2 * theta2.cwiseProduct(real.d * via1) +
           real.g2 * theta2.cwiseProduct(real.u_tilde[k]) + real.g1 * via1;
}

CVec effective_channel_cascaded(const CascadedCsi& csi, const CVec& theta1,
                                const CVec& theta2, int k) {
    check_amplitudes(theta1, "IRS 1");
    check_amplitudes(theta2, "IRS 2");
    CVec h = csi.r_tilde[k] * theta2 + csi.r[k] * theta1;
    for (Eigen::Index m = 0; m < theta1.size(); ++m)
        if (theta1(m) != cxd(0.0, 0.0)) h += (csi.q[k][m] * theta2) * theta1(m);

    // Consistency guard: the scaled formulations must agree with the direct one.
    const double scale = h.norm();
    const CVec h_user = effective_channel_scaled_user(csi, theta1, theta2, k);
    double dev = (h_user - h).norm();
    if (k == 0) {
        const CVec h_ref = effective_channel_scaled_ref(csi, theta1, theta2);
        dev = std::max(dev, (h_ref - h).norm());
    }
    if (scale > 0.0 && dev > 1e-10 * scale)
        throw Error("effective channel formulations disagree");
    return h;
}

CVec effective_channel_scaled_ref(const CascadedCsi& csi, const CVec& theta1,
                                  const CVec& theta2) {
    CVec h = csi.r_tilde[0] * theta2 + csi.r[0] * theta1;
    for (Eigen::Index m = 0; m < theta1.size(); ++m)
        if (theta1(m) != cxd(0.0, 0.0))
            h += (csi.r_tilde[0] * csi.a[m].cwiseProduct(theta2)) * theta1(m);
    return h;
}

CVec effective_channel_scaled_user(const CascadedCsi& csi, const CVec& theta1,
                                   const CVec& theta2, int k) {
    CVec h = csi.r_tilde[0] * theta2.cwiseProduct(csi.b_tilde[k]) +
             csi.r[0] * theta1.cwiseProduct(csi.b[k]);
    for (Eigen::Index m = 0; m < theta1.size(); ++m)
        if (theta1(m) != cxd(0.0, 0.0))
            h += (csi.q[0][m] * theta2) * (theta1(m) * csi.b[k](m));
    return h;
}

}  // namespace dirsim
