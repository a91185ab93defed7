#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dirsim/numerics.hpp"

namespace dirsim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

double distance(const Vec3& a, const Vec3& b);

enum class NmseMode { kLiteral, kPerMatrix };

/// Scenario parameters. Defaults reproduce the two-surface corridor geometry:
/// BS and IRS 2 co-located at one end, IRS 1 and the user cluster at the other.
struct SystemConfig {
    int n = 8;    // BS antennas
    int m1 = 20;  // subsurfaces at IRS 1 (user side)
    int m2 = 20;  // subsurfaces at IRS 2 (BS side)
    int k = 4;    // users

    Vec3 bs_pos{1.0, 0.0, 2.0};
    Vec3 irs2_pos{0.0, 0.5, 1.0};
    Vec3 irs1_pos{0.0, 49.5, 1.0};
    Vec3 user_pos{1.0, 50.0, 0.0};  // cluster center

    double gamma0 = 1e-3;  // reference path gain at 1 m (-30 dB)
    double alpha_near = 2.2;
    double alpha_far = 3.0;

    double noise_dbm = -65.0;  // receiver noise power
    double tx_dbm = 30.0;      // per-user transmit power

    int trials = 1000;
    std::uint64_t seed = 1;
    NmseMode nmse_mode = NmseMode::kLiteral;

    double sv_tol = kSvRelTol;
    double degeneracy_floor = 1e-6;  // relative to link RMS amplitude

    double noise_watts() const;
    double tx_watts() const;
    /// sigma^2 = sigma_N^2 / P, the noise power after pilot normalization.
    double normalized_noise() const;
    double normalized_noise_at(double tx_dbm_override) const;

    void validate() const;  // throws ConfigError
};

struct LinkDistances {
    double user_irs1 = 0.0;  // near link, alpha_near
    double irs2_bs = 0.0;    // near link, alpha_near
    double irs1_irs2 = 0.0;  // far link, alpha_far
    double irs1_bs = 0.0;    // far link, alpha_far
    double user_irs2 = 0.0;  // far link, alpha_far
};

LinkDistances link_distances(const SystemConfig& cfg);

/// Per-entry channel variance of each physical link.
struct LinkGains {
    double g1 = 0.0;       // IRS 1 -> BS
    double g2 = 0.0;       // IRS 2 -> BS
    double d = 0.0;        // IRS 1 -> IRS 2
    double u = 0.0;        // user -> IRS 1
    double u_tilde = 0.0;  // user -> IRS 2
};

LinkGains link_gains(const SystemConfig& cfg);

double path_loss(double d, double alpha, double gamma0);

/// One draw of all physical links. Users are indexed 0..K-1; user 0 is the
/// reference user whose cascaded CSI anchors the multi-user scaling vectors.
struct ChannelRealization {
    CMat g1;                   // N x M1
    CMat g2;                   // N x M2
    CMat d;                    // M2 x M1
    std::vector<CVec> u;       // K vectors of length M1
    std::vector<CVec> u_tilde; // K vectors of length M2
};

ChannelRealization draw_realization(const SystemConfig& cfg, std::uint64_t trial_seed);

/// Ground-truth cascaded quantities derived from a realization.
struct CascadedCsi {
    std::vector<CMat> r;              // K of N x M1
    std::vector<CMat> r_tilde;        // K of N x M2
    std::vector<std::vector<CMat>> q; // K x M1 of N x M2
    std::vector<CVec> a;              // M1 scaling vectors of length M2
    std::vector<CVec> b;              // K of M1 (b[0] = ones)
    std::vector<CVec> b_tilde;        // K of M2
};

CascadedCsi cascaded_csi(const ChannelRealization& real, double floor_rel = 1e-6);

/// Effective user-k -> BS channel from the physical links (double-reflection
/// plus the two single-reflection paths).
CVec effective_channel(const ChannelRealization& real, const CVec& theta1,
                       const CVec& theta2, int k);

/// Same channel from the cascaded quantities. Internally cross-checks the
/// scaled formulations and throws on disagreement.
CVec effective_channel_cascaded(const CascadedCsi& csi, const CVec& theta1,
                                const CVec& theta2, int k);

/// Reference-user form built from R, R_tilde and the scaling vectors a_m only.
CVec effective_channel_scaled_ref(const CascadedCsi& csi, const CVec& theta1,
                                  const CVec& theta2);

/// Multi-user form built from the reference CSI and the per-user scalings.
CVec effective_channel_scaled_user(const CascadedCsi& csi, const CVec& theta1,
                                   const CVec& theta2, int k);

}  // namespace dirsim
