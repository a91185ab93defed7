#pragma once

#include <array>
#include <random>
#include <vector>

#include "dirsim/channel.hpp"
#include "dirsim/training.hpp"

namespace dirsim {

struct EstimatorOptions {
    double noise_power = 0.0;  // normalized sigma^2 = sigma_N^2 / P
    bool genie_cancel = false;  // cancel phase-III pilots with the true R, R_tilde
    bool cross_check = false;   // also solve every LS step in closed form
    double sv_tol = kSvRelTol;
};

/// Estimated cascaded CSI plus per-phase accounting. Dimensions mirror
/// CascadedCsi; the reconstruction identities hold by construction.
struct EstimationResult {
    std::vector<CMat> r_hat, r_tilde_hat;
    std::vector<std::vector<CMat>> q_hat;
    std::vector<CVec> a_hat, b_hat, b_tilde_hat;

    std::array<long, 5> slots_used{0, 0, 0, 0, 0};
    std::array<double, 5> condition{0, 0, 0, 0, 0};
    bool rank_extended = false;
    double max_oracle_rel_err = 0.0;  // populated when cross_check is on

    long total_slots() const {
        long t = 0;
        for (long s : slots_used) t += s;
        return t;
    }
};

/// Received BS vector for one slot: y = sum_k x_k h_k(theta1, theta2) + v,
/// v ~ CN(0, noise_power I). `pilots` has one symbol per user.
CVec synthesize_rx(const ChannelRealization& real, const CVec& theta1,
                   const CVec& theta2, const CVec& pilots, double noise_power,
                   std::mt19937_64& rng);

/// Phase I/II LS estimates from the stacked received block (IRS 2 / IRS 1 OFF).
CMat phase1_estimate(const CMat& y_stack, const CMat& theta1, double tol = kSvRelTol,
                     RankReport* diag = nullptr);
CMat phase2_estimate(const CMat& y_stack, const CMat& theta2, double tol = kSvRelTol,
                     RankReport* diag = nullptr);

/// Removes the single-reflection pilot contributions using the given estimates.
CVec phase3_cancel(const CVec& y, const CMat& r_hat, const CMat& r_tilde_hat,
                   const CVec& theta1, const CVec& theta2);

/// Scaling-vector estimation from the cancelled signals. Sequential mode solves
/// one LS per slot against r_tilde_hat (requires N >= M2); joint mode stacks the
/// slots into one system. `weights` (optional, per slot) carry the averaging
/// weights of repeated observations.
std::vector<CVec> phase3_estimate_a(const std::vector<CVec>& ybar,
                                    const std::vector<Phase3Slot>& slots,
                                    const CMat& r_tilde_hat, SolveCase mode,
                                    double tol = kSvRelTol, RankReport* diag = nullptr,
                                    const std::vector<double>* weights = nullptr);

std::vector<CMat> reconstruct_q(const CMat& r_tilde_hat,
                                const std::vector<CVec>& a_hat);

std::vector<CVec> phase4_estimate_b(const std::vector<CVec>& y,
                                    const std::vector<PilotSlot>& slots,
                                    const CMat& r1_hat, SolveCase mode,
                                    double tol = kSvRelTol, RankReport* diag = nullptr,
                                    const std::vector<double>* weights = nullptr);

std::vector<CVec> phase5_estimate_btilde(const std::vector<CVec>& y,
                                         const std::vector<PilotSlot>& slots,
                                         const CMat& r_tilde1_hat, SolveCase mode,
                                         double tol = kSvRelTol,
                                         RankReport* diag = nullptr,
                                         const std::vector<double>* weights = nullptr);

/// Runs phases I-V and reconstructs all users' cascaded CSI.
EstimationResult run_proposed(const ChannelRealization& real, const TrainingPlan& plan,
                              const EstimatorOptions& opts, std::mt19937_64& rng);

/// Per-antenna benchmark: per user, DFT training for the single-reflection
/// channels, then one slot per subsurface pair for the double-reflection link.
EstimationResult run_benchmark(const ChannelRealization& real,
                               const EstimatorOptions& opts, std::mt19937_64& rng);

}  // namespace dirsim
