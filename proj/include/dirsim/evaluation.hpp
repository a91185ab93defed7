#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "dirsim/estimator.hpp"

namespace dirsim {

/// Normalized MSE over a family of matrices. Literal mode divides the summed
/// per-matrix error ratios by k * n * m_dim; per-matrix mode returns the plain
/// mean ratio. For the double-reflection family m_dim is M1*M2 and the lists
/// run over all (user, subsurface) pairs.
double nmse(const std::vector<CMat>& est, const std::vector<CMat>& truth,
            NmseMode mode, int k, int n, long m_dim);

enum Family { kFamilyR = 0, kFamilyRTilde = 1, kFamilyQ = 2 };
enum Scheme { kProposed = 0, kBenchmark = 1 };

inline const char* family_name(int f) {
    static const char* names[] = {"R", "Rtilde", "Q"};
    return names[f];
}
inline const char* scheme_name(int s) { return s == kProposed ? "proposed" : "benchmark"; }

struct FamilyStats {
    double nmse = 0.0;
    double stderr_ = 0.0;
};

struct PowerPoint {
    double p_dbm = 0.0;
    double p_watts = 0.0;
    double sigma2 = 0.0;
    std::array<std::array<FamilyStats, 3>, 2> stats{};  // [scheme][family]
    int trials = 0;
    int excluded = 0;
    double mean_cond_phase3 = 0.0;
    bool any_rank_extension = false;
};

struct SweepOptions {
    bool equal_overhead = false;
    bool genie_cancel = false;
    int workers = 1;
};

struct SweepResult {
    std::vector<PowerPoint> points;
    long proposed_slots = 0;
    long benchmark_slots = 0;
    bool equal_overhead = false;
};

SweepResult run_sweep(const SystemConfig& cfg, const std::vector<double>& powers_dbm,
                      const SweepOptions& opts = {});

/// One row per (scheme, family, power point). Byte-stable for a fixed
/// (config, seed).
void write_sweep_csv(const SweepResult& sweep, std::ostream& os);

}  // namespace dirsim
