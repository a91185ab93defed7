#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "dirsim/channel.hpp"
#include "dirsim/numerics.hpp"

namespace dirsim {

enum class SolveCase { kSequential, kJoint };

struct Phase3Slot {
    CVec theta1;  // M1
    CVec theta2;  // M2
};

struct PilotSlot {
    CVec pilots;  // K-1 symbols for users 2..K
    CVec theta;   // reflection of the active surface (M1 in phase IV, M2 in phase V)
};

/// Per-phase reflection patterns and pilot schedules. The slot lists hold the
/// base (minimum-overhead) patterns; i1..i5 are the scheduled slot counts and
/// exceed the base sizes only in equal-overhead mode, in which case the base
/// pattern is cycled and repeated observations are averaged into the solves.
struct TrainingPlan {
    CMat theta1;  // M1 x i1, phase I training reflection (IRS 2 OFF)
    CMat theta2;  // M2 x i2, phase II training reflection (IRS 1 OFF)
    std::vector<Phase3Slot> phase3;
    std::vector<PilotSlot> phase4;
    std::vector<PilotSlot> phase5;
    SolveCase case3 = SolveCase::kSequential;
    SolveCase case4 = SolveCase::kSequential;
    SolveCase case5 = SolveCase::kSequential;
    long i1 = 0, i2 = 0, i3 = 0, i4 = 0, i5 = 0;

    long total_slots() const { return i1 + i2 + i3 + i4 + i5; }
};

/// First m rows of the i-point DFT matrix; Theta * Theta^H = i * I_m and every
/// entry has unit amplitude (all subsurfaces ON). Throws TooFewSlots if i < m.
CMat dft_training(int m, int i);

std::vector<Phase3Slot> phase3_plan(int m1, int m2, int n);

std::pair<std::vector<PilotSlot>, std::vector<PilotSlot>> phase45_plan(int k, int m1,
                                                                       int m2, int n);

/// Slot `index` of the unbounded joint phase-III pattern; indices past the
/// planned minimum extend the plan when the stacked system is rank deficient.
Phase3Slot phase3_joint_slot(int m1, int m2, long index);

/// Same for the joint multi-user phases; m is M1 in phase IV, M2 in phase V.
PilotSlot phase45_joint_slot(int k, int m, long index);

long overhead_proposed(long n, long m1, long m2, long k);
long overhead_benchmark(long m1, long m2, long k);

TrainingPlan make_plan(const SystemConfig& cfg, bool force_joint_phase3 = false);

/// Pads the plan's slot counts proportionally to each phase's minimum until the
/// total equals target_total (remainder goes to phase III).
void pad_plan(TrainingPlan& plan, long target_total);

/// One record per scheduled slot: phase, slot index, theta1 phases, theta2
/// phases, pilot vector.
void serialize_plan(const TrainingPlan& plan, std::ostream& os);

}  // namespace dirsim
