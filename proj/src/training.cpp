#include "dirsim/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace dirsim {

namespace {

// Low-discrepancy node sequence for the joint-phase reflection/pilot designs.
// Distinct well-spread directions keep the stacked systems full rank at the
// minimum slot counts; cycling a fixed M-point DFT column set does not.
double golden_node(long index) {
    constexpr double phi = 0.6180339887498949;  // 1/golden ratio
    return std::fmod(static_cast<double>(index) * phi, 1.0);
}

CVec unit_phase_ramp(int len, double node) {
    CVec v(len);
    for (int m = 0; m < len; ++m)
        v(m) = std::polar(1.0, -2.0 * std::numbers::pi * m * node);
    return v;
}

CVec dft_column(int len, long col) {
    return unit_phase_ramp(len, static_cast<double>(col % len) / len);
}

long ceil_div(long a, long b) { return (a + b - 1) / b; }

void write_vec(std::ostream& os, const CVec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ';';
        os << std::abs(v(i)) << '@' << std::arg(v(i));
    }
}

}  // namespace

CMat dft_training(int m, int i) {
    if (i < m) throw TooFewSlots("dft_training: need at least M slots");
    CMat theta(m, i);
    for (int col = 0; col < i; ++col)
        theta.col(col) = unit_phase_ramp(m, static_cast<double>(col) / i);
    return theta;
}

Phase3Slot phase3_joint_slot(int m1, int m2, long index) {
    Phase3Slot slot;
    slot.theta1 = unit_phase_ramp(m1, golden_node(index));
    slot.theta2 = dft_column(m2, index);
    return slot;
}

PilotSlot phase45_joint_slot(int k, int m, long index) {
    PilotSlot slot;
    slot.pilots = unit_phase_ramp(k - 1, golden_node(index));
    slot.theta = dft_column(m, index);
    return slot;
}

std::vector<Phase3Slot> phase3_plan(int m1, int m2, int n) {
    std::vector<Phase3Slot> slots;
    if (n >= m2) {
        // One IRS 1 subsurface ON per slot, IRS 2 fully ON.
        for (int i = 0; i < m1; ++i) {
            Phase3Slot slot;
            slot.theta1 = CVec::Zero(m1);
            slot.theta1(i) = 1.0;
            slot.theta2 = CVec::Ones(m2);
            slots.push_back(std::move(slot));
        }
    } else {
        const long i3 = ceil_div(static_cast<long>(m1) * m2, n);
        slots.reserve(i3);
        for (long i = 0; i < i3; ++i) slots.push_back(phase3_joint_slot(m1, m2, i));
    }
    return slots;
}

std::pair<std::vector<PilotSlot>, std::vector<PilotSlot>> phase45_plan(int k, int m1,
                                                                       int m2, int n) {
    if (k < 1) throw ConfigError("phase45_plan: K must be >= 1");
    std::pair<std::vector<PilotSlot>, std::vector<PilotSlot>> plans;
    if (k == 1) return plans;

    auto sequential = [&](int m) {
        std::vector<PilotSlot> slots(k - 1);
        for (int i = 0; i < k - 1; ++i) {
            slots[i].pilots = CVec::Zero(k - 1);
            slots[i].pilots(i) = 1.0;  // user i+2 sends alone
            slots[i].theta = CVec::Ones(m);
        }
        return slots;
    };
    auto joint = [&](int m) {
        const long count = ceil_div(static_cast<long>(k - 1) * m, n);
        std::vector<PilotSlot> slots;
        slots.reserve(count);
        for (long i = 0; i < count; ++i) slots.push_back(phase45_joint_slot(k, m, i));
        return slots;
    };
    plans.first = (n >= m1) ? sequential(m1) : joint(m1);
    plans.second = (n >= m2) ? sequential(m2) : joint(m2);
    return plans;
}

long overhead_proposed(long n, long m1, long m2, long k) {
    const long i1 = m1;
    const long i2 = m2;
    const long i3 = (n >= m2) ? m1 : ceil_div(m1 * m2, n);
    const long i4 = (k == 1) ? 0 : ((n >= m1) ? k - 1 : ceil_div((k - 1) * m1, n));
    const long i5 = (k == 1) ? 0 : ((n >= m2) ? k - 1 : ceil_div((k - 1) * m2, n));
    return i1 + i2 + i3 + i4 + i5;
}

long overhead_benchmark(long m1, long m2, long k) {
    return k * (m1 + m2) + k * m1 * m2;
}

TrainingPlan make_plan(const SystemConfig& cfg, bool force_joint_phase3) {
    TrainingPlan plan;
    plan.theta1 = dft_training(cfg.m1, cfg.m1);
    plan.theta2 = dft_training(cfg.m2, cfg.m2);
    plan.i1 = cfg.m1;
    plan.i2 = cfg.m2;

    const bool joint3 = force_joint_phase3 || cfg.n < cfg.m2;
    plan.case3 = joint3 ? SolveCase::kJoint : SolveCase::kSequential;
    if (joint3 && cfg.n >= cfg.m2) {
        // Forced joint mode at the sequential slot budget still needs
        // I3*N >= M1*M2; use the joint pattern at its own minimum.
        const long i3 = ceil_div(static_cast<long>(cfg.m1) * cfg.m2, cfg.n);
        plan.phase3.reserve(i3);
        for (long i = 0; i < i3; ++i)
            plan.phase3.push_back(phase3_joint_slot(cfg.m1, cfg.m2, i));
    } else {
        plan.phase3 = phase3_plan(cfg.m1, cfg.m2, cfg.n);
    }
    plan.i3 = static_cast<long>(plan.phase3.size());

    auto [p4, p5] = phase45_plan(cfg.k, cfg.m1, cfg.m2, cfg.n);
    plan.phase4 = std::move(p4);
    plan.phase5 = std::move(p5);
    plan.case4 = (cfg.n >= cfg.m1) ? SolveCase::kSequential : SolveCase::kJoint;
    plan.case5 = (cfg.n >= cfg.m2) ? SolveCase::kSequential : SolveCase::kJoint;
    plan.i4 = static_cast<long>(plan.phase4.size());
    plan.i5 = static_cast<long>(plan.phase5.size());
    return plan;
}

void pad_plan(TrainingPlan& plan, long target_total) {
    const long base[5] = {plan.i1, plan.i2, plan.i3, plan.i4, plan.i5};
    const long total = plan.total_slots();
    if (target_total < total)
        throw InvalidRange("pad_plan: target below the plan's minimum overhead");
    const long extra = target_total - total;
    long given = 0;
    long add[5] = {0, 0, 0, 0, 0};
    for (int p = 0; p < 5; ++p) {
        add[p] = extra * base[p] / total;
        given += add[p];
    }
    add[2] += extra - given;  // remainder to phase III
    plan.i1 += add[0];
    plan.i2 += add[1];
    plan.i3 += add[2];
    plan.i4 += add[3];
    plan.i5 += add[4];
    // Phases I/II stay orthogonal at any length; later phases cycle their base
    // slots and the estimator averages the repeats.
    plan.theta1 = dft_training(static_cast<int>(plan.theta1.rows()),
                               static_cast<int>(plan.i1));
    plan.theta2 = dft_training(static_cast<int>(plan.theta2.rows()),
                               static_cast<int>(plan.i2));

    // For the joint phases, repeated slots average noise but add no new rank:
    // the minimum-overhead stacked system is square and badly conditioned, and
    // cycling it keeps that conditioning. Spend part of the padding on fresh
    // directions from the unbounded sequences (capped so the stacked solves
    // stay affordable) and only cycle beyond the cap.
    const int m1 = static_cast<int>(plan.theta1.rows());
    const int m2 = static_cast<int>(plan.theta2.rows());
    if (plan.case3 == SolveCase::kJoint) {
        const long grown = std::min(plan.i3, 2 * static_cast<long>(plan.phase3.size()));
        for (long idx = static_cast<long>(plan.phase3.size()); idx < grown; ++idx)
            plan.phase3.push_back(phase3_joint_slot(m1, m2, idx));
    }
    auto grow_pilot_phase = [](std::vector<PilotSlot>& slots, SolveCase mode,
                               long scheduled, int m) {
        if (mode != SolveCase::kJoint || slots.empty()) return;
        const int users = static_cast<int>(slots.front().pilots.size()) + 1;
        const long grown = std::min(scheduled, 2 * static_cast<long>(slots.size()));
        for (long idx = static_cast<long>(slots.size()); idx < grown; ++idx)
            slots.push_back(phase45_joint_slot(users, m, idx));
    };
    grow_pilot_phase(plan.phase4, plan.case4, plan.i4, m1);
    grow_pilot_phase(plan.phase5, plan.case5, plan.i5, m2);
}

void serialize_plan(const TrainingPlan& plan, std::ostream& os) {
    os << "phase,slot,theta1,theta2,pilots\n";
    const int m1 = static_cast<int>(plan.theta1.rows());
    const int m2 = static_cast<int>(plan.theta2.rows());
    const CVec zeros1 = CVec::Zero(m1);
    const CVec zeros2 = CVec::Zero(m2);
    auto row = [&](const char* phase, long slot, const CVec& t1, const CVec& t2,
                   const CVec& pilots) {
        os << phase << ',' << slot << ',';
        write_vec(os, t1);
        os << ',';
        write_vec(os, t2);
        os << ',';
        write_vec(os, pilots);
        os << '\n';
    };
    const CVec ref_pilot = CVec::Ones(1);
    for (long i = 0; i < plan.i1; ++i)
        row("I", i, plan.theta1.col(i % plan.theta1.cols()), zeros2, ref_pilot);
    for (long i = 0; i < plan.i2; ++i)
        row("II", i, zeros1, plan.theta2.col(i % plan.theta2.cols()), ref_pilot);
    for (long i = 0; i < plan.i3; ++i) {
        const auto& s = plan.phase3[i % plan.phase3.size()];
        row("III", i, s.theta1, s.theta2, ref_pilot);
    }
    for (long i = 0; i < plan.i4; ++i) {
        const auto& s = plan.phase4[i % plan.phase4.size()];
        row("IV", i, s.theta, zeros2, s.pilots);
    }
    for (long i = 0; i < plan.i5; ++i) {
        const auto& s = plan.phase5[i % plan.phase5.size()];
        row("V", i, zeros1, s.theta, s.pilots);
    }
}

}  // namespace dirsim
