#pragma once

#include "ris/problem.hpp"
#include "ris/subproblem.hpp"

#include <iosfwd>
#include <vector>

namespace ris {

/// One accepted iterate of a time-stepping run.
struct StepRecord {
    int k = 0;
    double s = 0.0; // artificial time k * tau
    double t = 0.0;
    State z;
    double lambda = 0.0;
    double dz_V = 0.0;
    double dz_Z = 0.0;
    bool stalled = false; // dz_V == tau, i.e. zero physical-time progress
    KktResiduals kkt;
    double objective = 0.0;
};

struct Trajectory {
    double tau = 0.0;
    std::vector<StepRecord> records; // records[k] for k = 0 .. n_total
    int n_total = 0;    // index of the final (locally stable) record
    int n_reach_T = 0;  // first index with t == T
    double arc_length_Z = 0.0;

    int max_stall_run() const;
    double max_kkt_relative(const Problem& p) const;
    double max_state_norm_Z(const Problem& p) const;
};

/// Piecewise-affine state interpolant in physical time over strictly
/// increasing breakpoints.
struct PhysicalSolution {
    std::vector<double> times;
    std::vector<State> states;

    /// Affine interpolation; throws OutOfRange outside [times.front(), times.back()].
    State evaluate(double t) const;
};

/// Piecewise-affine interpolants in artificial time s with knots s_k = k*tau.
struct ArtificialInterpolant {
    double tau = 0.0;
    std::vector<double> t_knots;
    std::vector<State> z_knots;
    bool last_interval_clamped = false; // horizon clamp truncated the final update

    double s_end() const { return tau * static_cast<double>(t_knots.size() - 1); }
    /// slope of t-hat on (s_{k-1}, s_k); 0 on stalled intervals, 1 when the
    /// state did not move.
    double time_slope(int k) const;
    double state_speed_V(const Problem& p, int k) const;
    std::pair<double, State> evaluate(double s) const;
};

struct RunOptions {
    SolveOptions sub;
    /// Abort after this many consecutive stalls; <0 selects the policy
    /// default: 10 * (ceil(lip/kappa) + 1) when hints are present, else 1e4.
    long stall_guard = -1;
    bool check_initial = true;
};

/// Ball-constrained scheme with time update t_k = min(t_{k-1} + tau - ||dz||_V, T),
/// continued at frozen t = T until the state is locally stable again.
Trajectory run_local(const Problem& p, double tau, const RunOptions& opts = {});

/// Unconstrained scheme on the uniform grid t_k = min(t_{k-1} + tau, T); each
/// step minimizes at the previous grid time.
Trajectory run_global(const Problem& p, double tau, const RunOptions& opts = {});

/// Keep index 0, every index k <= n_reach_T with t_k > t_{k-1}, and n_total;
/// breakpoints sharing t = T collapse to the final state.
PhysicalSolution filter_progress(const Trajectory& traj);

ArtificialInterpolant artificial_interpolants(const Trajectory& traj);

/// CSV schema: k,s,t,lambda,dz_V,dz_Z,stalled,kkt_max,objective
/// (floats with 17 significant digits, stalled as 0/1).
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Post-hoc structural checks on a finished run; returns the number of
/// violated record/trajectory invariants (0 for a healthy run).
struct TrajectoryCheck {
    int time_update = 0;     // t_k != min(t_{k-1} + tau - dz_V, T)
    int monotonicity = 0;    // t decreasing
    int multiplier = 0;      // lambda < 0 or complementarity above tol
    int first_step = 0;      // z_1 != z_0 or t_1 != tau (stable start, tau <= T)
    int terminal_stable = 0; // final record not locally stable
    int kkt = 0;             // certified residual above tol
    int finite = 0;          // non-finite state entries

    int total() const
    {
        return time_update + monotonicity + multiplier + first_step + terminal_stable + kkt +
               finite;
    }
};

TrajectoryCheck check_trajectory(const Problem& p, const Trajectory& traj,
                                 bool global_scheme = false,
                                 bool expect_first_step_identity = true);

} // namespace ris
