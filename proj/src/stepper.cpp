#include "ris/stepper.hpp"

#include "ris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace ris {

namespace {

constexpr long kMaxRecords = 20000000;

long default_stall_guard(const Problem& p)
{
    const auto lip = p.lip_load_hint();
    const auto kappa = p.kappa_hint();
    if (lip && kappa && *kappa > 0.0) {
        return 10 * (static_cast<long>(std::ceil(*lip / *kappa)) + 1);
    }
    return 10000;
}

StepRecord initial_record(const Problem& p)
{
    StepRecord rec;
    rec.k = 0;
    rec.s = 0.0;
    rec.t = 0.0;
    rec.z = p.initial_state();
    rec.objective = p.energy(0.0, rec.z);
    return rec;
}

void check_initial_state(const Problem& p, const RunOptions& opts)
{
    if (!opts.check_initial) return;
    const auto report = p.validate_initial();
    RIS_REQUIRE(report.ok(), p.name() + ": initial state is not locally stable (dist " +
                                 std::to_string(report.dist) + ")");
}

} // namespace

int Trajectory::max_stall_run() const
{
    int best = 0;
    int run = 0;
    for (const auto& rec : records) {
        run = rec.stalled ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best;
}

double Trajectory::max_kkt_relative(const Problem& p) const
{
    double worst = 0.0;
    for (size_t k = 1; k < records.size(); ++k) {
        const double scale = kkt_scale(p, records[k - 1].t);
        worst = std::max(worst, records[k].kkt.max() / scale);
    }
    return worst;
}

double Trajectory::max_state_norm_Z(const Problem& p) const
{
    double worst = 0.0;
    for (const auto& rec : records) worst = std::max(worst, p.norm_Z(rec.z));
    return worst;
}

Trajectory run_local(const Problem& p, double tau, const RunOptions& opts)
{
    if (!(tau > 0.0)) throw InfeasibleTau(tau);
    check_initial_state(p, opts);

    const double T = p.horizon();
    const long guard = opts.stall_guard >= 0 ? opts.stall_guard : default_stall_guard(p);

    Trajectory traj;
    traj.tau = tau;
    traj.records.push_back(initial_record(p));
    traj.n_reach_T = -1;

    long stall_run = 0;
    for (long k = 1; k <= kMaxRecords; ++k) {
        const StepRecord& prev = traj.records.back();
        SubproblemResult res;
        try {
            res = solve_local_step(p, prev.t, prev.z, tau, opts.sub);
        } catch (const NoConvergence& e) {
            throw NoConvergence("step " + std::to_string(k) + " at t = " +
                                    std::to_string(prev.t) + ": " + e.what(),
                                e.best_residual, e.iterations, e.best);
        }

        StepRecord rec;
        rec.k = static_cast<int>(k);
        rec.s = tau * static_cast<double>(k);
        rec.z = std::move(res.z);
        rec.lambda = res.lambda;
        rec.kkt = res.kkt;
        rec.objective = res.objective;
        const State dz = rec.z - prev.z;
        rec.dz_V = p.norm_V(dz);
        rec.dz_Z = p.norm_Z(dz);

        const double progress = tau - rec.dz_V;
        if (progress <= tau * 1e-12) {
            // zero physical-time progress; snap to an exact stall
            rec.dz_V = tau;
            rec.t = prev.t;
            rec.stalled = true;
        } else {
            rec.t = std::min(prev.t + progress, T);
            rec.stalled = false;
        }

        stall_run = rec.stalled ? stall_run + 1 : 0;
        traj.arc_length_Z += rec.dz_Z;
        traj.records.push_back(std::move(rec));

        const StepRecord& cur = traj.records.back();
        if (cur.t >= T) {
            if (traj.n_reach_T < 0) traj.n_reach_T = cur.k;
            if (p.is_locally_stable(T, cur.z, p.stability_tol(T))) break;
        }
        if (stall_run > guard) {
            throw StallLimitExceeded(p.name() + ": " + std::to_string(stall_run) +
                                         " consecutive stalls at t = " + std::to_string(cur.t),
                                     stall_run);
        }
        RIS_REQUIRE(k < kMaxRecords, p.name() + ": record limit hit before reaching the horizon");
    }

    traj.n_total = traj.records.back().k;
    if (traj.n_reach_T < 0) traj.n_reach_T = traj.n_total;
    return traj;
}

Trajectory run_global(const Problem& p, double tau, const RunOptions& opts)
{
    if (!(tau > 0.0)) throw InfeasibleTau(tau);
    check_initial_state(p, opts);

    const double T = p.horizon();
    Trajectory traj;
    traj.tau = tau;
    traj.records.push_back(initial_record(p));

    for (long k = 1;; ++k) {
        const StepRecord& prev = traj.records.back();
        SubproblemResult res = solve_global_step(p, prev.t, prev.z, opts.sub);

        StepRecord rec;
        rec.k = static_cast<int>(k);
        rec.s = tau * static_cast<double>(k);
        rec.z = std::move(res.z);
        rec.lambda = 0.0;
        rec.kkt = res.kkt;
        rec.objective = res.objective;
        const State dz = rec.z - prev.z;
        rec.dz_V = p.norm_V(dz);
        rec.dz_Z = p.norm_Z(dz);
        rec.t = std::min(prev.t + tau, T);
        rec.stalled = false;

        traj.arc_length_Z += rec.dz_Z;
        traj.records.push_back(std::move(rec));
        if (traj.records.back().t >= T) break;
        RIS_REQUIRE(k < kMaxRecords, p.name() + ": record limit hit before reaching the horizon");
    }

    traj.n_total = traj.records.back().k;
    traj.n_reach_T = traj.n_total;
    return traj;
}

PhysicalSolution filter_progress(const Trajectory& traj)
{
    const auto& recs = traj.records;
    RIS_REQUIRE(!recs.empty(), "empty trajectory");

    PhysicalSolution sol;
    sol.times.push_back(recs[0].t);
    sol.states.push_back(recs[0].z);

    auto push = [&sol](double t, const State& z) {
        if (!sol.times.empty() && t == sol.times.back()) {
            sol.states.back() = z; // collapse duplicates (terminal time) to the last state
        } else {
            sol.times.push_back(t);
            sol.states.push_back(z);
        }
    };

    for (int k = 1; k <= traj.n_reach_T && k < static_cast<int>(recs.size()); ++k) {
        if (recs[k].t > recs[k - 1].t) push(recs[k].t, recs[k].z);
    }
    push(recs[traj.n_total].t, recs[traj.n_total].z);

    if (sol.times.size() < 2) {
        throw DegenerateTrajectory("no physical-time progress in trajectory");
    }
    return sol;
}

State PhysicalSolution::evaluate(double t) const
{
    RIS_REQUIRE(times.size() >= 2, "interpolant needs at least two breakpoints");
    if (t < times.front() || t > times.back()) {
        throw OutOfRange("evaluation time " + std::to_string(t) + " outside [" +
                         std::to_string(times.front()) + ", " + std::to_string(times.back()) +
                         "]");
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    size_t hi = static_cast<size_t>(it - times.begin());
    if (hi >= times.size()) hi = times.size() - 1;
    if (hi == 0) hi = 1;
    const size_t lo = hi - 1;
    if (t == times[lo]) return states[lo];
    if (t == times[hi]) return states[hi];
    const double theta = (t - times[lo]) / (times[hi] - times[lo]);
    return states[lo] + theta * (states[hi] - states[lo]);
}

ArtificialInterpolant artificial_interpolants(const Trajectory& traj)
{
    ArtificialInterpolant out;
    out.tau = traj.tau;
    out.t_knots.reserve(traj.records.size());
    out.z_knots.reserve(traj.records.size());
    for (const auto& rec : traj.records) {
        out.t_knots.push_back(rec.t);
        out.z_knots.push_back(rec.z);
    }
    if (traj.n_reach_T >= 1 && traj.n_reach_T < static_cast<int>(traj.records.size())) {
        const auto& last = traj.records[traj.n_reach_T];
        const auto& before = traj.records[traj.n_reach_T - 1];
        out.last_interval_clamped = before.t + (traj.tau - last.dz_V) > last.t;
    }
    return out;
}

double ArtificialInterpolant::time_slope(int k) const
{
    RIS_REQUIRE(k >= 1 && k < static_cast<int>(t_knots.size()), "interval index out of range");
    return (t_knots[k] - t_knots[k - 1]) / tau;
}

double ArtificialInterpolant::state_speed_V(const Problem& p, int k) const
{
    RIS_REQUIRE(k >= 1 && k < static_cast<int>(z_knots.size()), "interval index out of range");
    return p.norm_V(z_knots[k] - z_knots[k - 1]) / tau;
}

std::pair<double, State> ArtificialInterpolant::evaluate(double s) const
{
    RIS_REQUIRE(s >= 0.0 && s <= s_end() * (1.0 + 1e-12), "artificial time out of range");
    const double x = s / tau;
    int k = static_cast<int>(x);
    k = std::min(k, static_cast<int>(t_knots.size()) - 2);
    const double theta = x - k;
    return {t_knots[k] + theta * (t_knots[k + 1] - t_knots[k]),
            z_knots[k] + theta * (z_knots[k + 1] - z_knots[k])};
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out)
{
    out << "k,s,t,lambda,dz_V,dz_Z,stalled,kkt_max,objective\n";
    char buf[512];
    for (const auto& rec : traj.records) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                      rec.k, rec.s, rec.t, rec.lambda, rec.dz_V, rec.dz_Z, rec.stalled ? 1 : 0,
                      rec.kkt.max(), rec.objective);
        out << buf;
    }
}

TrajectoryCheck check_trajectory(const Problem& p, const Trajectory& traj, bool global_scheme,
                                 bool expect_first_step_identity)
{
    TrajectoryCheck c;
    const double T = p.horizon();
    const auto& recs = traj.records;
    for (size_t k = 1; k < recs.size(); ++k) {
        const auto& prev = recs[k - 1];
        const auto& rec = recs[k];
        if (!rec.z.allFinite()) ++c.finite;
        if (rec.t < prev.t) ++c.monotonicity;
        const double expected_t = global_scheme ? std::min(prev.t + traj.tau, T)
                                                : std::min(prev.t + (traj.tau - rec.dz_V), T);
        if (rec.t != expected_t) ++c.time_update;
        const double tol = 100.0 * resolve_tol(p, prev.t, SolveOptions{});
        const double comp = global_scheme ? 0.0 : rec.lambda * (traj.tau - rec.dz_V);
        if (rec.lambda < 0.0 || std::abs(comp) > tol) ++c.multiplier;
        if (rec.kkt.max() > tol) ++c.kkt;
    }
    if (expect_first_step_identity && recs.size() >= 2 && traj.tau <= T &&
        p.validate_initial().ok()) {
        if (p.norm_Z(recs[1].z - recs[0].z) > 1e-10 || recs[1].t != traj.tau) ++c.first_step;
    }
    const auto& last = recs.back();
    if (!global_scheme &&
        !p.is_locally_stable(last.t, last.z, 10.0 * p.stability_tol(last.t))) {
        ++c.terminal_stable;
    }
    return c;
}

} // namespace ris
