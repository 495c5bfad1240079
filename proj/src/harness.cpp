#include "ris/harness.hpp"

#include "ris/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <set>
#include <thread>

namespace ris {

namespace {

constexpr double kLocal1dTrustedEnd = 1.9;

double norm_of(const Problem& p, const State& v, NormKind kind)
{
    return kind == NormKind::Z ? p.norm_Z(v) : p.norm_V(v);
}

std::vector<double> sampling_grid(double t_lo, double t_hi, const std::vector<double>& bp_a,
                                  const std::vector<double>& bp_b)
{
    std::set<double> grid;
    const int n_uniform = 1000;
    for (int i = 0; i < n_uniform; ++i) {
        grid.insert(t_lo + (t_hi - t_lo) * i / (n_uniform - 1));
    }
    for (double t : bp_a) {
        if (t >= t_lo && t <= t_hi) grid.insert(t);
    }
    for (double t : bp_b) {
        if (t >= t_lo && t <= t_hi) grid.insert(t);
    }
    return {grid.begin(), grid.end()};
}

} // namespace

std::string to_string(Scheme s) { return s == Scheme::Local ? "local" : "global"; }

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double sup_error(const Problem& p, const PhysicalSolution& a, const PhysicalSolution& b,
                 NormKind norm, double t_lo, double t_hi)
{
    const auto grid = sampling_grid(t_lo, t_hi, a.times, b.times);
    double worst = 0.0;
    for (double t : grid) {
        worst = std::max(worst, norm_of(p, a.evaluate(t) - b.evaluate(t), norm));
    }
    return worst;
}

double sup_error(const Problem& p, const PhysicalSolution& a, const ExactSolution& b,
                 NormKind norm, double t_lo, double t_hi)
{
    const auto grid = sampling_grid(t_lo, t_hi, a.times, b.knots);
    double worst = 0.0;
    for (double t : grid) {
        worst = std::max(worst, norm_of(p, a.evaluate(t) - b.eval(t), norm));
    }
    return worst;
}

double sup_error(const Problem& p, const PhysicalSolution& a, const Reference& ref,
                 NormKind norm)
{
    double worst = 0.0;
    for (const auto& seg : ref.segments) {
        if (std::holds_alternative<ExactSolution>(seg.sol)) {
            worst = std::max(
                worst, sup_error(p, a, std::get<ExactSolution>(seg.sol), norm, seg.t_lo, seg.t_hi));
        } else {
            const auto& fine = *std::get<std::shared_ptr<const PhysicalSolution>>(seg.sol);
            worst = std::max(worst, sup_error(p, a, fine, norm, seg.t_lo, seg.t_hi));
        }
    }
    return worst;
}

Reference analytic_reference(const Problem& p)
{
    Reference ref;
    if (const auto* pde = dynamic_cast<const PdeProblem*>(&p)) {
        ref.descriptor = "analytic[0,3]";
        ref.segments.push_back({0.0, p.horizon(), pde_exact(*pde)});
        return ref;
    }
    if (p.name() == "local1d") {
        ref.descriptor = "analytic[0,1.9]";
        ref.segments.push_back({0.0, kLocal1dTrustedEnd, locally_convex_exact()});
        return ref;
    }
    throw BadConfig("no trusted closed-form reference for problem '" + p.name() + "'");
}

Reference self_reference(const Problem& p, double tau_ref)
{
    Reference ref;
    ref.descriptor = "self[tau_ref=" + fmt17(tau_ref) + "]";
    ref.segments.push_back({0.0, p.horizon(), reference_solve(p, tau_ref)});
    return ref;
}

Reference combined_reference(const Problem& p, double tau_ref)
{
    if (dynamic_cast<const PdeProblem*>(&p) != nullptr) return analytic_reference(p);
    if (p.name() == "local1d") {
        Reference ref = analytic_reference(p);
        ref.descriptor += "+self[tau_ref=" + fmt17(tau_ref) + "]";
        ref.segments.push_back({kLocal1dTrustedEnd, p.horizon(), reference_solve(p, tau_ref)});
        return ref;
    }
    return self_reference(p, tau_ref);
}

std::vector<std::optional<double>> eoc_sequence(const std::vector<double>& taus,
                                                const std::vector<double>& errors)
{
    RIS_REQUIRE(taus.size() == errors.size(), "eoc: size mismatch");
    std::vector<std::optional<double>> eoc(taus.size());
    for (size_t i = 1; i < taus.size(); ++i) {
        if (errors[i] > 0.0 && errors[i - 1] > 0.0 && taus[i] != taus[i - 1]) {
            eoc[i] = std::log(errors[i - 1] / errors[i]) / std::log(taus[i - 1] / taus[i]);
        }
    }
    return eoc;
}

int study_thread_cap()
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RIS_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return std::min(static_cast<unsigned>(v), hw);
    }
    return static_cast<int>(hw);
}

int ConvergenceReport::total_invariant_violations() const
{
    int total = 0;
    for (const auto& row : rows) total += row.invariant_violations;
    return total;
}

ConvergenceReport run_convergence_study(const Problem& p, Scheme scheme,
                                        const std::vector<double>& taus, const Reference& ref,
                                        const StudyOptions& opts)
{
    RIS_REQUIRE(!taus.empty(), "study needs at least one step size");
    for (size_t i = 1; i < taus.size(); ++i) {
        RIS_REQUIRE(taus[i] < taus[i - 1], "step sizes must be strictly decreasing");
    }

    ConvergenceReport report;
    report.problem = p.name();
    report.scheme = to_string(scheme);
    report.reference = ref.descriptor;
    report.rows.resize(taus.size());

    std::vector<double> state_norms(taus.size(), 0.0);
    auto run_one = [&](size_t i) {
        StudyRow& row = report.rows[i];
        row.tau = taus[i];
        const auto start = std::chrono::steady_clock::now();
        try {
            const Trajectory traj = scheme == Scheme::Local ? run_local(p, taus[i], opts.run)
                                                            : run_global(p, taus[i], opts.run);
            const PhysicalSolution sol = filter_progress(traj);
            row.sup_err_Z = sup_error(p, sol, ref, NormKind::Z);
            row.max_stall = traj.max_stall_run();
            row.arc_length_Z = traj.arc_length_Z;
            row.max_kkt = traj.max_kkt_relative(p);
            row.invariant_violations =
                check_trajectory(p, traj, scheme == Scheme::Global).total();
            state_norms[i] = traj.max_state_norm_Z(p);
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            row.sup_err_Z = std::nan("");
            row.max_kkt = std::nan("");
            row.arc_length_Z = std::nan("");
        }
        row.walltime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    const int cap = opts.threads > 0 ? opts.threads : study_thread_cap();
    if (cap <= 1 || taus.size() == 1) {
        for (size_t i = 0; i < taus.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= taus.size()) return;
                run_one(i);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min<size_t>(cap, taus.size());
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<double> errors(taus.size());
    for (size_t i = 0; i < taus.size(); ++i) {
        errors[i] = report.rows[i].failed ? 0.0 : report.rows[i].sup_err_Z;
    }
    const auto eoc = eoc_sequence(taus, errors);
    for (size_t i = 0; i < taus.size(); ++i) {
        if (!report.rows[i].failed) report.rows[i].eoc = eoc[i];
    }
    report.max_state_norm_Z = *std::max_element(state_norms.begin(), state_norms.end());
    return report;
}

void write_report_csv(const ConvergenceReport& report, std::ostream& out)
{
    out << "tau,sup_err_Z,eoc,walltime_s,max_stall,arc_length_Z,max_kkt\n";
    for (const auto& row : report.rows) {
        out << fmt17(row.tau) << ',' << fmt17(row.sup_err_Z) << ','
            << (row.eoc ? fmt17(*row.eoc) : std::string()) << ',' << fmt17(row.walltime_s) << ','
            << row.max_stall << ',' << fmt17(row.arc_length_Z) << ',' << fmt17(row.max_kkt)
            << '\n';
    }
}

void write_plot_csv(const ConvergenceReport& report, std::ostream& out)
{
    out << "tau,error,slope1\n";
    double e0 = 0.0;
    double tau0 = 1.0;
    bool anchored = false;
    for (const auto& row : report.rows) {
        if (!anchored && !row.failed) {
            e0 = row.sup_err_Z;
            tau0 = row.tau;
            anchored = true;
        }
        out << fmt17(row.tau) << ',' << fmt17(row.sup_err_Z) << ','
            << fmt17(e0 * row.tau / tau0) << '\n';
    }
}

SchemeComparison compare_schemes(const Problem& p, double tau, const Reference& ref,
                                 const RunOptions& opts)
{
    SchemeComparison cmp;
    cmp.tau = tau;
    const Trajectory local_traj = run_local(p, tau, opts);
    const Trajectory global_traj = run_global(p, tau, opts);
    cmp.local_max_kkt = local_traj.max_kkt_relative(p);
    cmp.global_max_kkt = global_traj.max_kkt_relative(p);
    const PhysicalSolution local = filter_progress(local_traj);
    const PhysicalSolution global = filter_progress(global_traj);
    cmp.local_vs_ref = sup_error(p, local, ref, NormKind::Z);
    cmp.global_vs_ref = sup_error(p, global, ref, NormKind::Z);
    cmp.local_vs_global = sup_error(p, local, global, NormKind::Z, 0.0, p.horizon());
    return cmp;
}

void write_comparison_csv(const SchemeComparison& cmp, std::ostream& out)
{
    out << "tau,local_vs_ref,global_vs_ref,local_vs_global\n";
    out << fmt17(cmp.tau) << ',' << fmt17(cmp.local_vs_ref) << ',' << fmt17(cmp.global_vs_ref)
        << ',' << fmt17(cmp.local_vs_global) << '\n';
}

std::vector<BifurcationRow> bifurcation_scan(const Problem& p, const std::vector<double>& taus,
                                             const RunOptions& opts)
{
    RIS_REQUIRE(p.dim() == 1, "bifurcation scan needs a scalar problem");
    const double branch1 = -1.0 / 3.0;
    const double branch2 = (1.0 + std::sqrt(2.0)) / 3.0;

    std::vector<BifurcationRow> rows;
    rows.reserve(taus.size());
    for (double tau : taus) {
        const Trajectory traj = run_local(p, tau, opts);
        BifurcationRow row;
        row.tau = tau;
        row.terminal_z = traj.records.back().z[0];
        if (std::abs(row.terminal_z - branch1) <= 0.02) {
            row.branch = 1;
        } else if (std::abs(row.terminal_z - branch2) <= 0.02) {
            row.branch = 2;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_bifurcation_csv(const std::vector<BifurcationRow>& rows, std::ostream& out)
{
    out << "tau,terminal_z,branch\n";
    for (const auto& row : rows) {
        out << fmt17(row.tau) << ',' << fmt17(row.terminal_z) << ',' << row.branch << '\n';
    }
}

void write_stability_csv(const Problem& p, const std::vector<double>& t_grid, double z_lo,
                         double z_hi, double z_step, std::ostream& out)
{
    out << "t,z_lo,z_hi\n";
    for (double t : t_grid) {
        for (const auto& iv : stability_set_1d(p, t, z_lo, z_hi, z_step)) {
            out << fmt17(t) << ',' << fmt17(iv.first) << ',' << fmt17(iv.second) << '\n';
        }
    }
}

} // namespace ris
