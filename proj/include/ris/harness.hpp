#pragma once

#include "ris/gallery.hpp"
#include "ris/stepper.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ris {

enum class NormKind { Z, V };
enum class Scheme { Local, Global };

std::string to_string(Scheme s);

/// Reference trajectory assembled from trusted pieces: closed-form solutions
/// on their trusted windows, fine-step self-reference runs elsewhere.
struct ReferenceSegment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::variant<ExactSolution, std::shared_ptr<const PhysicalSolution>> sol;
};

struct Reference {
    std::string descriptor;
    std::vector<ReferenceSegment> segments;
};

/// Closed-form reference where one is trusted: the full horizon for the
/// Laplace problem, [0, 1.9] for the locally convex problem. Throws BadConfig
/// for problems without a trusted closed form.
Reference analytic_reference(const Problem& p);

/// Fine-step self-reference over the full horizon.
Reference self_reference(const Problem& p, double tau_ref);

/// Analytic segments where trusted, fine-step fill-in for the rest.
Reference combined_reference(const Problem& p, double tau_ref);

/// Sup over the sampling grid (1000 uniform times in the window plus every
/// breakpoint/knot of both operands) of the norm of the difference.
double sup_error(const Problem& p, const PhysicalSolution& a, const PhysicalSolution& b,
                 NormKind norm, double t_lo, double t_hi);
double sup_error(const Problem& p, const PhysicalSolution& a, const ExactSolution& b,
                 NormKind norm, double t_lo, double t_hi);
double sup_error(const Problem& p, const PhysicalSolution& a, const Reference& ref,
                 NormKind norm);

/// eoc_i = log(e_{i-1}/e_i) / log(tau_{i-1}/tau_i); undefined for the first entry.
std::vector<std::optional<double>> eoc_sequence(const std::vector<double>& taus,
                                                const std::vector<double>& errors);

struct StudyRow {
    double tau = 0.0;
    double sup_err_Z = 0.0;
    std::optional<double> eoc;
    double walltime_s = 0.0;
    int max_stall = 0;
    double arc_length_Z = 0.0;
    double max_kkt = 0.0; // relative to kkt_scale
    bool failed = false;
    std::string error;
    int invariant_violations = 0;
};

struct ConvergenceReport {
    std::string problem;
    std::string scheme;
    std::string reference;
    std::vector<StudyRow> rows;
    double max_state_norm_Z = 0.0;

    int total_invariant_violations() const;
};

struct StudyOptions {
    RunOptions run;
    /// Parallel runs across tau values; <=0 reads RIS_THREADS (default: cores).
    int threads = 0;
};

ConvergenceReport run_convergence_study(const Problem& p, Scheme scheme,
                                        const std::vector<double>& taus, const Reference& ref,
                                        const StudyOptions& opts = {});

/// CSV schema: tau,sup_err_Z,eoc,walltime_s,max_stall,arc_length_Z,max_kkt.
/// All columns except walltime_s are deterministic for a fixed config.
void write_report_csv(const ConvergenceReport& report, std::ostream& out);

/// Plot-ready data: tau,error plus a first-order guide line anchored at the
/// first row (slope1 = e_0 * tau / tau_0).
void write_plot_csv(const ConvergenceReport& report, std::ostream& out);

struct SchemeComparison {
    double tau = 0.0;
    double local_vs_ref = 0.0;
    double global_vs_ref = 0.0;
    double local_vs_global = 0.0;
    double local_max_kkt = 0.0;  // relative certification residuals of the runs
    double global_max_kkt = 0.0;
};

SchemeComparison compare_schemes(const Problem& p, double tau, const Reference& ref,
                                 const RunOptions& opts = {});
void write_comparison_csv(const SchemeComparison& cmp, std::ostream& out);

struct BifurcationRow {
    double tau = 0.0;
    double terminal_z = 0.0;
    int branch = 0; // 1 = stayed, 2 = jumped, 0 = unclassified
};

/// Terminal-state classification of the nonconvex benchmark per step size:
/// branch 1 within 0.02 of -1/3, branch 2 within 0.02 of (1+sqrt(2))/3.
std::vector<BifurcationRow> bifurcation_scan(const Problem& p, const std::vector<double>& taus,
                                             const RunOptions& opts = {});
void write_bifurcation_csv(const std::vector<BifurcationRow>& rows, std::ostream& out);

/// Stability intervals over a time grid; CSV schema: t,z_lo,z_hi.
void write_stability_csv(const Problem& p, const std::vector<double>& t_grid, double z_lo,
                         double z_hi, double z_step, std::ostream& out);

/// Thread cap from RIS_THREADS, clamped to [1, hardware_concurrency].
int study_thread_cap();

std::string fmt17(double v);

} // namespace ris
