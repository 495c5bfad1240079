#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

namespace ris {

using State = Eigen::VectorXd;
using DualVec = Eigen::VectorXd;

/// Result of the initial-state stability check.
struct StabilityReport {
    double dist = 0.0;
    double tol = 0.0;
    bool ok() const { return dist <= tol; }
};

/// Abstract rate-independent problem
///
///     I(t,z) = 1/2 <A z, z> + F(z) - <l(t), z>,   R(v) = sum_i w_i |v_i|,
///
/// on coefficient vectors with the Euclidean dual pairing <xi, v> = sum_i xi_i v_i.
/// The dissipation weights w double as the diagonal of the (lumped) V inner
/// product, so ||v||_V = sqrt(sum_i w_i v_i^2) and ||xi||_V* = sqrt(sum_i xi_i^2 / w_i).
/// Instances are immutable after construction; all operations are pure.
class Problem {
public:
    virtual ~Problem() = default;

    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual double horizon() const = 0;
    virtual const State& initial_state() const = 0;

    virtual double energy(double t, const State& z) const = 0;
    virtual DualVec gradient(double t, const State& z) const = 0;
    virtual DualVec hessian_apply(double t, const State& z, const State& v) const = 0;

    /// Weights of R(v) = sum_i w_i |v_i|; all entries positive.
    virtual const Eigen::VectorXd& dissipation_weights() const = 0;

    virtual double norm_Z(const State& v) const = 0;

    /// z-values where the energy is only piecewise smooth (scalar problems only).
    virtual std::vector<double> kink_points() const { return {}; }

    /// Uniform convexity modulus, when known. Used only by invariant checks.
    virtual std::optional<double> kappa_hint() const { return std::nullopt; }
    /// Lipschitz bound of t -> l(t) in the V* norm, when known.
    virtual std::optional<double> lip_load_hint() const { return std::nullopt; }

    /// Tolerance for stability tests; scalar problems use an absolute 1e-10,
    /// discretized problems scale with the load.
    virtual double stability_tol(double t) const { (void)t; return 1e-10; }

    double dissipation(const State& v) const;
    double norm_V(const State& v) const;
    double dual_norm_V(const DualVec& xi) const;

    /// V*-distance of xi to the set {eta : |eta_i| <= w_i} = dR(0).
    double yield_distance(const DualVec& xi) const;

    /// dist_{V*}( -D_z I(t,z), dR(0) ); zero iff z is locally stable at t.
    double dist_to_stable(double t, const State& z) const;
    bool is_locally_stable(double t, const State& z, double tol) const;

    /// <D_z I(t,z1) - D_z I(t,z2), z1 - z2>
    double gamma_measure(double t, const State& z1, const State& z2) const;

    StabilityReport validate_initial(double tol) const;
    StabilityReport validate_initial() const { return validate_initial(stability_tol(0.0)); }
};

/// Mixin for problems whose energy is 1/2 z^T A z - <load(t), z> with sparse SPD A.
/// The ball-constrained solver relies on this structure for dim > 1.
class LumpedQuadratic {
public:
    virtual ~LumpedQuadratic() = default;
    virtual const Eigen::SparseMatrix<double>& stiffness() const = 0;
    virtual DualVec load(double t) const = 0;
};

/// Scale used to interpret "relative" KKT tolerances: 1 for scalar problems,
/// 1 + ||l(t)||_V* for load-driven discretizations.
double kkt_scale(const Problem& p, double t);

} // namespace ris
