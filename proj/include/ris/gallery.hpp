#pragma once

#include "ris/fem.hpp"
#include "ris/problem.hpp"
#include "ris/stepper.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace ris {

/// Closed-form reference trajectory t -> z(t) on [t_begin, t_end];
/// knots list the junction times of the piecewise definition.
struct ExactSolution {
    std::string tag;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> knots;
    std::function<State(double)> eval;
};

/// Scalar problems I(t,z) = 1/2 z^2 + F(z) - l(t) z with the even piecewise
/// cubic F(z) = 2|z|^3 - 5/2 z^2 + 1 and R(v) = |v|.
class Cubic1dProblem : public Problem {
public:
    Cubic1dProblem(std::string name, std::function<double(double)> load, double T, double z0,
                   std::optional<double> kappa = std::nullopt,
                   std::optional<double> lip = std::nullopt);

    std::string name() const override { return m_name; }
    int dim() const override { return 1; }
    double horizon() const override { return m_T; }
    const State& initial_state() const override { return m_z0; }

    double energy(double t, const State& z) const override;
    DualVec gradient(double t, const State& z) const override;
    DualVec hessian_apply(double t, const State& z, const State& v) const override;
    const Eigen::VectorXd& dissipation_weights() const override { return m_weights; }
    double norm_Z(const State& v) const override { return std::abs(v[0]); }
    std::vector<double> kink_points() const override { return {0.0}; }
    std::optional<double> kappa_hint() const override { return m_kappa; }
    std::optional<double> lip_load_hint() const override { return m_lip; }

    double load(double t) const { return m_load(t); }

private:
    std::string m_name;
    std::function<double(double)> m_load;
    double m_T;
    State m_z0;
    Eigen::VectorXd m_weights;
    std::optional<double> m_kappa;
    std::optional<double> m_lip;
};

/// Laplace problem on the unit square with the weighted-l1 dissipation:
/// Z-norm is the energy norm sqrt(z^T A z), V the lumped L2 norm.
class PdeProblem : public Problem, public LumpedQuadratic {
public:
    explicit PdeProblem(int n);

    std::string name() const override { return m_name; }
    int dim() const override { return m_mesh.n_nodes; }
    double horizon() const override { return 3.0; }
    const State& initial_state() const override { return m_z0; }

    double energy(double t, const State& z) const override;
    DualVec gradient(double t, const State& z) const override;
    DualVec hessian_apply(double t, const State& z, const State& v) const override;
    const Eigen::VectorXd& dissipation_weights() const override { return m_mass; }
    double norm_Z(const State& v) const override;
    std::optional<double> kappa_hint() const override { return 1.0; }
    std::optional<double> lip_load_hint() const override { return m_lip; }
    double stability_tol(double t) const override;

    const Eigen::SparseMatrix<double>& stiffness() const override { return m_A; }
    DualVec load(double t) const override;

    const fem::Mesh& mesh() const { return m_mesh; }

private:
    std::string m_name;
    fem::Mesh m_mesh;
    Eigen::SparseMatrix<double> m_A;
    Eigen::VectorXd m_mass;
    State m_z0;
    double m_lip;
};

/// Nonconvex two-branch benchmark: l(t) = -24 (t - 1/4)^2 + 5/3, T = 1/2.
std::shared_ptr<Cubic1dProblem> counterexample_problem(double z0 = -1.0 / 3.0);
/// The two rate-independent evolutions this problem admits from z0 = -1/3.
std::pair<ExactSolution, ExactSolution> counterexample_branches();

/// Locally convex benchmark: l(t) = -1/2 (t - 3/2)^2 + 3/2, z0 = -2/3, T = 3.
std::shared_ptr<Cubic1dProblem> locally_convex_problem();
ExactSolution locally_convex_exact();

std::shared_ptr<PdeProblem> pde_problem(int n);
ExactSolution pde_exact(const PdeProblem& p);

/// Factory by CLI tag: counter1d | local1d | pde.
std::shared_ptr<Problem> make_problem(const std::string& tag, int mesh_n = 32);

/// Connected components of {z in [z_lo, z_hi] : dist_to_stable(p,t,z) = 0},
/// scanned with the given step and endpoint-refined by bisection to 1e-10.
/// Components narrower than the scan step can be missed.
std::vector<std::pair<double, double>> stability_set_1d(const Problem& p, double t, double z_lo,
                                                        double z_hi, double step = 1e-3);

/// Fine-step self-reference run (local scheme + progress filter), cached by
/// (problem name, tau_ref).
std::shared_ptr<const PhysicalSolution> reference_solve(const Problem& p, double tau_ref);

} // namespace ris
