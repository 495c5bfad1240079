#pragma once

#include "ris/problem.hpp"

#include <algorithm>

namespace ris {

/// Residuals of the discrete optimality system of one accepted step, all >= 0:
///   complementarity   |lambda * (||dz||_V - tau)|
///   lambda_dist       |lambda - dist_{V*}(-D_z I, dR(0)) / tau|
///   energy_identity   |R(dz) + tau * dist - <-D_z I, dz>|
///   subgradient       worst violation of R(v) >= <-(lambda J_V dz + D_z I), v>
///                     over v in {+-e_i} and v = dz
struct KktResiduals {
    double complementarity = 0.0;
    double lambda_dist = 0.0;
    double energy_identity = 0.0;
    double subgradient = 0.0;

    double max() const
    {
        return std::max({complementarity, lambda_dist, energy_identity, subgradient});
    }
};

struct SubproblemResult {
    State z;
    double lambda = 0.0;
    bool active = false;  // ||z - z_prev||_V == tau (within tolerance)
    KktResiduals kkt;
    int iterations = 0;
    double objective = 0.0;  // I(t_prev, z) + R(z - z_prev)
};

struct SolveOptions {
    /// Residual acceptance tolerance; <= 0 selects the per-problem default
    /// (1e-11 for scalar problems, 1e-9 * kkt_scale for discretized ones).
    double tol = 0.0;
    int max_iterations = 200;
};

/// Resolved acceptance tolerance for a step at time t.
double resolve_tol(const Problem& p, double t, const SolveOptions& opts);

/// One incremental step: minimize I(t_prev, z) + R(z - z_prev) subject to
/// ||z - z_prev||_V <= tau. Scalar problems are solved by exhaustive candidate
/// enumeration over the smooth pieces (exact up to root tolerance, so the
/// result is a global minimizer of the subproblem even for nonconvex F);
/// larger problems by a primal-dual active-set method with an outer scalar
/// root find on the ball multiplier.
SubproblemResult solve_local_step(const Problem& p, double t_prev, const State& z_prev,
                                  double tau, const SolveOptions& opts = {});

/// Same without the ball constraint; lambda = 0 and active = false always.
SubproblemResult solve_global_step(const Problem& p, double t, const State& z_prev,
                                   const SolveOptions& opts = {});

/// Recompute all residuals from (z_prev, z, lambda) alone, independently of
/// any solver state. Pass tau = infinity for unconstrained steps: the
/// complementarity residual is then 0 and lambda_dist degenerates to dist.
KktResiduals certify(const Problem& p, double t_prev, const State& z_prev,
                     const SubproblemResult& result, double tau);

} // namespace ris
