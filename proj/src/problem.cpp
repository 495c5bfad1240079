#include "ris/problem.hpp"

#include "ris/errors.hpp"

#include <cmath>

namespace ris {

double Problem::dissipation(const State& v) const
{
    const auto& w = dissipation_weights();
    RIS_REQUIRE(v.size() == w.size(), "dissipation: dimension mismatch");
    return w.cwiseProduct(v.cwiseAbs()).sum();
}

double Problem::norm_V(const State& v) const
{
    const auto& w = dissipation_weights();
    RIS_REQUIRE(v.size() == w.size(), "norm_V: dimension mismatch");
    return std::sqrt(w.cwiseProduct(v.cwiseAbs2()).sum());
}

double Problem::dual_norm_V(const DualVec& xi) const
{
    const auto& w = dissipation_weights();
    RIS_REQUIRE(xi.size() == w.size(), "dual_norm_V: dimension mismatch");
    return std::sqrt(xi.cwiseAbs2().cwiseQuotient(w).sum());
}

double Problem::yield_distance(const DualVec& xi) const
{
    const auto& w = dissipation_weights();
    RIS_REQUIRE(xi.size() == w.size(), "yield_distance: dimension mismatch");
    // separable box projection in the weighted norm: clip each component
    double acc = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const double excess = std::max(std::abs(xi[i]) - w[i], 0.0);
        acc += excess * excess / w[i];
    }
    return std::sqrt(acc);
}

double Problem::dist_to_stable(double t, const State& z) const
{
    return yield_distance(-gradient(t, z));
}

bool Problem::is_locally_stable(double t, const State& z, double tol) const
{
    return dist_to_stable(t, z) <= tol;
}

double Problem::gamma_measure(double t, const State& z1, const State& z2) const
{
    return (gradient(t, z1) - gradient(t, z2)).dot(z1 - z2);
}

StabilityReport Problem::validate_initial(double tol) const
{
    return StabilityReport{dist_to_stable(0.0, initial_state()), tol};
}

double kkt_scale(const Problem& p, double t)
{
    if (p.dim() == 1) return 1.0;
    if (const auto* lq = dynamic_cast<const LumpedQuadratic*>(&p)) {
        return 1.0 + p.dual_norm_V(lq->load(t));
    }
    return 1.0;
}

} // namespace ris
