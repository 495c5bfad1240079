#include "ris/subproblem.hpp"

#include "ris/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_set>
#include <vector>

namespace ris {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double grad1(const Problem& p, double t, double z)
{
    State s(1);
    s[0] = z;
    return p.gradient(t, s)[0];
}

double objective1(const Problem& p, double t, double z, double z_prev)
{
    State s(1);
    s[0] = z;
    State dz(1);
    dz[0] = z - z_prev;
    return p.energy(t, s) + p.dissipation(dz);
}

// Root of psi on [a,b] assuming psi(a) and psi(b) have opposite signs.
double bisect_root(const std::function<double(double)>& psi, double a, double b, double pa)
{
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double pm = psi(mid);
        if (pm == 0.0) return mid;
        if ((pm > 0.0) == (pa > 0.0)) {
            a = mid;
            pa = pm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

struct Candidate {
    double z;
    double obj;
    double move; // |z - z_prev|
};

// Exhaustive minimization of z -> I(t,z) + R(z - z_prev) over [lo, hi]:
// interval endpoints, the dissipation kink at z_prev, the energy kinks, and
// every stationary point of each smooth piece. exclude_prev removes z_prev
// from the candidate values (it stays a piece boundary).
Candidate minimize_piecewise_1d(const Problem& p, double t, double z_prev, double lo, double hi,
                                int& iterations, bool exclude_prev = false)
{
    std::vector<double> pts{lo, hi};
    if (z_prev > lo && z_prev < hi) pts.push_back(z_prev);
    for (double k : p.kink_points()) {
        if (k > lo && k < hi) pts.push_back(k);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::vector<double> candidates;
    for (double z : pts) {
        if (!(exclude_prev && z == z_prev)) candidates.push_back(z);
    }
    const int samples = 64;
    for (size_t seg = 0; seg + 1 < pts.size(); ++seg) {
        const double a = pts[seg];
        const double b = pts[seg + 1];
        if (!(b > a)) continue;
        const double sgn = (0.5 * (a + b) > z_prev) ? 1.0 : -1.0;
        auto psi = [&](double z) { return grad1(p, t, z) + sgn; };
        double x0 = a;
        double p0 = psi(x0);
        for (int i = 1; i <= samples; ++i) {
            const double x1 = a + (b - a) * i / samples;
            const double p1 = psi(x1);
            ++iterations;
            if (p0 == 0.0) {
                candidates.push_back(x0);
            } else if ((p0 > 0.0) != (p1 > 0.0)) {
                candidates.push_back(bisect_root(psi, x0, x1, p0));
            }
            x0 = x1;
            p0 = p1;
        }
        if (p0 == 0.0) candidates.push_back(x0);
    }

    Candidate best{z_prev, kInf, 0.0};
    bool have = false;
    for (double z : candidates) {
        if (z < lo || z > hi || !std::isfinite(z)) continue;
        const double obj = objective1(p, t, z, z_prev);
        if (!std::isfinite(obj)) continue;
        const Candidate c{z, obj, std::abs(z - z_prev)};
        if (!have) {
            best = c;
            have = true;
            continue;
        }
        const double tie = 1e-14 * (1.0 + std::abs(best.obj));
        if (c.obj < best.obj - tie) {
            best = c;
        } else if (c.obj <= best.obj + tie) {
            // deterministic tie-break: shortest move, then smaller state
            if (c.move < best.move || (c.move == best.move && c.z < best.z)) best = c;
        }
    }
    RIS_REQUIRE(have, "no finite candidate in 1d subproblem");
    return best;
}

SubproblemResult finish_1d(const Problem& p, double t_prev, const State& z_prev,
                           const Candidate& best, double tau, double tol, int iterations)
{
    SubproblemResult res;
    if (best.move == 0.0) {
        res.z = z_prev; // bit-exact when the previous state wins
    } else {
        res.z = State::Constant(1, best.z);
    }
    res.objective = best.obj;
    res.iterations = iterations;
    const double dzV = p.norm_V(res.z - z_prev);
    res.active = std::isfinite(tau) && dzV >= tau * (1.0 - 1e-12);
    res.lambda = res.active ? p.dist_to_stable(t_prev, res.z) / tau : 0.0;
    res.kkt = certify(p, t_prev, z_prev, res, tau);
    if (res.kkt.max() > tol) {
        throw NoConvergence("1d step residual " + std::to_string(res.kkt.max()) +
                                " above tolerance " + std::to_string(tol),
                            res.kkt.max(), iterations, res.z);
    }
    return res;
}

SubproblemResult solve_local_1d(const Problem& p, double t_prev, const State& z_prev, double tau,
                                double tol)
{
    int iterations = 0;
    const double zp = z_prev[0];
    Candidate best = minimize_piecewise_1d(p, t_prev, zp, zp - tau, zp + tau, iterations);
    if (best.move == 0.0 && p.dist_to_stable(t_prev, z_prev) > 0.5 * tol * tau) {
        // z_prev won the objective tie but is marginally unstable; the nearby
        // stationary point is the certifiable minimizer
        best = minimize_piecewise_1d(p, t_prev, zp, zp - tau, zp + tau, iterations, true);
    }
    return finish_1d(p, t_prev, z_prev, best, tau, tol, iterations);
}

SubproblemResult solve_global_1d(const Problem& p, double t, const State& z_prev, double tol)
{
    int iterations = 0;
    const double zp = z_prev[0];
    const double obj0 = objective1(p, t, zp, zp);
    double radius = 1.0;
    bool bracketed = false;
    for (int it = 0; it < 60; ++it) {
        if (objective1(p, t, zp - radius, zp) > obj0 + 1.0 &&
            objective1(p, t, zp + radius, zp) > obj0 + 1.0) {
            bracketed = true;
            break;
        }
        radius *= 2.0;
    }
    if (!bracketed) {
        throw Unbounded("global step: objective does not grow away from the current state");
    }
    radius *= 2.0; // margin against minima hiding just outside the bracket
    Candidate best = minimize_piecewise_1d(p, t, zp, zp - radius, zp + radius, iterations);
    if (best.move == 0.0 && p.dist_to_stable(t, z_prev) > 0.5 * tol) {
        best = minimize_piecewise_1d(p, t, zp, zp - radius, zp + radius, iterations, true);
    }
    return finish_1d(p, t, z_prev, best, kInf, tol, iterations);
}

// ---------------------------------------------------------------------------
// dim > 1: weighted-l1-regularized SPD quadratic
//
//   min_w 1/2 w^T H w + g0^T w + sum_i m_i |w_i|,   H = A + lambda diag(m).
//
// Primal-dual active set iteration; FISTA in the weighted metric as fallback.
// ---------------------------------------------------------------------------

struct InnerResult {
    Eigen::VectorXd w;
    int iterations = 0;
    bool converged = false;
};

double inner_residual(const Eigen::VectorXd& force, const Eigen::VectorXd& m,
                      const Eigen::VectorXd& w)
{
    // force = -(H w + g0) must lie in dR(w)
    double r = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] != 0.0) {
            r = std::max(r, std::abs(force[i] - m[i] * (w[i] > 0.0 ? 1.0 : -1.0)));
        } else {
            r = std::max(r, std::max(std::abs(force[i]) - m[i], 0.0));
        }
    }
    return r;
}

InnerResult fista_fallback(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& m,
                           const Eigen::VectorXd& g0, double tol, const Eigen::VectorXd& w0)
{
    const Eigen::Index n = m.size();
    // Lipschitz constant of the preconditioned gradient via power iteration
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    double L = 1.0;
    for (int it = 0; it < 50; ++it) {
        v = (H * v).cwiseQuotient(m);
        const double nv = v.norm();
        if (nv == 0.0) break;
        L = nv;
        v /= nv;
    }
    L *= 1.05;
    const double step = 1.0 / L;

    InnerResult out;
    out.w = w0;
    Eigen::VectorXd y = w0;
    double theta = 1.0;
    for (int it = 1; it <= 20000; ++it) {
        const Eigen::VectorXd grad = H * y + g0;
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double target = y[i] - step * grad[i] / m[i];
            const double mag = std::abs(target) - step;
            w[i] = mag > 0.0 ? (target > 0.0 ? mag : -mag) : 0.0;
        }
        const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        y = w + ((theta - 1.0) / theta_new) * (w - out.w);
        theta = theta_new;
        out.w = w;
        out.iterations = it;
        if (it % 8 == 0 || it == 1) {
            const double r = inner_residual(-(H * w + g0), m, w);
            if (r <= tol) {
                out.converged = true;
                return out;
            }
        }
    }
    out.converged = inner_residual(-(H * out.w + g0), m, out.w) <= tol;
    return out;
}

InnerResult solve_weighted_l1(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& m,
                              double lambda, const Eigen::VectorXd& g0, double tol, int max_iter,
                              const Eigen::VectorXd* warm)
{
    const Eigen::Index n = m.size();
    Eigen::SparseMatrix<double> H = A;
    if (lambda != 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) H.coeffRef(i, i) += lambda * m[i];
    }

    InnerResult out;
    out.w = warm ? *warm : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd xi = -(H * out.w + g0);

    std::vector<signed char> sets(n, 0), prev_sets(n, 2);
    std::unordered_set<size_t> seen;
    auto signature = [&]() {
        size_t h = 1469598103934665603ull;
        for (signed char s : sets) {
            h ^= static_cast<size_t>(s + 2);
            h *= 1099511628211ull;
        }
        return h;
    };

    for (int it = 1; it <= max_iter; ++it) {
        out.iterations = it;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double zeta = xi[i] + m[i] * out.w[i];
            sets[i] = zeta > m[i] ? 1 : (zeta < -m[i] ? -1 : 0);
        }
        if (sets == prev_sets) {
            out.converged = inner_residual(-(H * out.w + g0), m, out.w) <= tol;
            if (out.converged) return out;
        }
        if (!seen.insert(signature()).second && it > 1) break; // cycle
        prev_sets = sets;

        std::vector<int> free_idx;
        free_idx.reserve(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (sets[i] != 0) free_idx.push_back(static_cast<int>(i));
        }
        out.w.setZero();
        if (!free_idx.empty()) {
            const int nf = static_cast<int>(free_idx.size());
            std::vector<int> where(n, -1);
            for (int a = 0; a < nf; ++a) where[free_idx[a]] = a;

            std::vector<Eigen::Triplet<double>> trips;
            Eigen::VectorXd rhs(nf);
            for (int a = 0; a < nf; ++a) {
                const int i = free_idx[a];
                rhs[a] = -g0[i] - sets[i] * m[i];
                for (Eigen::SparseMatrix<double>::InnerIterator itc(H, i); itc; ++itc) {
                    const int j = static_cast<int>(itc.row());
                    if (where[j] >= 0) trips.emplace_back(where[j], a, itc.value());
                }
            }
            Eigen::SparseMatrix<double> Hff(nf, nf);
            Hff.setFromTriplets(trips.begin(), trips.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(Hff);
            if (chol.info() != Eigen::Success) break;
            const Eigen::VectorXd wf = chol.solve(rhs);
            if (chol.info() != Eigen::Success) break;
            for (int a = 0; a < nf; ++a) out.w[free_idx[a]] = wf[a];
        }
        const Eigen::VectorXd hw = H * out.w + g0;
        for (Eigen::Index i = 0; i < n; ++i) {
            xi[i] = sets[i] != 0 ? sets[i] * m[i] : -hw[i];
        }
    }

    InnerResult fb = fista_fallback(H, m, g0, tol, out.w);
    fb.iterations += out.iterations;
    return fb;
}

SubproblemResult solve_nd(const Problem& p, double t_prev, const State& z_prev, double tau,
                          double tol, int max_iter)
{
    const auto* lq = dynamic_cast<const LumpedQuadratic*>(&p);
    RIS_REQUIRE(lq != nullptr,
                "multi-dimensional steps require the lumped quadratic problem structure");
    const Eigen::SparseMatrix<double>& A = lq->stiffness();
    const Eigen::VectorXd& m = p.dissipation_weights();
    const Eigen::VectorXd g0 = A * z_prev - lq->load(t_prev);

    int iterations = 0;
    InnerResult inner = solve_weighted_l1(A, m, 0.0, g0, tol, max_iter, nullptr);
    iterations += inner.iterations;
    if (!inner.converged) {
        throw NoConvergence("inner solver did not reach tolerance",
                            inner_residual(-(A * inner.w + g0), m, inner.w), iterations,
                            z_prev + inner.w);
    }

    double lambda = 0.0;
    bool ball_active = false;
    double dzV = p.norm_V(inner.w);
    if (std::isfinite(tau) && dzV > tau) {
        ball_active = true;
        // ball active: scalar root find on psi(lambda) = ||w(lambda)||_V - tau
        double lo = 0.0;
        double hi = std::max(1.0, p.yield_distance(-g0) / tau);
        Eigen::VectorXd warm = inner.w;
        auto eval = [&](double lam) {
            inner = solve_weighted_l1(A, m, lam, g0, tol, max_iter, &warm);
            iterations += inner.iterations;
            if (!inner.converged) {
                throw NoConvergence("inner solver did not reach tolerance at multiplier " +
                                        std::to_string(lam),
                                    0.0, iterations, z_prev + inner.w);
            }
            warm = inner.w;
            return p.norm_V(inner.w) - tau;
        };
        int doublings = 0;
        while (eval(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > 80) {
                throw NoConvergence("ball multiplier bracket failed", 0.0, iterations);
            }
        }
        while (hi - lo > 1e-12 * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            if (eval(mid) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lambda = 0.5 * (lo + hi);
        const double psi = eval(lambda);
        dzV = tau + psi;
    } else {
        dzV = p.norm_V(inner.w);
    }

    SubproblemResult res;
    res.z = z_prev + inner.w;
    res.lambda = lambda;
    res.active = ball_active || (std::isfinite(tau) && dzV >= tau * (1.0 - 1e-12));
    res.iterations = iterations;
    res.objective = p.energy(t_prev, res.z) + p.dissipation(inner.w);
    res.kkt = certify(p, t_prev, z_prev, res, tau);
    if (res.kkt.max() > tol) {
        throw NoConvergence("step residual " + std::to_string(res.kkt.max()) +
                                " above tolerance " + std::to_string(tol),
                            res.kkt.max(), iterations, res.z);
    }
    return res;
}

} // namespace

double resolve_tol(const Problem& p, double t, const SolveOptions& opts)
{
    if (opts.tol > 0.0) return opts.tol;
    return p.dim() == 1 ? 1e-11 : 1e-9 * kkt_scale(p, t);
}

SubproblemResult solve_local_step(const Problem& p, double t_prev, const State& z_prev,
                                  double tau, const SolveOptions& opts)
{
    if (!(tau > 0.0)) throw InfeasibleTau(tau);
    RIS_REQUIRE(z_prev.allFinite(), "previous state must be finite");
    const double tol = resolve_tol(p, t_prev, opts);
    if (p.dim() == 1) return solve_local_1d(p, t_prev, z_prev, tau, tol);
    return solve_nd(p, t_prev, z_prev, tau, tol, opts.max_iterations);
}

SubproblemResult solve_global_step(const Problem& p, double t, const State& z_prev,
                                   const SolveOptions& opts)
{
    RIS_REQUIRE(z_prev.allFinite(), "previous state must be finite");
    const double tol = resolve_tol(p, t, opts);
    if (p.dim() == 1) return solve_global_1d(p, t, z_prev, tol);
    return solve_nd(p, t, z_prev, kInf, tol, opts.max_iterations);
}

KktResiduals certify(const Problem& p, double t_prev, const State& z_prev,
                     const SubproblemResult& result, double tau)
{
    const State dz = result.z - z_prev;
    const double dzV = p.norm_V(dz);
    const DualVec g = p.gradient(t_prev, result.z);
    const double dist = p.yield_distance(-g);
    const double diss = p.dissipation(dz);
    const bool constrained = std::isfinite(tau);

    KktResiduals r;
    r.complementarity = constrained ? std::abs(result.lambda * (dzV - tau)) : 0.0;
    r.lambda_dist = constrained ? std::abs(result.lambda - dist / tau) : dist;
    r.energy_identity =
        std::abs(diss + (constrained ? tau * dist : 0.0) - (-g).dot(dz));

    const auto& m = p.dissipation_weights();
    const DualVec eta = result.lambda * m.cwiseProduct(dz) + g;
    double sub = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        sub = std::max(sub, std::abs(eta[i]) - m[i]);
    }
    sub = std::max(sub, -eta.dot(dz) - diss);
    r.subgradient = std::max(sub, 0.0);
    return r;
}

} // namespace ris
