#include "ris/gallery.hpp"

#include "ris/errors.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

namespace ris {

namespace {

// F(z) = 2|z|^3 - 5/2 z^2 + 1; F' and F'' are continuous across z = 0.
double cubic_F(double z) { return 2.0 * std::abs(z) * z * z - 2.5 * z * z + 1.0; }
double cubic_dF(double z) { return 6.0 * std::abs(z) * z - 5.0 * z; }
double cubic_ddF(double z) { return 12.0 * std::abs(z) - 5.0; }

} // namespace

Cubic1dProblem::Cubic1dProblem(std::string name, std::function<double(double)> load, double T,
                               double z0, std::optional<double> kappa, std::optional<double> lip)
    : m_name(std::move(name)),
      m_load(std::move(load)),
      m_T(T),
      m_z0(State::Constant(1, z0)),
      m_weights(Eigen::VectorXd::Ones(1)),
      m_kappa(kappa),
      m_lip(lip)
{
}

double Cubic1dProblem::energy(double t, const State& z) const
{
    const double x = z[0];
    return 0.5 * x * x + cubic_F(x) - m_load(t) * x;
}

DualVec Cubic1dProblem::gradient(double t, const State& z) const
{
    const double x = z[0];
    return DualVec::Constant(1, x + cubic_dF(x) - m_load(t));
}

DualVec Cubic1dProblem::hessian_apply(double t, const State& z, const State& v) const
{
    (void)t;
    return DualVec::Constant(1, (1.0 + cubic_ddF(z[0])) * v[0]);
}

std::shared_ptr<Cubic1dProblem> counterexample_problem(double z0)
{
    std::string name = "counter1d";
    if (z0 != -1.0 / 3.0) name += "[z0=" + std::to_string(z0) + "]";
    return std::make_shared<Cubic1dProblem>(
        name, [](double t) { return -24.0 * (t - 0.25) * (t - 0.25) + 5.0 / 3.0; }, 0.5, z0);
}

std::pair<ExactSolution, ExactSolution> counterexample_branches()
{
    ExactSolution stay;
    stay.tag = "counter1d-branch1";
    stay.t_begin = 0.0;
    stay.t_end = 0.5;
    stay.eval = [](double) { return State::Constant(1, -1.0 / 3.0); };

    ExactSolution jump;
    jump.tag = "counter1d-branch2";
    jump.t_begin = 0.0;
    jump.t_end = 0.5;
    jump.knots = {0.25};
    jump.eval = [](double t) {
        return State::Constant(1, t < 0.25 ? -1.0 / 3.0 : (1.0 + std::sqrt(2.0)) / 3.0);
    };
    return {stay, jump};
}

std::shared_ptr<Cubic1dProblem> locally_convex_problem()
{
    // kappa = 2 holds on the tube z <= -1/2 around the reference evolution
    // (d^2I/dz^2 = -12 z - 4 there); |l'(t)| = |t - 3/2| <= 3/2 on [0,3].
    return std::make_shared<Cubic1dProblem>(
        "local1d", [](double t) { return -0.5 * (t - 1.5) * (t - 1.5) + 1.5; }, 3.0, -2.0 / 3.0,
        2.0, 1.5);
}

ExactSolution locally_convex_exact()
{
    ExactSolution sol;
    sol.tag = "local1d-exact";
    sol.t_begin = 0.0;
    sol.t_end = 3.0;
    // the driven branch turns around at t = 3/2; afterwards the state is
    // frozen at -1/2 (the two pieces agree there)
    sol.knots = {0.5, 1.5};
    sol.eval = [](double t) {
        double v;
        if (t < 0.5) {
            v = -2.0 / 3.0;
        } else if (t < 1.5) {
            const double d = t - 1.5;
            v = -(1.0 + 0.5 * std::sqrt(1.0 + 3.0 * d * d)) / 3.0;
        } else {
            v = -0.5;
        }
        return State::Constant(1, v);
    };
    return sol;
}

PdeProblem::PdeProblem(int n) : m_mesh(fem::build_mesh(n))
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pde[n=%d]", n);
    m_name = buf;
    m_A = fem::assemble_stiffness(m_mesh);
    m_mass = fem::assemble_lumped_mass(m_mesh);
    m_z0 = State::Zero(m_mesh.n_nodes);
    double f2 = 0.0;
    for (int i = 0; i < m_mesh.n_nodes; ++i) {
        const double f = fem::load_profile_f(m_mesh.node_x[i], m_mesh.node_y[i]);
        f2 += m_mass[i] * f * f;
    }
    m_lip = 0.5 * std::sqrt(f2);
}

double PdeProblem::energy(double t, const State& z) const
{
    return 0.5 * z.dot(m_A * z) - load(t).dot(z);
}

DualVec PdeProblem::gradient(double t, const State& z) const { return m_A * z - load(t); }

DualVec PdeProblem::hessian_apply(double t, const State& z, const State& v) const
{
    (void)t;
    (void)z;
    return m_A * v;
}

double PdeProblem::norm_Z(const State& v) const { return std::sqrt(v.dot(m_A * v)); }

double PdeProblem::stability_tol(double t) const
{
    return 1e-8 * (1.0 + dual_norm_V(load(t)));
}

DualVec PdeProblem::load(double t) const { return fem::assemble_load(m_mesh, m_mass, t); }

std::shared_ptr<PdeProblem> pde_problem(int n) { return std::make_shared<PdeProblem>(n); }

ExactSolution pde_exact(const PdeProblem& p)
{
    const fem::Mesh& mesh = p.mesh();
    Eigen::VectorXd v(mesh.n_nodes);
    for (int i = 0; i < mesh.n_nodes; ++i) {
        const double x = mesh.node_x[i];
        const double y = mesh.node_y[i];
        v[i] = x * y * (1.0 - x) * (1.0 - y);
    }

    ExactSolution sol;
    sol.tag = p.name() + "-exact";
    sol.t_begin = 0.0;
    sol.t_end = 3.0;
    sol.knots = {1.0, 2.0};
    sol.eval = [v](double t) -> State {
        if (t < 1.0) return State::Zero(v.size());
        // sliding amplitude -cos(pi t/2)/pi on [1,2), frozen at 1/pi afterwards
        const double c = t < 2.0 ? -std::cos(M_PI * t / 2.0) / M_PI : 1.0 / M_PI;
        return c * v;
    };
    return sol;
}

std::shared_ptr<Problem> make_problem(const std::string& tag, int mesh_n)
{
    if (tag == "counter1d") return counterexample_problem();
    if (tag == "local1d") return locally_convex_problem();
    if (tag == "pde") return pde_problem(mesh_n);
    throw BadConfig("unknown problem tag '" + tag + "' (expected counter1d|local1d|pde)");
}

std::vector<std::pair<double, double>> stability_set_1d(const Problem& p, double t, double z_lo,
                                                        double z_hi, double step)
{
    RIS_REQUIRE(p.dim() == 1, "stability scan needs a scalar problem");
    RIS_REQUIRE(z_hi > z_lo && step > 0.0, "bad scan range");

    auto stable = [&](double z) {
        return p.dist_to_stable(t, State::Constant(1, z)) == 0.0;
    };
    auto refine = [&](double inside, double outside) {
        for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-10; ++it) {
            const double mid = 0.5 * (inside + outside);
            (stable(mid) ? inside : outside) = mid;
        }
        return inside;
    };

    std::vector<std::pair<double, double>> intervals;
    const int n = static_cast<int>(std::ceil((z_hi - z_lo) / step));
    bool open = false;
    double lo = 0.0;
    double prev = z_lo;
    for (int i = 0; i <= n; ++i) {
        const double z = std::min(z_lo + i * step, z_hi);
        const bool s = stable(z);
        if (s && !open) {
            lo = (i == 0) ? z : refine(z, prev);
            open = true;
        } else if (!s && open) {
            intervals.emplace_back(lo, refine(prev, z));
            open = false;
        }
        prev = z;
    }
    if (open) intervals.emplace_back(lo, z_hi);
    return intervals;
}

std::shared_ptr<const PhysicalSolution> reference_solve(const Problem& p, double tau_ref)
{
    static std::mutex mtx;
    static std::map<std::pair<std::string, double>, std::shared_ptr<const PhysicalSolution>>
        cache;

    const auto key = std::make_pair(p.name(), tau_ref);
    {
        std::lock_guard<std::mutex> lock(mtx);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto sol = std::make_shared<const PhysicalSolution>(filter_progress(run_local(p, tau_ref)));
    std::lock_guard<std::mutex> lock(mtx);
    return cache.emplace(key, std::move(sol)).first->second;
}

} // namespace ris
