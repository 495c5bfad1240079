#pragma once

#include "ris/problem.hpp"

#include <functional>
#include <utility>

namespace ris::testing {

/// I(t,z) = 1/2 a z^2 - l(t) z with R(v) = |v|.
class QuadraticToy1d : public Problem {
public:
    QuadraticToy1d(double a, std::function<double(double)> load, double T = 1.0, double z0 = 0.0)
        : m_a(a),
          m_load(std::move(load)),
          m_T(T),
          m_z0(State::Constant(1, z0)),
          m_w(Eigen::VectorXd::Ones(1))
    {
    }

    std::string name() const override { return "toy1d"; }
    int dim() const override { return 1; }
    double horizon() const override { return m_T; }
    const State& initial_state() const override { return m_z0; }
    double energy(double t, const State& z) const override
    {
        return 0.5 * m_a * z[0] * z[0] - m_load(t) * z[0];
    }
    DualVec gradient(double t, const State& z) const override
    {
        return DualVec::Constant(1, m_a * z[0] - m_load(t));
    }
    DualVec hessian_apply(double, const State&, const State& v) const override
    {
        return m_a * v;
    }
    const Eigen::VectorXd& dissipation_weights() const override { return m_w; }
    double norm_Z(const State& v) const override { return std::abs(v[0]); }

private:
    double m_a;
    std::function<double(double)> m_load;
    double m_T;
    State m_z0;
    Eigen::VectorXd m_w;
};

/// Diagonal quadratic in a few dimensions with weighted dissipation; used to
/// exercise the box-projection distance and the lumped-quadratic solver path.
class DiagonalToy : public Problem, public LumpedQuadratic {
public:
    DiagonalToy(Eigen::VectorXd diag, Eigen::VectorXd weights, Eigen::VectorXd load_vec,
                double T = 1.0)
        : m_weights(std::move(weights)), m_load(std::move(load_vec)), m_T(T)
    {
        const auto n = diag.size();
        m_A.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) m_A.insert(i, i) = diag[i];
        m_A.makeCompressed();
        m_z0 = State::Zero(n);
    }

    std::string name() const override { return "toy-diag"; }
    int dim() const override { return static_cast<int>(m_weights.size()); }
    double horizon() const override { return m_T; }
    const State& initial_state() const override { return m_z0; }
    double energy(double t, const State& z) const override
    {
        return 0.5 * z.dot(m_A * z) - load(t).dot(z);
    }
    DualVec gradient(double t, const State& z) const override { return m_A * z - load(t); }
    DualVec hessian_apply(double, const State&, const State& v) const override
    {
        return m_A * v;
    }
    const Eigen::VectorXd& dissipation_weights() const override { return m_weights; }
    double norm_Z(const State& v) const override { return std::sqrt(v.dot(m_A * v)); }

    const Eigen::SparseMatrix<double>& stiffness() const override { return m_A; }
    DualVec load(double t) const override { return (1.0 + t) * m_load; }

private:
    Eigen::SparseMatrix<double> m_A;
    Eigen::VectorXd m_weights;
    Eigen::VectorXd m_load;
    double m_T;
    State m_z0;
};

} // namespace ris::testing
