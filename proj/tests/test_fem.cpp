#include "ris/fem.hpp"
#include "ris/gallery.hpp"

#include <doctest.h>

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>

using namespace ris;
using namespace ris::fem;

namespace {

// row sums of an independently assembled consistent P1 mass matrix
// (local matrix area/12 * [2 1 1; 1 2 1; 1 1 2], all columns kept)
Eigen::VectorXd consistent_mass_rowsums(const Mesh& mesh)
{
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(mesh.n_nodes);
    const double area = mesh.hx * mesh.hx / 2.0;
    for (const auto& el : mesh.elements) {
        for (int a = 0; a < 3; ++a) {
            const int ix = el[a] % (mesh.n + 1);
            const int iy = el[a] / (mesh.n + 1);
            const int i = mesh.interior_index(ix, iy);
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                rowsum[i] += area / 12.0 * (a == b ? 2.0 : 1.0);
            }
        }
    }
    return rowsum;
}

double smallest_generalized_eig(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& mass)
{
    // inverse power iteration on M^{-1/2} A M^{-1/2}
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
    REQUIRE(chol.info() == Eigen::Success);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows());
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
        v = chol.solve(mass.cwiseProduct(v));
        const double norm = std::sqrt(v.dot(mass.cwiseProduct(v)));
        v /= norm;
        mu = v.dot(A * v) / v.dot(mass.cwiseProduct(v));
    }
    return mu;
}

} // namespace

TEST_CASE("mesh counting")
{
    const Mesh m2 = build_mesh(2);
    CHECK(m2.n_nodes == 1);
    CHECK(m2.n_elements == 8);
    CHECK(static_cast<int>(m2.elements.size()) == 8);

    CHECK(build_mesh(3).n_nodes == 4);
    CHECK(build_mesh(100).h == doctest::Approx(std::sqrt(2.0) / 100.0).epsilon(1e-15));
    CHECK_THROWS(build_mesh(1));
}

TEST_CASE("stiffness is the five-point stencil")
{
    const Mesh mesh = build_mesh(2);
    const auto A2 = assemble_stiffness(mesh);
    CHECK(A2.coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

    const Mesh m4 = build_mesh(4);
    const auto A = assemble_stiffness(m4);
    const int c = m4.interior_index(2, 2);
    CHECK(A.coeff(c, c) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(A.coeff(c, m4.interior_index(1, 2)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(A.coeff(c, m4.interior_index(3, 2)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(A.coeff(c, m4.interior_index(2, 1)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(A.coeff(c, m4.interior_index(2, 3)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(A.coeff(c, m4.interior_index(1, 1)) == doctest::Approx(0.0));
    CHECK(A.coeff(c, m4.interior_index(3, 3)) == doctest::Approx(0.0));

    // symmetry
    const Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(A.transpose()) - A;
    CHECK(diff.coeffs().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("patch test: affine fields are discretely harmonic")
{
    const Mesh mesh = build_mesh(6);
    const auto A = assemble_stiffness(mesh);
    Eigen::VectorXd u(mesh.n_nodes);
    for (int i = 0; i < mesh.n_nodes; ++i) {
        u[i] = 0.3 + 1.7 * mesh.node_x[i] - 0.9 * mesh.node_y[i];
    }
    const Eigen::VectorXd r = A * u;
    for (int iy = 2; iy < mesh.n - 1; ++iy) {
        for (int ix = 2; ix < mesh.n - 1; ++ix) {
            CHECK(std::abs(r[mesh.interior_index(ix, iy)]) < 1e-13);
        }
    }
}

TEST_CASE("lumped mass")
{
    const Mesh mesh = build_mesh(4);
    const auto m = assemble_lumped_mass(mesh);
    const double hx2 = mesh.hx * mesh.hx;
    CHECK(m[mesh.interior_index(2, 2)] == doctest::Approx(hx2).epsilon(1e-14));
    CHECK(m.sum() <= 1.0);

    // row sums of the consistent mass coincide with the lumped diagonal
    const Eigen::VectorXd rowsum = consistent_mass_rowsums(mesh);
    CHECK((rowsum - m).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("load vector")
{
    const Mesh mesh = build_mesh(4);
    const auto m = assemble_lumped_mass(mesh);

    const auto l1 = assemble_load(mesh, m, 1.0); // cos(pi/2) = 0
    CHECK((l1 - m).cwiseAbs().maxCoeff() < 1e-15);

    const auto l0 = assemble_load(mesh, m, 0.0);
    for (int i = 0; i < mesh.n_nodes; ++i) {
        const double f = load_profile_f(mesh.node_x[i], mesh.node_y[i]);
        CHECK(l0[i] == doctest::Approx(m[i] * (1.0 - f / M_PI)).epsilon(1e-14));
    }
    const int center = mesh.interior_index(2, 2);
    CHECK(load_profile_f(mesh.node_x[center], mesh.node_y[center]) == doctest::Approx(1.0));
}

TEST_CASE("smallest stiffness eigenvalue approaches the Dirichlet Laplacian")
{
    const Mesh mesh = build_mesh(16);
    const auto A = assemble_stiffness(mesh);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
    REQUIRE(chol.info() == Eigen::Success);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(mesh.n_nodes);
    for (int it = 0; it < 200; ++it) {
        v = chol.solve(v);
        v /= v.norm();
    }
    const double lam = v.dot(A * v);
    CHECK(lam / (mesh.hx * mesh.hx) ==
          doctest::Approx(2.0 * M_PI * M_PI).epsilon(0.05));
}

TEST_CASE("norms of the bump interpolant")
{
    auto pp = pde_problem(32);
    const Mesh& mesh = pp->mesh();
    State z(mesh.n_nodes);
    for (int i = 0; i < mesh.n_nodes; ++i) {
        const double x = mesh.node_x[i];
        const double y = mesh.node_y[i];
        z[i] = x * y * (1.0 - x) * (1.0 - y);
    }
    // integral of |grad v|^2 over the square is 1/45
    const double n2 = pp->norm_Z(z) * pp->norm_Z(z);
    CHECK(n2 == doctest::Approx(1.0 / 45.0).epsilon(0.02));

    auto p2 = pde_problem(2);
    State one = State::Constant(1, 1.0);
    CHECK(p2->norm_Z(one) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(p2->norm_V(one) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p2->norm_Z(State::Zero(1)) == 0.0);
}

TEST_CASE("discrete Poincare constant")
{
    for (int n : {8, 16, 32}) {
        const Mesh mesh = build_mesh(n);
        const auto A = assemble_stiffness(mesh);
        const auto m = assemble_lumped_mass(mesh);
        const double mu = smallest_generalized_eig(A, m);
        const double c = 1.0 / std::sqrt(mu); // ||v||_V <= c ||v||_Z
        CHECK(c <= (1.0 + 0.1) / (std::sqrt(2.0) * M_PI));
    }
}

TEST_CASE("exact-solution interpolants are discretely stable")
{
    for (int n : {8, 16}) {
        auto pp = pde_problem(n);
        const auto exact = pde_exact(*pp);
        const double C = 0.5; // measured ~0.01 at n=8; decays quadratically
        for (int i = 0; i < 20; ++i) {
            const double t = 3.0 * i / 19.0;
            CHECK(pp->dist_to_stable(t, exact.eval(t)) <= C * pp->mesh().h);
        }
    }
}

TEST_CASE("coordinate dump")
{
    const Mesh mesh = build_mesh(2);
    std::ostringstream os;
    write_coo(assemble_stiffness(mesh), os);
    CHECK(os.str() == "0 0 4\n");
    std::ostringstream om;
    write_coo(assemble_lumped_mass(mesh), om);
    CHECK(om.str() == "0 0 0.25\n");
    CHECK(assemble_lumped_mass(mesh)[0] == 0.25);
}
