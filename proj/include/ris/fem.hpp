#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <vector>

namespace ris {
namespace fem {

/// Uniform right-triangle mesh of the unit square: n x n squares, each split
/// along its lower-left -> upper-right diagonal. Only interior nodes carry
/// unknowns (homogeneous Dirichlet boundary); ordering is lexicographic with
/// x running fastest.
struct Mesh {
    int n = 0;           // subdivisions per side
    double hx = 0.0;     // grid spacing 1/n
    double h = 0.0;      // mesh size = longest edge = sqrt(2)/n
    int n_nodes = 0;     // (n-1)^2 interior nodes
    int n_elements = 0;  // 2 n^2 triangles

    Eigen::VectorXd node_x; // interior node coordinates
    Eigen::VectorXd node_y;

    // triangles as grid-node triples (gi = iy*(n+1)+ix over the full grid)
    std::vector<std::array<int, 3>> elements;

    /// Interior index of grid node (ix, iy), or -1 on the boundary.
    int interior_index(int ix, int iy) const;
};

Mesh build_mesh(int n);

/// P1 stiffness of -Laplace on interior nodes (symmetric positive definite).
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh);

/// Row-sum lumped mass: m_i = (1/3) * sum of areas of triangles touching node i.
Eigen::VectorXd assemble_lumped_mass(const Mesh& mesh);

/// Nodal-quadrature load l_i(t) = m_i * (1 - cos(pi t / 2) f(x_i) / pi) with
/// f(x) = 2 (x1 (1-x1) + x2 (1-x2)).
Eigen::VectorXd assemble_load(const Mesh& mesh, const Eigen::VectorXd& lumped_mass, double t);

double load_profile_f(double x, double y);

/// Triplet dump `i j value` (0-based) for cross-checks with external assemblers.
void write_coo(const Eigen::SparseMatrix<double>& op, std::ostream& out);
void write_coo(const Eigen::VectorXd& diag, std::ostream& out);

} // namespace fem
} // namespace ris
