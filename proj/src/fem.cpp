#include "ris/fem.hpp"

#include "ris/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace ris {
namespace fem {

int Mesh::interior_index(int ix, int iy) const
{
    if (ix <= 0 || ix >= n || iy <= 0 || iy >= n) return -1;
    return (iy - 1) * (n - 1) + (ix - 1);
}

Mesh build_mesh(int n)
{
    RIS_REQUIRE(n >= 2, "mesh needs at least 2 subdivisions per side");
    Mesh mesh;
    mesh.n = n;
    mesh.hx = 1.0 / n;
    mesh.h = std::sqrt(2.0) / n;
    mesh.n_nodes = (n - 1) * (n - 1);
    mesh.n_elements = 2 * n * n;

    mesh.node_x.resize(mesh.n_nodes);
    mesh.node_y.resize(mesh.n_nodes);
    for (int iy = 1; iy < n; ++iy) {
        for (int ix = 1; ix < n; ++ix) {
            const int k = mesh.interior_index(ix, iy);
            mesh.node_x[k] = ix * mesh.hx;
            mesh.node_y[k] = iy * mesh.hx;
        }
    }

    auto grid = [n](int ix, int iy) { return iy * (n + 1) + ix; };
    mesh.elements.reserve(mesh.n_elements);
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            // split along the (ix,iy) -> (ix+1,iy+1) diagonal
            mesh.elements.push_back({grid(ix, iy), grid(ix + 1, iy), grid(ix + 1, iy + 1)});
            mesh.elements.push_back({grid(ix, iy), grid(ix + 1, iy + 1), grid(ix, iy + 1)});
        }
    }
    return mesh;
}

namespace {

struct GridPoint {
    int ix;
    int iy;
};

GridPoint split_grid(const Mesh& mesh, int g)
{
    return {g % (mesh.n + 1), g / (mesh.n + 1)};
}

} // namespace

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh)
{
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(mesh.n_elements) * 9);

    for (const auto& el : mesh.elements) {
        double px[3], py[3];
        int idx[3];
        for (int a = 0; a < 3; ++a) {
            const GridPoint gp = split_grid(mesh, el[a]);
            px[a] = gp.ix * mesh.hx;
            py[a] = gp.iy * mesh.hx;
            idx[a] = mesh.interior_index(gp.ix, gp.iy);
        }
        const double det = (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
        const double area = 0.5 * std::abs(det);
        // gradients of the barycentric basis
        double bx[3], by[3];
        bx[0] = (py[1] - py[2]) / det;
        by[0] = (px[2] - px[1]) / det;
        bx[1] = (py[2] - py[0]) / det;
        by[1] = (px[0] - px[2]) / det;
        bx[2] = (py[0] - py[1]) / det;
        by[2] = (px[1] - px[0]) / det;

        for (int a = 0; a < 3; ++a) {
            if (idx[a] < 0) continue;
            for (int b = 0; b < 3; ++b) {
                if (idx[b] < 0) continue;
                trips.emplace_back(idx[a], idx[b], area * (bx[a] * bx[b] + by[a] * by[b]));
            }
        }
    }

    Eigen::SparseMatrix<double> A(mesh.n_nodes, mesh.n_nodes);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
}

Eigen::VectorXd assemble_lumped_mass(const Mesh& mesh)
{
    // m_i = (1/3) sum of adjacent triangle areas = count * hx^2 / 6
    Eigen::VectorXi count = Eigen::VectorXi::Zero(mesh.n_nodes);
    for (const auto& el : mesh.elements) {
        for (int a = 0; a < 3; ++a) {
            const GridPoint gp = split_grid(mesh, el[a]);
            const int k = mesh.interior_index(gp.ix, gp.iy);
            if (k >= 0) count[k] += 1;
        }
    }
    Eigen::VectorXd m(mesh.n_nodes);
    for (int k = 0; k < mesh.n_nodes; ++k) {
        m[k] = (count[k] * mesh.hx * mesh.hx) / 6.0;
    }
    return m;
}

double load_profile_f(double x, double y)
{
    return 2.0 * (x * (1.0 - x) + y * (1.0 - y));
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const Eigen::VectorXd& lumped_mass, double t)
{
    const double c = std::cos(M_PI * t / 2.0) / M_PI;
    Eigen::VectorXd l(mesh.n_nodes);
    for (int k = 0; k < mesh.n_nodes; ++k) {
        l[k] = lumped_mass[k] * (1.0 - c * load_profile_f(mesh.node_x[k], mesh.node_y[k]));
    }
    return l;
}

namespace {

void print_entry(std::ostream& out, int i, int j, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i, j, v);
    out << buf;
}

} // namespace

void write_coo(const Eigen::SparseMatrix<double>& op, std::ostream& out)
{
    for (int k = 0; k < op.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(op, k); it; ++it) {
            print_entry(out, static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
}

void write_coo(const Eigen::VectorXd& diag, std::ostream& out)
{
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        print_entry(out, static_cast<int>(i), static_cast<int>(i), diag[i]);
    }
}

} // namespace fem
} // namespace ris
