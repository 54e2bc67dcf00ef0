#pragma once

#include "rmplate/element.hpp"
#include "rmplate/geometry.hpp"
#include "rmplate/material.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rmplate {

// Boundary tractions sampled at the two Gauss points of every boundary edge
// (same edge order as Mesh::boundary_edges).
struct LoadSample {
    double force = 0.0;         // transverse force density Q
    Vec2 moment = Vec2::Zero(); // couple density M
};

struct BoundaryLoad {
    std::vector<std::array<LoadSample, 2>> samples;
    std::string family; // generator tag, informational
};

// Gauss points of an edge: positions and weights (length / 2 each).
std::array<Vec2, 2> edge_gauss_points(const Mesh &mesh, const BoundaryEdge &edge);
std::array<double, 2> edge_gauss_abscissae(); // in [0, 1] along the edge

using LoadFunction = std::function<LoadSample(const Vec2 &x, const BoundaryEdge &edge)>;
BoundaryLoad sample_load(const Mesh &mesh, const LoadFunction &f, std::string family);

// M = B a (1 + nu) n, Q = 0: the traction of phi = a x, w = -a |x|^2 / 2.
BoundaryLoad pure_bending_load(const Mesh &mesh, const PlateTensors &tensors, double a);
// M = c (n2, n1), Q = 0: uniform twisting moment.
BoundaryLoad twist_load(const Mesh &mesh, double c);
// M = c (n1, 0), Q = 0: uniaxial bending moment.
BoundaryLoad edge_moment_load(const Mesh &mesh, double c);
// Q = q n1, M = (q (x1 - xc1) n1, 0): uniform shear force with the
// balancing linearly varying moment (xc = mesh area centroid).
BoundaryLoad shear_bending_load(const Mesh &mesh, double q);
// Random quadratic polynomial tractions made compatible; deterministic in seed.
BoundaryLoad random_load(const Mesh &mesh, std::uint64_t seed);

// Removes the mean force and adds the constant couple that balances the
// moment, so that both compatibility integrals vanish.
void make_compatible(BoundaryLoad &load, const Mesh &mesh);

struct Compatibility {
    double force = 0.0;          // int Q
    Vec2 moment = Vec2::Zero();  // int (Q x - M)
    double force_scale = 0.0;    // int |Q|
    double moment_scale = 0.0;   // int (|Q| |x - xc| + |M|)

    bool satisfied(double tol) const;
};

Compatibility load_compatibility(const Mesh &mesh, const BoundaryLoad &load);

// "edge_id,point,Q,M1,M2" with point in {0, 1}.
BoundaryLoad read_load_csv(std::istream &in, const Mesh &mesh);
void write_load_csv(std::ostream &out, const BoundaryLoad &load);

struct AssemblyOptions {
    ShearMode shear = ShearMode::assumed;
    int jobs = 1;
};

// Stiffness K over (phi1, phi2, w) per node, the normalization functionals
// (int phi1, int phi2, int w) as rows of `constraints`, and the discrete
// rigid modes k1 = (1, 0, -x1), k2 = (0, 1, -x2), k3 = (0, 0, 1) as columns
// of `kernel`.
struct LinearSystem {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::Matrix<double, 3, Eigen::Dynamic> constraints;
    Eigen::Matrix<double, Eigen::Dynamic, 3> kernel;
    Eigen::VectorXd rhs;
    ShearMode shear = ShearMode::assumed;

    Eigen::Index num_dofs() const { return stiffness.rows(); }
};

LinearSystem assemble_stiffness(const Mesh &mesh, const PlateTensors &tensors, const ElementMask *mask = nullptr,
                                const InclusionMaterial *inclusion = nullptr, const AssemblyOptions &options = {});

struct LoadVector {
    Eigen::VectorXd rhs;
    Compatibility compatibility;
};

// Edge-wise 2-point Gauss quadrature of int Q v + M . psi. Throws
// InvalidInput when the compatibility residuals exceed tol (relative).
LoadVector assemble_load(const Mesh &mesh, const BoundaryLoad &load, double tol = 1e-9);

struct PlateState {
    Eigen::VectorXd dofs;
    double residual = 0.0;                           // |K u - f| / |f|
    Eigen::Vector3d normalization = Eigen::Vector3d::Zero(); // C u

    double phi1(std::size_t node) const { return dofs(kDofsPerNode * node + 0); }
    double phi2(std::size_t node) const { return dofs(kDofsPerNode * node + 1); }
    double w(std::size_t node) const { return dofs(kDofsPerNode * node + 2); }
    std::size_t num_nodes() const { return static_cast<std::size_t>(dofs.size()) / kDofsPerNode; }
};

struct SolveOptions {
    double compatibility_tol = 1e-9; // kernel component of the rhs, relative
    double residual_tol = 1e-8;
};

// Bordered system [K C^T; C 0]: sparse LDL^T of K stiffened at one node,
// then a small Schur complement for the multipliers.
PlateState solve(const LinearSystem &system, const SolveOptions &options = {});

struct OracleOptions {
    Eigen::Index max_dofs = 600;
    double compatibility_tol = 1e-9;
    double kernel_tol = 1e-10; // eigenvalues below kernel_tol * max are kernel
};

// Dense eigendecomposition of K: pseudo-inverse on the range, then the
// kernel component fixed by the normalization functionals.
PlateState dense_oracle_solve(const LinearSystem &system, const OracleOptions &options = {});

struct KernelReport {
    Eigen::Index dimension = 0;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd basis; // columns span the numerical kernel
    // Largest residual of a rigid mode after projection onto `basis`.
    double rigid_mode_defect = 0.0;
};

KernelReport stiffness_kernel(const LinearSystem &system, const OracleOptions &options = {});

// a(u, v) = u^T K v.
double bilinear(const LinearSystem &system, const Eigen::VectorXd &u, const Eigen::VectorXd &v);

struct ResidualReport {
    double galerkin_relative = 0.0; // |K u - f| / |f| (absolute when f = 0)
    double galerkin_max = 0.0;      // max nodal |K u - f|
    // Weak residual against element bubble tests (one per field), 3x3 Gauss.
    double enriched_max = 0.0;
    std::vector<double> element_enriched;
};

ResidualReport residual_check(const Eigen::VectorXd &dofs, const Mesh &mesh, const PlateTensors &tensors,
                              const BoundaryLoad &load, const ElementMask *mask = nullptr,
                              const InclusionMaterial *inclusion = nullptr, ShearMode shear = ShearMode::assumed);

// Nodal interpolant of phi(x), w(x).
Eigen::VectorXd interpolate(const Mesh &mesh, const std::function<Eigen::Vector3d(const Vec2 &)> &field);

// "node_id,x,y,phi1,phi2,w".
void write_state_csv(std::ostream &out, const Mesh &mesh, const PlateState &state);

} // namespace rmplate
