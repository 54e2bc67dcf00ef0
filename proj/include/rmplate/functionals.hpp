#pragma once

#include "rmplate/solver.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <vector>

namespace rmplate {

// W = int Q w + M . phi over the boundary, by the load's edge quadrature.
double boundary_work(const Mesh &mesh, const BoundaryLoad &load, const Eigen::VectorXd &dofs);

struct WorkReport {
    double W = 0.0;
    double W0 = 0.0;
    double gap = 0.0;          // W0 - W
    double relative_gap = 0.0; // gap / W0
};

WorkReport work_report(double W0, double W);

struct EnergyPoint {
    Vec2 x = Vec2::Zero();
    double weight = 0.0;
    std::size_t element = 0;
    double sym_grad_sq = 0.0; // |sym grad phi|^2
    double shear_sq = 0.0;    // |phi + grad w|^2
    double E2 = 0.0;          // sym_grad_sq + shear_sq / rho0^2
};

// Strain energy density at quadrature points, with a bucket index for disk
// queries.
class EnergyField {
public:
    EnergyField() = default;
    EnergyField(std::vector<EnergyPoint> points, double rho0);

    const std::vector<EnergyPoint> &points() const { return points_; }
    double rho0() const { return rho0_; }
    double total() const;

    // Calls f(point) for every point with |x - center| <= radius.
    void for_each_in_disk(const Vec2 &center, double radius, const std::function<void(const EnergyPoint &)> &f) const;

private:
    void build_index();

    std::vector<EnergyPoint> points_;
    double rho0_ = 1.0;
    Vec2 origin_ = Vec2::Zero();
    double cell_ = 1.0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<std::size_t> start_; // CSR over buckets
    std::vector<std::size_t> order_;
};

struct EnergyOptions {
    ShearMode shear = ShearMode::assumed; // strain used for phi + grad w
    // Each element is split into subdivisions^2 cells with 2x2 Gauss each.
    int subdivisions = 1;
};

EnergyField strain_energy_density(const Mesh &mesh, const Eigen::VectorXd &dofs, double rho0,
                                  const EnergyOptions &options = {});

// "x,y,weight,E2".
void write_energy_csv(std::ostream &out, const EnergyField &field);

struct RegionIntegral {
    double value = 0.0;
    bool empty = true; // no quadrature point fell inside the region
};

RegionIntegral region_energy(const EnergyField &field, const ElementMask &region);
RegionIntegral region_energy(const EnergyField &field, const Vec2 &center, double radius);

struct Ratio {
    double value = 0.0;
    bool degenerate = false; // zero denominator
};

// |grad phi| / (|sym grad phi| + |phi + grad w| / rho0), L2 norms.
Ratio korn_ratio(const Mesh &mesh, const Eigen::VectorXd &dofs, double rho0, ShearMode shear = ShearMode::assumed);

// |u - mean u| / (rho0 |grad u|) for a nodal scalar field, or summed over
// the components of a nodal vector field stored node-major.
Ratio poincare_ratio(const Mesh &mesh, const Eigen::VectorXd &nodal, double rho0, int components = 1);

// Closed-polyline Laplace-Beltrami spectrum of the mesh boundary (P1 mass
// and stiffness on each loop). Eigenvectors are mass-orthonormal.
struct BoundarySpectrum {
    std::vector<int> nodes;           // mesh node of each boundary dof
    std::vector<std::array<int, 2>> edges; // boundary dofs of each boundary edge
    Eigen::MatrixXd mass;
    Eigen::MatrixXd stiffness;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    double rho0 = 1.0;

    Eigen::Index size() const { return static_cast<Eigen::Index>(nodes.size()); }
};

BoundarySpectrum boundary_spectrum(const Mesh &mesh, double rho0);

// Moments int g psi_i from samples of g at the edge Gauss points.
Eigen::VectorXd boundary_moments(const BoundarySpectrum &spectrum, const Mesh &mesh,
                                 const std::vector<std::array<double, 2>> &samples);

// norm^2 = sum_k (1 + rho0^2 lambda_k)^s (b . v_k)^2 for moments b.
double fractional_norm_from_moments(const BoundarySpectrum &spectrum, const Eigen::VectorXd &moments, double s);
// Same for a P1 function given by its values at the boundary dofs.
double boundary_fractional_norm(const BoundarySpectrum &spectrum, const Eigen::VectorXd &nodal, double s);

struct FrequencyReport {
    double M_half = 0.0;
    double Q_half = 0.0;
    double M_one = 0.0;
    double Q_one = 0.0;
    double norm_half = 0.0; // |M|_{-1/2} + rho0 |Q|_{-1/2}
    double norm_one = 0.0;  // |M|_{-1} + rho0 |Q|_{-1}
    double F = 0.0;
};

FrequencyReport frequency(const BoundarySpectrum &spectrum, const Mesh &mesh, const BoundaryLoad &load);

// Samples a P1 boundary function at the load quadrature points.
std::vector<std::array<double, 2>> sample_boundary_function(const BoundarySpectrum &spectrum, const Mesh &mesh,
                                                            const Eigen::VectorXd &nodal);

// (|phi|_{H1} + |w|_{H1} / rho0) rho0^2 / norm_half with the scaled norms
// |u|_{H1}^2 = |u|^2 / rho0^2 + |grad u|^2.
double stability_ratio(const Mesh &mesh, const Eigen::VectorXd &dofs, double rho0, const FrequencyReport &freq);

// Exact plate fields for error measurement.
struct ExactPlate {
    std::function<Vec2(const Vec2 &)> phi;
    std::function<Eigen::Matrix2d(const Vec2 &)> grad_phi; // (i, j) = d_j phi_i
    std::function<double(const Vec2 &)> w;
    std::function<Vec2(const Vec2 &)> grad_w;
};

struct DiscretizationError {
    double energy_sq = 0.0; // int |sym grad e_phi|^2 + |e_gamma|^2 / rho0^2 (raw strains)
    double energy = 0.0;    // sqrt(energy_sq)
    double assumed_energy = 0.0; // same with the element's assumed shear strain
    double l2 = 0.0;        // |e_phi| + |e_w - mean| in L2
};

// 3x3 Gauss per element.
DiscretizationError discretization_error(const Mesh &mesh, const Eigen::VectorXd &dofs, const ExactPlate &exact,
                                         double rho0);

} // namespace rmplate
