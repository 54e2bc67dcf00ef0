#pragma once

#include "rmplate/config.hpp"
#include "rmplate/functionals.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rmplate {

// Both sides of the Energy Lemma evaluated on the reference state u0 over
// the inclusion D. mid is W0 - W (stiff) or W - W0 (soft).
struct EnergyLemmaReport {
    JumpRegime regime = JumpRegime::stiff;
    double bending_D = 0.0; // int_D (h^3/12) |sym grad phi0|^2
    double shear_D = 0.0;   // int_D h |phi0 + grad w0|^2
    double lhs = 0.0;
    double mid = 0.0;
    double rhs = 0.0;
    double mid_boundary = 0.0; // boundary integral of the state differences
    double mid_work = 0.0;     // from the two works
    double tol = 0.0;
    bool lower_pass = true;
    bool upper_pass = true;
    bool cross_check_pass = true;
    bool sign_consistent = true;

    double lower_slack() const { return mid - lhs; }
    double upper_slack() const { return rhs - mid; }
    bool pass() const { return lower_pass && upper_pass && cross_check_pass && sign_consistent; }
};

struct LemmaInputs {
    const Mesh *mesh = nullptr;
    const PlateTensors *tensors = nullptr;
    EllipticityConstants ellipticity;
    JumpBounds jumps;
    const ElementMask *mask = nullptr;
    const BoundaryLoad *load = nullptr;
    ShearMode shear = ShearMode::assumed;
};

EnergyLemmaReport verify_energy_lemma(const LemmaInputs &in, const Eigen::VectorXd &u0, const Eigen::VectorXd &u);

struct SizeBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Tiny gaps of the wrong sign (within sign_tol * W0) are treated as zero;
// larger ones throw InequalityViolation.
SizeBounds size_bounds(double gap, double W0, const JumpBounds &jumps, double C1, double C2, double rho0,
                       double sign_tol = 1e-10);

struct CorpusPoint {
    double area = 0.0;
    double gap = 0.0;
    double W0 = 0.0;
    JumpBounds jumps;
    double rho0 = 1.0;
};

struct Calibration {
    double C1 = 0.0;
    double C2 = 0.0;
    double spread() const { return C2 / C1; }
};

// Envelope fit: C1 is the smallest constant putting some lower bound on
// its area, C2 the largest for the upper bound.
Calibration calibrate_constants(const std::vector<CorpusPoint> &corpus);

struct ThreeSpheresReport {
    Vec2 center = Vec2::Zero();
    double rho = 0.0;
    double theta = 0.0;
    double outer = 0.0; // 7 rho / (2 theta)
    double I_rho = 0.0;
    double I_3rho = 0.0;
    double I_outer = 0.0;
    double tau = 0.0;
    double C = 0.0;    // constant required at tau
    bool monotone = true;
    bool feasible = true;     // false when I_rho = 0 < I_3rho
    bool tau_defined = true;  // false for a zero field or I_rho = I_outer
    bool clamped = false;     // interpolation exponent fell outside [tau_min, tau_max]

    bool pass() const { return monotone && feasible && tau_defined && !clamped; }
};

struct ThreeSpheresOptions {
    double theta = 0.3;
    double tau_min = 0.01;
    double tau_max = 0.99;
};

ThreeSpheresReport three_spheres_check(const EnergyField &field, const Mesh &mesh, const Vec2 &center, double rho,
                                       double rho0, const ThreeSpheresOptions &options = {});

// Centers of a grid with the given pitch that lie at distance > depth from
// the boundary (inside the mesh).
std::vector<Vec2> admissible_centers(const Mesh &mesh, double depth, double pitch);

struct ThreeSpheresScan {
    std::vector<ThreeSpheresReport> reports;
    double pass_fraction = 0.0;
};

ThreeSpheresScan three_spheres_scan(const EnergyField &field, const Mesh &mesh, double rho, double rho0,
                                    double pitch, const ThreeSpheresOptions &options = {}, int jobs = 1);

struct LpsReport {
    double rho = 0.0;
    double theta = 0.0;
    double pitch = 0.0;
    double total = 0.0; // int_Omega E^2
    std::vector<Vec2> centers;
    std::vector<double> ratios;
    double min_ratio = 0.0; // empirical C_rho
    double max_ratio = 0.0;
    bool degenerate = false; // zero field
};

struct LpsOptions {
    double theta = 0.3;
    std::optional<double> pitch; // defaults to rho / 2
    int jobs = 1;
};

// Side of the covering squares of the size-estimate proof,
// 4 theta h1 rho0 / (2 sqrt(2) theta + 7).
double covering_square_side(double theta, double h1, double rho0);

LpsReport lps_check(const EnergyField &field, const Mesh &mesh, double rho, const LpsOptions &options = {});

struct SizeEstimateReport {
    std::string id;
    double area = 0.0;         // rasterized |D|
    double polygon_area = 0.0; // exact area of the inclusion polygons
    double W0 = 0.0;
    double W = 0.0;
    double gap = 0.0;
    double relative_gap = 0.0;
    std::optional<JumpBounds> jumps;
    double C1 = 1.0;
    double C2 = 1.0;
    SizeBounds bounds;
    double fatness = 1.0;
    bool fat = true;
    double F = 1.0;
    bool F_override = false;
    double stability = 0.0;
    double rho0 = 1.0;
    std::size_t dofs = 0;
    double residual = 0.0;
    EnergyLemmaReport lemma;
    bool sign_ok = true;
    std::vector<std::string> warnings;

    // |D| W0 / (rho0^2 |gap|), the size-estimate ratio.
    double size_ratio() const;
    CorpusPoint corpus_point() const;
};

struct RunOptions {
    bool dense_oracle = false;
    std::optional<ShearMode> shear; // overrides the config
    int jobs = 1;
};

// Reference and inclusion solves, works, bounds, fatness, F and the Energy
// Lemma. Never throws on a failed inequality; the flags record it.
SizeEstimateReport run_size_experiment(const ExperimentConfig &config, const RunOptions &options = {});

// Solves one system through the chosen path.
PlateState solve_system(const LinearSystem &system, bool dense_oracle, double compatibility_tol = 1e-9);

struct ConvergenceLevel {
    double mesh_size = 0.0;
    std::size_t elements = 0;
    std::size_t dofs = 0;
    double W = 0.0;
    DiscretizationError error;
    // Observed orders against the previous level (0 on the first row).
    double order_energy_sq = 0.0;
    double order_energy = 0.0;
    double order_l2 = 0.0;
};

struct ConvergenceStudy {
    double W_exact = 0.0;
    std::vector<ConvergenceLevel> levels;
};

// Pure bending (phi = a (x - xc), w = -a |x - xc|^2 / 2) on the config's
// domain and material; mesh_size halves at every level.
ConvergenceStudy pure_bending_convergence(const ExperimentConfig &config, const RunOptions &options = {});

} // namespace rmplate
