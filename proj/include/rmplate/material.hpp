#pragma once

#include "rmplate/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rmplate {

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Per-element Lamé moduli of the reference plate plus the declared
// ellipticity floors (alpha0, gamma0) and regularity bound (alpha1).
struct IsotropicMaterial {
    std::vector<double> lambda;
    std::vector<double> mu;
    double h = 1.0;
    double alpha0 = 1.0;
    double gamma0 = 5.0;
    double alpha1 = 2.0;

    static IsotropicMaterial uniform(std::size_t elements, double lambda, double mu, double h,
                                     double alpha0, double gamma0, double alpha1);
    std::size_t num_elements() const { return mu.size(); }
};

// Shear modulus S = h mu, Young modulus, Poisson ratio and bending
// stiffness B = E h^3 / (12 (1 - nu^2)), all per element.
struct PlateTensors {
    std::vector<double> shear;
    std::vector<double> young;
    std::vector<double> poisson;
    std::vector<double> bending;
    double h = 1.0;

    std::size_t num_elements() const { return shear.size(); }
};

PlateTensors derive_plate_tensors(const IsotropicMaterial &material);

// Checks the discrete Lipschitz surrogate |f(e) - f(e')| <= alpha1 |c_e - c_e'| / rho0
// for lambda and mu over elements sharing a node. Returns the worst ratio
// of observed to allowed difference (<= 1 means satisfied).
double lipschitz_violation(const Mesh &mesh, const IsotropicMaterial &material, double rho0);

// Bending operator on a 2x2 matrix: B[(1 - nu) sym(A) + nu tr(A) I].
Mat2 bending_apply(const PlateTensors &tensors, std::size_t element, const Mat2 &A);

// Bending operator in Voigt form acting on (A11, A22, 2 A12).
Mat3 bending_voigt(double bending, double poisson);

struct EllipticityConstants {
    double sigma0 = 0.0;
    double sigma1 = 0.0;
    double xi0 = 0.0;
    double xi1 = 0.0;
};

// sigma0 = alpha0, sigma1 = alpha1, xi0 = min(2 alpha0, gamma0), xi1 = 2 alpha1,
// after verifying h sigma0 <= S <= h sigma1 and the bending sandwich
// (h^3/12) xi0 |sym A|^2 <= PA.A <= (h^3/12) xi1 |sym A|^2 at every element.
EllipticityConstants ellipticity_constants(const IsotropicMaterial &material, const PlateTensors &tensors);

// Inclusion tensors: either a scalar contrast (S~ = kappa S, P~ = kappa P)
// or explicit per-element tables keyed by element id.
struct InclusionMaterial {
    std::optional<double> kappa;
    std::map<std::size_t, Mat2> shear;
    std::map<std::size_t, Mat3> bending; // Voigt form, see bending_voigt

    static InclusionMaterial scalar(double kappa);
    bool is_scalar() const { return kappa.has_value(); }
};

// Voigt matrix of a fourth-order tensor given as P[a][b][c][d] flattened
// row-major (index 8a + 4b + 2c + d). Throws unless the minor and major
// symmetries hold to tol.
Mat3 voigt_from_components(const std::array<double, 16> &components, double tol = 1e-12);

// CSV tables: "element_id,S11,S12,S21,S22" and "element_id,P1111,...,P2222"
// (16 coefficients row-major). A header line is allowed.
std::map<std::size_t, Mat2> read_shear_table(const std::string &path);
std::map<std::size_t, Mat3> read_bending_table(const std::string &path);

enum class JumpRegime { stiff, soft };

const char *to_string(JumpRegime regime);

struct JumpBounds {
    double eta = 0.0;
    double delta = 0.0;
    JumpRegime regime = JumpRegime::stiff;
};

// Tightest (eta, delta) for which the jump inequalities hold at every
// flagged element. Throws InvalidInput when neither regime is satisfiable.
JumpBounds jump_bounds(const PlateTensors &tensors, const InclusionMaterial &inclusion, const ElementMask &mask);

// Constitutive coefficients used by the assembly on one element.
struct ElementCoefficients {
    Mat2 shear;
    Mat3 bending;
};

ElementCoefficients reference_coefficients(const PlateTensors &tensors, std::size_t element);

ElementCoefficients composite_coefficients(const PlateTensors &tensors, const InclusionMaterial *inclusion,
                                           const ElementMask *mask, std::size_t element);

} // namespace rmplate
