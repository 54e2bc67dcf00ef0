#pragma once

#include "rmplate/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace rmplate {

// Transverse shear strain discretization of the 4-node plate element.
//   assumed:          covariant shear strains tied at the edge midpoints and
//                     interpolated across the element (MITC4). Lock-free.
//   full_integration: phi + grad w evaluated directly at the Gauss points.
enum class ShearMode { assumed, full_integration };

constexpr int kDofsPerNode = 3; // phi1, phi2, w
constexpr int kElementDofs = 4 * kDofsPerNode;

using ElementVector = Eigen::Matrix<double, kElementDofs, 1>;
using ElementMatrix = Eigen::Matrix<double, kElementDofs, kElementDofs>;

// Strain operators of one element at one reference point. Multiplying by the
// element's dof vector (phi1, phi2, w per node, nodes counterclockwise) gives
//   bending:   (d1 phi1, d2 phi2, d2 phi1 + d1 phi2)
//   shear:     the element's transverse shear strain (mode dependent)
//   raw_shear: phi + grad w
//   values:    (phi1, phi2, w)
struct PointOperators {
    Vec2 x = Vec2::Zero();
    double weight = 0.0; // quadrature weight times det J
    Eigen::Matrix<double, 3, kElementDofs> bending;
    Eigen::Matrix<double, 2, kElementDofs> shear;
    Eigen::Matrix<double, 2, kElementDofs> raw_shear;
    Eigen::Matrix<double, 3, kElementDofs> values;
    Eigen::Matrix<double, 2, 4> shape_gradients; // d/dx, d/dy of the 4 shape functions
    Eigen::Matrix2d jacobian_inverse;
    Eigen::Matrix<double, 4, 1> shapes;
};

using ElementNodes = std::array<Vec2, 4>;

ElementNodes element_nodes(const Mesh &mesh, std::size_t element);

// Operators at reference coordinates (xi, eta) in [-1, 1]^2; weight is set
// to det J (multiply by the rule's weight). Throws NumericalFailure when the
// Jacobian is not positive.
PointOperators point_operators(const ElementNodes &nodes, double xi, double eta, ShearMode mode);

// Tensor-product Gauss-Legendre rule with `order` points per direction
// (order 2 is the stiffness rule, 3 the enriched residual rule).
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};
GaussRule gauss_rule(int order);

std::vector<PointOperators> element_quadrature(const ElementNodes &nodes, ShearMode mode, int order = 2);

// Gathers the element dof vector from a global vector.
ElementVector gather(const Eigen::VectorXd &u, const std::array<int, 4> &element);

} // namespace rmplate
