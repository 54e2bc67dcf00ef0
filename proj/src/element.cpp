#include "rmplate/element.hpp"

#include "rmplate/error.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

namespace rmplate {

namespace {

constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};

// Covariant shear strain along the edge a -> b, sampled at its midpoint:
// phi(mid) . (X_b - X_a)/2 + (w_b - w_a)/2.
Eigen::Matrix<double, 1, kElementDofs> tied_strain(const ElementNodes &X, int a, int b) {
    Eigen::Matrix<double, 1, kElementDofs> row = Eigen::Matrix<double, 1, kElementDofs>::Zero();
    const Vec2 g = 0.5 * (X[b] - X[a]);
    for (int n : {a, b}) {
        row(kDofsPerNode * n + 0) += 0.5 * g.x();
        row(kDofsPerNode * n + 1) += 0.5 * g.y();
    }
    row(kDofsPerNode * a + 2) -= 0.5;
    row(kDofsPerNode * b + 2) += 0.5;
    return row;
}

} // namespace

ElementNodes element_nodes(const Mesh &mesh, std::size_t element) {
    const auto &q = mesh.elements[element];
    return {mesh.nodes[q[0]], mesh.nodes[q[1]], mesh.nodes[q[2]], mesh.nodes[q[3]]};
}

PointOperators point_operators(const ElementNodes &X, double xi, double eta, ShearMode mode) {
    PointOperators op;
    Eigen::Matrix<double, 2, 4> dref;
    for (int k = 0; k < 4; ++k) {
        op.shapes(k) = 0.25 * (1.0 + xi * kXi[k]) * (1.0 + eta * kEta[k]);
        dref(0, k) = 0.25 * kXi[k] * (1.0 + eta * kEta[k]);
        dref(1, k) = 0.25 * kEta[k] * (1.0 + xi * kXi[k]);
    }
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    op.x.setZero();
    for (int k = 0; k < 4; ++k) {
        J(0, 0) += dref(0, k) * X[k].x();
        J(0, 1) += dref(0, k) * X[k].y();
        J(1, 0) += dref(1, k) * X[k].x();
        J(1, 1) += dref(1, k) * X[k].y();
        op.x += op.shapes(k) * X[k];
    }
    const double det = J.determinant();
    if (!(det > 0.0))
        throw NumericalFailure("non-positive element Jacobian (" + std::to_string(det) + ")");
    const Eigen::Matrix2d Jinv = J.inverse();
    op.weight = det;
    op.jacobian_inverse = Jinv;
    op.shape_gradients = Jinv * dref;

    op.bending.setZero();
    op.raw_shear.setZero();
    op.values.setZero();
    for (int k = 0; k < 4; ++k) {
        const int c = kDofsPerNode * k;
        const double N = op.shapes(k);
        const double dx = op.shape_gradients(0, k);
        const double dy = op.shape_gradients(1, k);
        op.bending(0, c + 0) = dx;
        op.bending(1, c + 1) = dy;
        op.bending(2, c + 0) = dy;
        op.bending(2, c + 1) = dx;
        op.raw_shear(0, c + 0) = N;
        op.raw_shear(0, c + 2) = dx;
        op.raw_shear(1, c + 1) = N;
        op.raw_shear(1, c + 2) = dy;
        op.values(0, c + 0) = N;
        op.values(1, c + 1) = N;
        op.values(2, c + 2) = N;
    }

    if (mode == ShearMode::full_integration) {
        op.shear = op.raw_shear;
        return op;
    }
    // Tying points: A = (0,-1), C = (0,1) for the xi strain; D = (-1,0),
    // B = (1,0) for the eta strain.
    const auto A = tied_strain(X, 0, 1);
    const auto C = tied_strain(X, 3, 2);
    const auto D = tied_strain(X, 0, 3);
    const auto B = tied_strain(X, 1, 2);
    Eigen::Matrix<double, 2, kElementDofs> covariant;
    covariant.row(0) = 0.5 * (1.0 - eta) * A + 0.5 * (1.0 + eta) * C;
    covariant.row(1) = 0.5 * (1.0 - xi) * D + 0.5 * (1.0 + xi) * B;
    op.shear = Jinv * covariant;
    return op;
}

GaussRule gauss_rule(int order) {
    switch (order) {
    case 1:
        return {{0.0}, {2.0}};
    case 2: {
        const double p = 1.0 / std::sqrt(3.0);
        return {{-p, p}, {1.0, 1.0}};
    }
    case 3: {
        const double p = std::sqrt(0.6);
        return {{-p, 0.0, p}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    }
    default:
        throw InvalidInput("unsupported Gauss rule order " + std::to_string(order));
    }
}

std::vector<PointOperators> element_quadrature(const ElementNodes &nodes, ShearMode mode, int order) {
    const GaussRule rule = gauss_rule(order);
    std::vector<PointOperators> points;
    points.reserve(rule.points.size() * rule.points.size());
    for (std::size_t j = 0; j < rule.points.size(); ++j)
        for (std::size_t i = 0; i < rule.points.size(); ++i) {
            PointOperators op = point_operators(nodes, rule.points[i], rule.points[j], mode);
            op.weight *= rule.weights[i] * rule.weights[j];
            points.push_back(std::move(op));
        }
    return points;
}

ElementVector gather(const Eigen::VectorXd &u, const std::array<int, 4> &element) {
    ElementVector ue;
    for (int k = 0; k < 4; ++k)
        for (int c = 0; c < kDofsPerNode; ++c)
            ue(kDofsPerNode * k + c) = u(kDofsPerNode * element[k] + c);
    return ue;
}

} // namespace rmplate
