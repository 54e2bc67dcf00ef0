#include "rmplate/functionals.hpp"

#include "rmplate/csv.hpp"
#include "rmplate/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace rmplate {

namespace {

// |sym A|^2 from the Voigt strain (A11, A22, 2 A12).
double sym_sq(const Eigen::Vector3d &v) { return v(0) * v(0) + v(1) * v(1) + 0.5 * v(2) * v(2); }

void check_state(const Mesh &mesh, const Eigen::VectorXd &dofs) {
    if (dofs.size() != kDofsPerNode * static_cast<Eigen::Index>(mesh.num_nodes()))
        throw InvalidInput("state does not match the mesh");
}

} // namespace

double boundary_work(const Mesh &mesh, const BoundaryLoad &load, const Eigen::VectorXd &dofs) {
    check_state(mesh, dofs);
    if (load.samples.size() != mesh.boundary_edges.size())
        throw InvalidInput("load does not match the mesh boundary");
    const auto t = edge_gauss_abscissae();
    double W = 0.0;
    for (std::size_t i = 0; i < load.samples.size(); ++i) {
        const BoundaryEdge &edge = mesh.boundary_edges[i];
        const Eigen::Vector3d ua = dofs.segment<3>(kDofsPerNode * static_cast<Eigen::Index>(edge.nodes[0]));
        const Eigen::Vector3d ub = dofs.segment<3>(kDofsPerNode * static_cast<Eigen::Index>(edge.nodes[1]));
        for (int g = 0; g < 2; ++g) {
            const Eigen::Vector3d u = (1.0 - t[g]) * ua + t[g] * ub;
            const LoadSample &s = load.samples[i][g];
            W += 0.5 * edge.length * (s.force * u(2) + s.moment.x() * u(0) + s.moment.y() * u(1));
        }
    }
    return W;
}

WorkReport work_report(double W0, double W) {
    WorkReport r;
    r.W0 = W0;
    r.W = W;
    r.gap = W0 - W;
    r.relative_gap = W0 != 0.0 ? r.gap / W0 : 0.0;
    return r;
}

EnergyField::EnergyField(std::vector<EnergyPoint> points, double rho0) : points_(std::move(points)), rho0_(rho0) {
    build_index();
}

double EnergyField::total() const {
    double sum = 0.0;
    for (const EnergyPoint &p : points_)
        sum += p.weight * p.E2;
    return sum;
}

void EnergyField::build_index() {
    start_.clear();
    order_.clear();
    if (points_.empty()) {
        nx_ = ny_ = 0;
        return;
    }
    Vec2 lo = points_.front().x;
    Vec2 hi = lo;
    for (const EnergyPoint &p : points_) {
        lo = lo.cwiseMin(p.x);
        hi = hi.cwiseMax(p.x);
    }
    const Vec2 extent = (hi - lo).cwiseMax(1e-12);
    // About 8 points per bucket.
    cell_ = std::sqrt(extent.x() * extent.y() * 8.0 / static_cast<double>(points_.size()));
    cell_ = std::max(cell_, 1e-12);
    origin_ = lo;
    nx_ = static_cast<int>(extent.x() / cell_) + 1;
    ny_ = static_cast<int>(extent.y() / cell_) + 1;
    std::vector<std::size_t> bucket(points_.size());
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const int bx = std::min(nx_ - 1, static_cast<int>((points_[i].x.x() - lo.x()) / cell_));
        const int by = std::min(ny_ - 1, static_cast<int>((points_[i].x.y() - lo.y()) / cell_));
        bucket[i] = static_cast<std::size_t>(by) * nx_ + bx;
        ++start_[bucket[i] + 1];
    }
    for (std::size_t b = 1; b < start_.size(); ++b)
        start_[b] += start_[b - 1];
    order_.resize(points_.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i)
        order_[fill[bucket[i]]++] = i;
}

void EnergyField::for_each_in_disk(const Vec2 &center, double radius,
                                   const std::function<void(const EnergyPoint &)> &f) const {
    if (points_.empty() || radius < 0.0)
        return;
    const auto clamp_x = [this](double v) { return std::clamp(static_cast<int>(std::floor(v / cell_)), 0, nx_ - 1); };
    const auto clamp_y = [this](double v) { return std::clamp(static_cast<int>(std::floor(v / cell_)), 0, ny_ - 1); };
    const Vec2 lo = center - origin_ - Vec2::Constant(radius);
    const Vec2 hi = center - origin_ + Vec2::Constant(radius);
    if (hi.x() < 0.0 || hi.y() < 0.0 || lo.x() > nx_ * cell_ || lo.y() > ny_ * cell_)
        return;
    const double r2 = radius * radius;
    for (int by = clamp_y(lo.y()); by <= clamp_y(hi.y()); ++by)
        for (int bx = clamp_x(lo.x()); bx <= clamp_x(hi.x()); ++bx) {
            const std::size_t b = static_cast<std::size_t>(by) * nx_ + bx;
            for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
                const EnergyPoint &p = points_[order_[k]];
                if ((p.x - center).squaredNorm() <= r2)
                    f(p);
            }
        }
}

EnergyField strain_energy_density(const Mesh &mesh, const Eigen::VectorXd &dofs, double rho0,
                                  const EnergyOptions &options) {
    check_state(mesh, dofs);
    if (!(rho0 > 0.0))
        throw InvalidInput("rho0 must be positive");
    if (options.subdivisions < 1)
        throw InvalidInput("subdivisions must be at least 1");
    const int s = options.subdivisions;
    const GaussRule rule = gauss_rule(2);
    const double inv_rho2 = 1.0 / (rho0 * rho0);
    std::vector<EnergyPoint> points;
    points.reserve(mesh.num_elements() * 4 * s * s);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const ElementNodes X = element_nodes(mesh, e);
        const ElementVector ue = gather(dofs, mesh.elements[e]);
        for (int cy = 0; cy < s; ++cy)
            for (int cx = 0; cx < s; ++cx) {
                const double mx = -1.0 + (2.0 * cx + 1.0) / s;
                const double my = -1.0 + (2.0 * cy + 1.0) / s;
                for (std::size_t j = 0; j < rule.points.size(); ++j)
                    for (std::size_t i = 0; i < rule.points.size(); ++i) {
                        const PointOperators op =
                            point_operators(X, mx + rule.points[i] / s, my + rule.points[j] / s, options.shear);
                        EnergyPoint p;
                        p.x = op.x;
                        p.weight = op.weight * rule.weights[i] * rule.weights[j] / (s * s);
                        p.element = e;
                        p.sym_grad_sq = sym_sq(op.bending * ue);
                        p.shear_sq = (op.shear * ue).squaredNorm();
                        p.E2 = p.sym_grad_sq + inv_rho2 * p.shear_sq;
                        points.push_back(p);
                    }
            }
    }
    return EnergyField(std::move(points), rho0);
}

void write_energy_csv(std::ostream &out, const EnergyField &field) {
    write_schema_line(out, "energy-field");
    out << "x,y,weight,E2\n";
    for (const EnergyPoint &p : field.points())
        out << format_number(p.x.x()) << ',' << format_number(p.x.y()) << ',' << format_number(p.weight) << ','
            << format_number(p.E2) << '\n';
}

RegionIntegral region_energy(const EnergyField &field, const ElementMask &region) {
    RegionIntegral r;
    for (const EnergyPoint &p : field.points())
        if (p.element < region.flags.size() && region[p.element]) {
            r.value += p.weight * p.E2;
            r.empty = false;
        }
    return r;
}

RegionIntegral region_energy(const EnergyField &field, const Vec2 &center, double radius) {
    RegionIntegral r;
    field.for_each_in_disk(center, radius, [&r](const EnergyPoint &p) {
        r.value += p.weight * p.E2;
        r.empty = false;
    });
    return r;
}

Ratio korn_ratio(const Mesh &mesh, const Eigen::VectorXd &dofs, double rho0, ShearMode shear) {
    check_state(mesh, dofs);
    double grad = 0.0;
    double sym = 0.0;
    double gamma = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const ElementVector ue = gather(dofs, mesh.elements[e]);
        Eigen::Vector4d p1;
        Eigen::Vector4d p2;
        for (int k = 0; k < 4; ++k) {
            p1(k) = ue(kDofsPerNode * k);
            p2(k) = ue(kDofsPerNode * k + 1);
        }
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), shear, 2)) {
            grad += op.weight * ((op.shape_gradients * p1).squaredNorm() + (op.shape_gradients * p2).squaredNorm());
            sym += op.weight * sym_sq(op.bending * ue);
            gamma += op.weight * (op.shear * ue).squaredNorm();
        }
    }
    Ratio r;
    const double den = std::sqrt(sym) + std::sqrt(gamma) / rho0;
    if (den == 0.0) {
        r.degenerate = true;
        return r;
    }
    r.value = std::sqrt(grad) / den;
    return r;
}

Ratio poincare_ratio(const Mesh &mesh, const Eigen::VectorXd &nodal, double rho0, int components) {
    if (components < 1 || nodal.size() != components * static_cast<Eigen::Index>(mesh.num_nodes()))
        throw InvalidInput("field does not match the mesh");
    const auto element_values = [&](const std::array<int, 4> &q, int c) {
        Eigen::Vector4d u;
        for (int k = 0; k < 4; ++k)
            u(k) = nodal(components * q[k] + c);
        return u;
    };
    // Two passes (mean, then deviation) so constants cancel exactly.
    double area = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(components);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), ShearMode::full_integration, 2)) {
            area += op.weight;
            for (int c = 0; c < components; ++c)
                mean(c) += op.weight * op.shapes.dot(element_values(mesh.elements[e], c));
        }
    mean /= area;
    double variance = 0.0;
    double grad = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), ShearMode::full_integration, 2))
            for (int c = 0; c < components; ++c) {
                const Eigen::Vector4d u = element_values(mesh.elements[e], c);
                const double v = op.shapes.dot(u) - mean(c);
                variance += op.weight * v * v;
                grad += op.weight * (op.shape_gradients * (u.array() - u(0)).matrix()).squaredNorm();
            }
    Ratio r;
    if (grad == 0.0) {
        r.degenerate = true;
        return r;
    }
    r.value = std::sqrt(variance) / (rho0 * std::sqrt(grad));
    return r;
}

BoundarySpectrum boundary_spectrum(const Mesh &mesh, double rho0) {
    if (!(rho0 > 0.0))
        throw InvalidInput("rho0 must be positive");
    if (mesh.num_loops() == 0)
        throw InvalidInput("mesh has no closed boundary");
    BoundarySpectrum sp;
    sp.rho0 = rho0;
    std::map<int, int> local;
    for (std::size_t k = 0; k < mesh.num_loops(); ++k) {
        const std::size_t begin = mesh.loop_offsets[k];
        const std::size_t end = mesh.loop_offsets[k + 1];
        if (end - begin < 3)
            throw InvalidInput("boundary loop has fewer than 3 nodes");
        if (mesh.boundary_edges[end - 1].nodes[1] != mesh.boundary_edges[begin].nodes[0])
            throw InvalidInput("boundary loop is not closed");
    }
    for (const BoundaryEdge &edge : mesh.boundary_edges) {
        std::array<int, 2> ids{};
        for (int j = 0; j < 2; ++j) {
            auto [it, inserted] = local.emplace(edge.nodes[j], static_cast<int>(sp.nodes.size()));
            if (inserted)
                sp.nodes.push_back(edge.nodes[j]);
            ids[j] = it->second;
        }
        sp.edges.push_back(ids);
    }
    const Eigen::Index n = sp.size();
    sp.mass = Eigen::MatrixXd::Zero(n, n);
    sp.stiffness = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < sp.edges.size(); ++i) {
        const double L = mesh.boundary_edges[i].length;
        const auto [a, b] = sp.edges[i];
        sp.mass(a, a) += L / 3.0;
        sp.mass(b, b) += L / 3.0;
        sp.mass(a, b) += L / 6.0;
        sp.mass(b, a) += L / 6.0;
        sp.stiffness(a, a) += 1.0 / L;
        sp.stiffness(b, b) += 1.0 / L;
        sp.stiffness(a, b) -= 1.0 / L;
        sp.stiffness(b, a) -= 1.0 / L;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(sp.stiffness, sp.mass);
    if (eig.info() != Eigen::Success)
        throw NumericalFailure("boundary eigendecomposition failed");
    sp.eigenvalues = eig.eigenvalues().cwiseMax(0.0);
    sp.eigenvectors = eig.eigenvectors();
    return sp;
}

Eigen::VectorXd boundary_moments(const BoundarySpectrum &spectrum, const Mesh &mesh,
                                 const std::vector<std::array<double, 2>> &samples) {
    if (samples.size() != spectrum.edges.size() || samples.size() != mesh.boundary_edges.size())
        throw InvalidInput("boundary samples do not match the mesh boundary");
    const auto t = edge_gauss_abscissae();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(spectrum.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = 0.5 * mesh.boundary_edges[i].length;
        const auto [a, c] = spectrum.edges[i];
        for (int g = 0; g < 2; ++g) {
            b(a) += w * (1.0 - t[g]) * samples[i][g];
            b(c) += w * t[g] * samples[i][g];
        }
    }
    return b;
}

double fractional_norm_from_moments(const BoundarySpectrum &spectrum, const Eigen::VectorXd &moments, double s) {
    if (moments.size() != spectrum.size())
        throw InvalidInput("moment vector does not match the boundary");
    const Eigen::VectorXd c = spectrum.eigenvectors.transpose() * moments;
    const double r2 = spectrum.rho0 * spectrum.rho0;
    double sum = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k)
        sum += std::pow(1.0 + r2 * spectrum.eigenvalues(k), s) * c(k) * c(k);
    return std::sqrt(sum);
}

double boundary_fractional_norm(const BoundarySpectrum &spectrum, const Eigen::VectorXd &nodal, double s) {
    if (nodal.size() != spectrum.size())
        throw InvalidInput("boundary function does not match the boundary");
    return fractional_norm_from_moments(spectrum, spectrum.mass * nodal, s);
}

std::vector<std::array<double, 2>> sample_boundary_function(const BoundarySpectrum &spectrum, const Mesh &mesh,
                                                            const Eigen::VectorXd &nodal) {
    if (nodal.size() != spectrum.size() || spectrum.edges.size() != mesh.boundary_edges.size())
        throw InvalidInput("boundary function does not match the boundary");
    const auto t = edge_gauss_abscissae();
    std::vector<std::array<double, 2>> out(spectrum.edges.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto [a, b] = spectrum.edges[i];
        for (int g = 0; g < 2; ++g)
            out[i][g] = (1.0 - t[g]) * nodal(a) + t[g] * nodal(b);
    }
    return out;
}

FrequencyReport frequency(const BoundarySpectrum &spectrum, const Mesh &mesh, const BoundaryLoad &load) {
    if (load.samples.size() != mesh.boundary_edges.size())
        throw InvalidInput("load does not match the mesh boundary");
    std::vector<std::array<double, 2>> q(load.samples.size());
    std::vector<std::array<double, 2>> m1(load.samples.size());
    std::vector<std::array<double, 2>> m2(load.samples.size());
    for (std::size_t i = 0; i < load.samples.size(); ++i)
        for (int g = 0; g < 2; ++g) {
            q[i][g] = load.samples[i][g].force;
            m1[i][g] = load.samples[i][g].moment.x();
            m2[i][g] = load.samples[i][g].moment.y();
        }
    const Eigen::VectorXd bq = boundary_moments(spectrum, mesh, q);
    const Eigen::VectorXd b1 = boundary_moments(spectrum, mesh, m1);
    const Eigen::VectorXd b2 = boundary_moments(spectrum, mesh, m2);
    const auto pair_norm = [&](double s) {
        const double a = fractional_norm_from_moments(spectrum, b1, s);
        const double b = fractional_norm_from_moments(spectrum, b2, s);
        return std::sqrt(a * a + b * b);
    };
    FrequencyReport r;
    r.M_half = pair_norm(-0.5);
    r.M_one = pair_norm(-1.0);
    r.Q_half = fractional_norm_from_moments(spectrum, bq, -0.5);
    r.Q_one = fractional_norm_from_moments(spectrum, bq, -1.0);
    r.norm_half = r.M_half + spectrum.rho0 * r.Q_half;
    r.norm_one = r.M_one + spectrum.rho0 * r.Q_one;
    if (!(r.norm_one > 0.0))
        throw InvalidInput("frequency ratio of a zero load is undefined");
    r.F = r.norm_half / r.norm_one;
    return r;
}

double stability_ratio(const Mesh &mesh, const Eigen::VectorXd &dofs, double rho0, const FrequencyReport &freq) {
    check_state(mesh, dofs);
    double phi = 0.0;
    double dphi = 0.0;
    double w = 0.0;
    double dw = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const ElementVector ue = gather(dofs, mesh.elements[e]);
        Eigen::Vector4d p1;
        Eigen::Vector4d p2;
        Eigen::Vector4d pw;
        for (int k = 0; k < 4; ++k) {
            p1(k) = ue(kDofsPerNode * k);
            p2(k) = ue(kDofsPerNode * k + 1);
            pw(k) = ue(kDofsPerNode * k + 2);
        }
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), ShearMode::full_integration, 2)) {
            const Eigen::Vector3d v = op.values * ue;
            phi += op.weight * v.head<2>().squaredNorm();
            w += op.weight * v(2) * v(2);
            dphi += op.weight * ((op.shape_gradients * p1).squaredNorm() + (op.shape_gradients * p2).squaredNorm());
            dw += op.weight * (op.shape_gradients * pw).squaredNorm();
        }
    }
    const double r2 = rho0 * rho0;
    const double num = std::sqrt(phi / r2 + dphi) + std::sqrt(w / r2 + dw) / rho0;
    if (!(freq.norm_half > 0.0))
        throw InvalidInput("stability ratio of a zero load is undefined");
    return num * r2 / freq.norm_half;
}

DiscretizationError discretization_error(const Mesh &mesh, const Eigen::VectorXd &dofs, const ExactPlate &exact,
                                         double rho0) {
    check_state(mesh, dofs);
    const double inv_rho2 = 1.0 / (rho0 * rho0);
    DiscretizationError err;
    double assumed = 0.0;
    double phi2 = 0.0;
    double ew = 0.0;
    double ew2 = 0.0;
    double area = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const ElementVector ue = gather(dofs, mesh.elements[e]);
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), ShearMode::assumed, 3)) {
            const Vec2 phi = exact.phi(op.x);
            const Eigen::Matrix2d G = exact.grad_phi(op.x);
            const Vec2 gamma = phi + exact.grad_w(op.x);
            const Eigen::Vector3d curv(G(0, 0), G(1, 1), G(0, 1) + G(1, 0));
            const double bend = sym_sq(op.bending * ue - curv);
            err.energy_sq += op.weight * (bend + inv_rho2 * (op.raw_shear * ue - gamma).squaredNorm());
            assumed += op.weight * (bend + inv_rho2 * (op.shear * ue - gamma).squaredNorm());
            const Eigen::Vector3d v = op.values * ue;
            phi2 += op.weight * (v.head<2>() - phi).squaredNorm();
            const double d = v(2) - exact.w(op.x);
            ew += op.weight * d;
            ew2 += op.weight * d * d;
            area += op.weight;
        }
    }
    err.energy = std::sqrt(err.energy_sq);
    err.assumed_energy = std::sqrt(assumed);
    err.l2 = std::sqrt(phi2) + std::sqrt(std::max(0.0, ew2 - ew * ew / area));
    return err;
}

} // namespace rmplate
