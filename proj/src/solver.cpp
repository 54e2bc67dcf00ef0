#include "rmplate/solver.hpp"

#include "rmplate/csv.hpp"
#include "rmplate/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace rmplate {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::Index dof(int node, int component) { return kDofsPerNode * static_cast<Eigen::Index>(node) + component; }

ElementMatrix element_stiffness(const ElementNodes &X, const ElementCoefficients &coef, ShearMode mode) {
    ElementMatrix Ke = ElementMatrix::Zero();
    for (const PointOperators &op : element_quadrature(X, mode, 2)) {
        Ke.noalias() += op.weight * op.bending.transpose() * coef.bending * op.bending;
        Ke.noalias() += op.weight * op.shear.transpose() * coef.shear * op.shear;
    }
    return Ke;
}

void assemble_range(const Mesh &mesh, const PlateTensors &tensors, const ElementMask *mask,
                    const InclusionMaterial *inclusion, ShearMode mode, std::size_t begin, std::size_t end,
                    std::vector<Triplet> &out) {
    out.reserve((end - begin) * kElementDofs * kElementDofs);
    for (std::size_t e = begin; e < end; ++e) {
        const ElementMatrix Ke =
            element_stiffness(element_nodes(mesh, e), composite_coefficients(tensors, inclusion, mask, e), mode);
        const auto &q = mesh.elements[e];
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < kDofsPerNode; ++i)
                for (int b = 0; b < 4; ++b)
                    for (int j = 0; j < kDofsPerNode; ++j)
                        out.emplace_back(dof(q[a], i), dof(q[b], j), Ke(kDofsPerNode * a + i, kDofsPerNode * b + j));
    }
}

Eigen::Vector3d kernel_components(const LinearSystem &system, const Eigen::VectorXd &f) {
    return system.kernel.transpose() * f;
}

void check_rhs_compatible(const LinearSystem &system, double tol) {
    const double fnorm = system.rhs.norm();
    if (fnorm == 0.0)
        return;
    const Eigen::Vector3d k = kernel_components(system, system.rhs);
    for (int i = 0; i < 3; ++i) {
        const double scale = system.kernel.col(i).norm() * fnorm;
        if (std::abs(k(i)) > tol * scale) {
            std::ostringstream msg;
            msg << "incompatible load: rhs has a component " << k(i) / scale << " (relative) along rigid mode "
                << i + 1;
            throw InvalidInput(msg.str());
        }
    }
}

} // namespace

std::array<double, 2> edge_gauss_abscissae() {
    const double d = 0.5 / std::sqrt(3.0);
    return {0.5 - d, 0.5 + d};
}

std::array<Vec2, 2> edge_gauss_points(const Mesh &mesh, const BoundaryEdge &edge) {
    const Vec2 &a = mesh.nodes[edge.nodes[0]];
    const Vec2 &b = mesh.nodes[edge.nodes[1]];
    const auto t = edge_gauss_abscissae();
    return {a + t[0] * (b - a), a + t[1] * (b - a)};
}

BoundaryLoad sample_load(const Mesh &mesh, const LoadFunction &f, std::string family) {
    BoundaryLoad load;
    load.family = std::move(family);
    load.samples.reserve(mesh.boundary_edges.size());
    for (const BoundaryEdge &edge : mesh.boundary_edges) {
        const auto x = edge_gauss_points(mesh, edge);
        load.samples.push_back({f(x[0], edge), f(x[1], edge)});
    }
    return load;
}

BoundaryLoad pure_bending_load(const Mesh &mesh, const PlateTensors &tensors, double a) {
    return sample_load(
        mesh,
        [&](const Vec2 &, const BoundaryEdge &edge) {
            const auto e = static_cast<std::size_t>(edge.element);
            return LoadSample{0.0, tensors.bending[e] * a * (1.0 + tensors.poisson[e]) * edge.normal};
        },
        "pure_bending");
}

BoundaryLoad twist_load(const Mesh &mesh, double c) {
    return sample_load(
        mesh,
        [c](const Vec2 &, const BoundaryEdge &edge) {
            return LoadSample{0.0, c * Vec2(edge.normal.y(), edge.normal.x())};
        },
        "twist");
}

BoundaryLoad edge_moment_load(const Mesh &mesh, double c) {
    return sample_load(
        mesh, [c](const Vec2 &, const BoundaryEdge &edge) { return LoadSample{0.0, Vec2(c * edge.normal.x(), 0.0)}; },
        "edge_moment");
}

BoundaryLoad shear_bending_load(const Mesh &mesh, double q) {
    const Vec2 xc = mesh.area_centroid();
    return sample_load(
        mesh,
        [q, xc](const Vec2 &x, const BoundaryEdge &edge) {
            const double n1 = edge.normal.x();
            return LoadSample{q * n1, Vec2(q * (x.x() - xc.x()) * n1, 0.0)};
        },
        "shear_bending");
}

BoundaryLoad random_load(const Mesh &mesh, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // Uniform in [-1, 1] from raw 64-bit draws so the sequence does not
    // depend on the standard library's distribution implementation.
    const auto draw = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
    std::array<std::array<double, 6>, 3> c{};
    for (auto &field : c)
        for (double &v : field)
            v = draw();
    const Vec2 xc = mesh.area_centroid();
    const auto poly = [](const std::array<double, 6> &k, const Vec2 &p) {
        return k[0] + k[1] * p.x() + k[2] * p.y() + k[3] * p.x() * p.y() + k[4] * p.x() * p.x() +
               k[5] * p.y() * p.y();
    };
    BoundaryLoad load = sample_load(
        mesh,
        [&](const Vec2 &x, const BoundaryEdge &) {
            const Vec2 p = x - xc;
            return LoadSample{poly(c[0], p), Vec2(poly(c[1], p), poly(c[2], p))};
        },
        "random");
    make_compatible(load, mesh);
    return load;
}

void make_compatible(BoundaryLoad &load, const Mesh &mesh) {
    if (load.samples.size() != mesh.boundary_edges.size())
        throw InvalidInput("load does not match the mesh boundary");
    const double perimeter = mesh.perimeter();
    double force = 0.0;
    for (std::size_t i = 0; i < load.samples.size(); ++i)
        for (const LoadSample &s : load.samples[i])
            force += 0.5 * mesh.boundary_edges[i].length * s.force;
    for (auto &pair : load.samples)
        for (LoadSample &s : pair)
            s.force -= force / perimeter;
    const Compatibility c = load_compatibility(mesh, load);
    for (auto &pair : load.samples)
        for (LoadSample &s : pair)
            s.moment += c.moment / perimeter;
}

bool Compatibility::satisfied(double tol) const {
    constexpr double tiny = 1e-300;
    if (std::isinf(tol))
        return true;
    return std::abs(force) <= tol * force_scale + tiny && moment.norm() <= tol * moment_scale + tiny;
}

Compatibility load_compatibility(const Mesh &mesh, const BoundaryLoad &load) {
    if (load.samples.size() != mesh.boundary_edges.size())
        throw InvalidInput("load does not match the mesh boundary");
    const Vec2 xc = mesh.area_centroid();
    Compatibility c;
    for (std::size_t i = 0; i < load.samples.size(); ++i) {
        const BoundaryEdge &edge = mesh.boundary_edges[i];
        const auto x = edge_gauss_points(mesh, edge);
        const double w = 0.5 * edge.length;
        for (int g = 0; g < 2; ++g) {
            const LoadSample &s = load.samples[i][g];
            c.force += w * s.force;
            c.moment += w * (s.force * x[g] - s.moment);
            c.force_scale += w * std::abs(s.force);
            c.moment_scale += w * (std::abs(s.force) * (x[g] - xc).norm() + s.moment.norm());
        }
    }
    return c;
}

BoundaryLoad read_load_csv(std::istream &in, const Mesh &mesh) {
    BoundaryLoad load;
    load.family = "csv";
    load.samples.assign(mesh.boundary_edges.size(), {});
    std::vector<std::array<char, 2>> seen(mesh.boundary_edges.size(), {0, 0});
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long edge = 0;
        int point = 0;
        double q = 0.0;
        double m1 = 0.0;
        double m2 = 0.0;
        if (!(ls >> edge)) {
            if (lineno <= 2)
                continue; // column header
            throw InvalidInput("load csv line " + std::to_string(lineno) + ": expected numbers");
        }
        if (!(ls >> point >> q >> m1 >> m2))
            throw InvalidInput("load csv line " + std::to_string(lineno) + ": expected edge_id,point,Q,M1,M2");
        if (edge < 0 || static_cast<std::size_t>(edge) >= load.samples.size() || point < 0 || point > 1)
            throw InvalidInput("load csv line " + std::to_string(lineno) + ": edge or point out of range");
        load.samples[edge][point] = {q, Vec2(m1, m2)};
        seen[edge][point] = 1;
    }
    for (const auto &s : seen)
        if (!s[0] || !s[1])
            throw InvalidInput("load csv does not cover every boundary edge Gauss point");
    return load;
}

void write_load_csv(std::ostream &out, const BoundaryLoad &load) {
    write_schema_line(out, "boundary-load");
    out << "edge_id,point,Q,M1,M2\n";
    for (std::size_t i = 0; i < load.samples.size(); ++i)
        for (int g = 0; g < 2; ++g) {
            const LoadSample &s = load.samples[i][g];
            out << i << ',' << g << ',' << format_number(s.force) << ',' << format_number(s.moment.x()) << ','
                << format_number(s.moment.y()) << '\n';
        }
}

LinearSystem assemble_stiffness(const Mesh &mesh, const PlateTensors &tensors, const ElementMask *mask,
                                const InclusionMaterial *inclusion, const AssemblyOptions &options) {
    if (tensors.num_elements() != mesh.num_elements())
        throw InvalidInput("material does not match the mesh");
    if (mask && mask->flags.size() != mesh.num_elements())
        throw InvalidInput("inclusion mask does not match the mesh");
    if (mask && !mask->empty() && !inclusion)
        throw InvalidInput("inclusion mask given without inclusion material");

    const std::size_t ne = mesh.num_elements();
    const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.jobs, 1)), 1, ne);
    std::vector<std::vector<Triplet>> parts(jobs);
    const auto chunk = [ne, jobs](std::size_t k) { return ne * k / jobs; };
    if (jobs == 1) {
        assemble_range(mesh, tensors, mask, inclusion, options.shear, 0, ne, parts[0]);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(jobs);
        for (std::size_t k = 0; k < jobs; ++k)
            workers.emplace_back([&, k] {
                try {
                    assemble_range(mesh, tensors, mask, inclusion, options.shear, chunk(k), chunk(k + 1), parts[k]);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        for (auto &t : workers)
            t.join();
        for (auto &err : errors)
            if (err)
                std::rethrow_exception(err);
    }
    // Concatenate in element order so the summation order does not depend on jobs.
    std::vector<Triplet> triplets;
    std::size_t total = 0;
    for (const auto &p : parts)
        total += p.size();
    triplets.reserve(total);
    for (auto &p : parts)
        triplets.insert(triplets.end(), p.begin(), p.end());

    const Eigen::Index n = kDofsPerNode * static_cast<Eigen::Index>(mesh.num_nodes());
    LinearSystem system;
    system.shear = options.shear;
    system.stiffness.resize(n, n);
    system.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    system.stiffness.makeCompressed();

    system.constraints = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, n);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto &q = mesh.elements[e];
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), options.shear, 2))
            for (int k = 0; k < 4; ++k)
                for (int c = 0; c < kDofsPerNode; ++c)
                    system.constraints(c, dof(q[k], c)) += op.weight * op.shapes(k);
    }
    system.kernel = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(n, 3);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const int node = static_cast<int>(i);
        const Vec2 &x = mesh.nodes[i];
        system.kernel(dof(node, 0), 0) = 1.0;
        system.kernel(dof(node, 2), 0) = -x.x();
        system.kernel(dof(node, 1), 1) = 1.0;
        system.kernel(dof(node, 2), 1) = -x.y();
        system.kernel(dof(node, 2), 2) = 1.0;
    }
    system.rhs = Eigen::VectorXd::Zero(n);
    return system;
}

LoadVector assemble_load(const Mesh &mesh, const BoundaryLoad &load, double tol) {
    if (load.samples.size() != mesh.boundary_edges.size())
        throw InvalidInput("load does not match the mesh boundary");
    LoadVector result;
    result.rhs = Eigen::VectorXd::Zero(kDofsPerNode * static_cast<Eigen::Index>(mesh.num_nodes()));
    const auto t = edge_gauss_abscissae();
    for (std::size_t i = 0; i < load.samples.size(); ++i) {
        const BoundaryEdge &edge = mesh.boundary_edges[i];
        const double w = 0.5 * edge.length;
        for (int g = 0; g < 2; ++g) {
            const LoadSample &s = load.samples[i][g];
            const std::array<double, 2> N{1.0 - t[g], t[g]};
            for (int k = 0; k < 2; ++k) {
                const int node = edge.nodes[k];
                result.rhs(dof(node, 0)) += w * N[k] * s.moment.x();
                result.rhs(dof(node, 1)) += w * N[k] * s.moment.y();
                result.rhs(dof(node, 2)) += w * N[k] * s.force;
            }
        }
    }
    result.compatibility = load_compatibility(mesh, load);
    if (!result.compatibility.satisfied(tol)) {
        std::ostringstream msg;
        msg << "load violates compatibility: int Q = " << result.compatibility.force << ", int (Q x - M) = ("
            << result.compatibility.moment.x() << ", " << result.compatibility.moment.y() << ")";
        throw InvalidInput(msg.str());
    }
    return result;
}

PlateState solve(const LinearSystem &system, const SolveOptions &options) {
    const Eigen::Index n = system.num_dofs();
    PlateState state;
    state.dofs = Eigen::VectorXd::Zero(n);
    if (system.rhs.size() != n)
        throw InvalidInput("rhs size does not match the stiffness");
    if (system.rhs.norm() == 0.0)
        return state;
    check_rhs_compatible(system, options.compatibility_tol);

    // Bordered solve of [K C^T; C 0]. K is singular, so factor the SPD
    // A = K + E s E^T (all three dofs of node 0 stiffened) and carry both the
    // multipliers and the correction v = -s E^T u through a 6x6 Schur
    // complement: [A G; G^T -D] with G = [C^T E], D = diag(0, 0, 0, 1/s, 1/s, 1/s).
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        s = std::max(s, std::abs(system.stiffness.coeff(i, i)));
    if (!(s > 0.0))
        throw NumericalFailure("stiffness has no positive diagonal");
    Eigen::SparseMatrix<double> A = system.stiffness;
    for (int c = 0; c < kDofsPerNode; ++c)
        A.coeffRef(c, c) += s;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw NumericalFailure("sparse LDL^T factorization of the stiffened block failed");

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, 6);
    G.leftCols(3) = system.constraints.transpose();
    for (int c = 0; c < 3; ++c)
        G(c, 3 + c) = 1.0;
    const Eigen::MatrixXd AG = ldlt.solve(G);
    Eigen::Matrix<double, 6, 6> H = G.transpose() * AG;
    for (int c = 3; c < 6; ++c)
        H(c, c) -= 1.0 / s;
    const Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> schur(H);
    if (!schur.isInvertible())
        throw NumericalFailure("saddle Schur complement is singular");

    // Solves the saddle system for residuals (rf, rc); returns (du, dmu).
    const auto bordered = [&](const Eigen::VectorXd &rf, const Eigen::Vector3d &rc) {
        const Eigen::VectorXd Arf = ldlt.solve(rf);
        Eigen::Matrix<double, 6, 1> g = G.transpose() * Arf;
        g.head<3>() -= rc;
        const Eigen::Matrix<double, 6, 1> y = schur.solve(g);
        return std::pair<Eigen::VectorXd, Eigen::Vector3d>(Arf - AG * y, y.head<3>());
    };
    auto [u, mu] = bordered(system.rhs, Eigen::Vector3d::Zero());
    // One step of iterative refinement on the original saddle residual.
    const Eigen::VectorXd rf = system.rhs - system.stiffness * u - system.constraints.transpose() * mu;
    const Eigen::Vector3d rc = -(system.constraints * u);
    const auto [du, dmu] = bordered(rf, rc);
    u += du;
    if (!u.allFinite())
        throw NumericalFailure("saddle solve produced non-finite values");
    state.dofs = u;
    state.residual = (system.stiffness * state.dofs - system.rhs).norm() / system.rhs.norm();
    state.normalization = system.constraints * state.dofs;
    if (!(state.residual <= options.residual_tol)) {
        std::ostringstream msg;
        msg << "solve residual " << state.residual << " exceeds " << options.residual_tol;
        throw NumericalFailure(msg.str());
    }
    return state;
}

KernelReport stiffness_kernel(const LinearSystem &system, const OracleOptions &options) {
    const Eigen::Index n = system.num_dofs();
    if (n > options.max_dofs)
        throw InvalidInput("dense oracle dof cap exceeded (" + std::to_string(n) + " > " +
                           std::to_string(options.max_dofs) + ")");
    const Eigen::MatrixXd K = Eigen::MatrixXd(system.stiffness);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (K + K.transpose()));
    if (eig.info() != Eigen::Success)
        throw NumericalFailure("dense eigendecomposition failed");
    KernelReport report;
    report.eigenvalues = eig.eigenvalues();
    const double top = std::max(std::abs(report.eigenvalues(n - 1)), std::abs(report.eigenvalues(0)));
    while (report.dimension < n && std::abs(report.eigenvalues(report.dimension)) < options.kernel_tol * top)
        ++report.dimension;
    report.basis = eig.eigenvectors().leftCols(report.dimension);
    for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd k = system.kernel.col(i).normalized();
        const Eigen::VectorXd r = k - report.basis * (report.basis.transpose() * k);
        report.rigid_mode_defect = std::max(report.rigid_mode_defect, r.norm());
    }
    return report;
}

PlateState dense_oracle_solve(const LinearSystem &system, const OracleOptions &options) {
    const Eigen::Index n = system.num_dofs();
    if (n > options.max_dofs)
        throw InvalidInput("dense oracle dof cap exceeded (" + std::to_string(n) + " > " +
                           std::to_string(options.max_dofs) + ")");
    PlateState state;
    state.dofs = Eigen::VectorXd::Zero(n);
    if (system.rhs.size() != n)
        throw InvalidInput("rhs size does not match the stiffness");
    const double fnorm = system.rhs.norm();
    if (fnorm == 0.0)
        return state;

    const Eigen::MatrixXd K = Eigen::MatrixXd(system.stiffness);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (K + K.transpose()));
    if (eig.info() != Eigen::Success)
        throw NumericalFailure("dense eigendecomposition failed");
    const Eigen::VectorXd &lambda = eig.eigenvalues();
    const Eigen::MatrixXd &V = eig.eigenvectors();
    const double top = lambda.cwiseAbs().maxCoeff();
    Eigen::Index kernel_dim = 0;
    while (kernel_dim < n && std::abs(lambda(kernel_dim)) < options.kernel_tol * top)
        ++kernel_dim;
    if (kernel_dim != 3)
        throw NumericalFailure("stiffness kernel has dimension " + std::to_string(kernel_dim) + ", expected 3");

    const Eigen::MatrixXd Z = V.leftCols(3);
    const Eigen::VectorXd coeffs = V.transpose() * system.rhs;
    const double kernel_part = coeffs.head(3).norm();
    if (kernel_part > options.compatibility_tol * fnorm) {
        std::ostringstream msg;
        msg << "incompatible load: rhs kernel component " << kernel_part / fnorm << " (relative)";
        throw InvalidInput(msg.str());
    }
    Eigen::VectorXd scaled = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 3; k < n; ++k)
        scaled(k) = coeffs(k) / lambda(k);
    Eigen::VectorXd u = V * scaled;
    // Add the kernel combination that zeroes the normalization functionals.
    const Eigen::Matrix3d CZ = system.constraints * Z;
    const Eigen::Vector3d c = CZ.fullPivLu().solve(-(system.constraints * u));
    u += Z * c;

    state.dofs = u;
    state.residual = (system.stiffness * u - system.rhs).norm() / fnorm;
    state.normalization = system.constraints * u;
    return state;
}

double bilinear(const LinearSystem &system, const Eigen::VectorXd &u, const Eigen::VectorXd &v) {
    return u.dot(system.stiffness * v);
}

ResidualReport residual_check(const Eigen::VectorXd &dofs, const Mesh &mesh, const PlateTensors &tensors,
                              const BoundaryLoad &load, const ElementMask *mask, const InclusionMaterial *inclusion,
                              ShearMode shear) {
    LinearSystem system = assemble_stiffness(mesh, tensors, mask, inclusion, {shear, 1});
    const Eigen::VectorXd f = assemble_load(mesh, load, std::numeric_limits<double>::infinity()).rhs;
    if (dofs.size() != system.num_dofs())
        throw InvalidInput("state does not match the mesh");
    ResidualReport report;
    const Eigen::VectorXd r = system.stiffness * dofs - f;
    const double fnorm = f.norm();
    report.galerkin_relative = fnorm > 0.0 ? r.norm() / fnorm : r.norm();
    report.galerkin_max = r.cwiseAbs().maxCoeff();

    // Bubble tests vanish on element edges, so the boundary load drops out and
    // each element residual stands alone.
    report.element_enriched.assign(mesh.num_elements(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const ElementNodes X = element_nodes(mesh, e);
        const ElementCoefficients coef = composite_coefficients(tensors, inclusion, mask, e);
        const ElementVector ue = gather(dofs, mesh.elements[e]);
        Eigen::Vector3d res = Eigen::Vector3d::Zero();
        const GaussRule rule = gauss_rule(3);
        for (std::size_t j = 0; j < rule.points.size(); ++j)
            for (std::size_t i = 0; i < rule.points.size(); ++i) {
                const double xi = rule.points[i];
                const double eta = rule.points[j];
                const PointOperators op = point_operators(X, xi, eta, shear);
                const double wt = op.weight * rule.weights[i] * rule.weights[j];
                const Eigen::Vector3d moment = coef.bending * (op.bending * ue);
                const Eigen::Vector2d shear_force = coef.shear * (op.shear * ue);
                const double b = (1.0 - xi * xi) * (1.0 - eta * eta);
                const Vec2 db = op.jacobian_inverse *
                                Vec2(-2.0 * xi * (1.0 - eta * eta), -2.0 * eta * (1.0 - xi * xi));
                // psi = (b, 0): curvature (db_x, 0, db_y), shear (b, 0)
                res(0) += wt * (moment(0) * db.x() + moment(2) * db.y() + shear_force.x() * b);
                // psi = (0, b): curvature (0, db_y, db_x), shear (0, b)
                res(1) += wt * (moment(1) * db.y() + moment(2) * db.x() + shear_force.y() * b);
                // v = b: shear grad b
                res(2) += wt * shear_force.dot(db);
            }
        report.element_enriched[e] = res.norm();
        report.enriched_max = std::max(report.enriched_max, res.norm());
    }
    return report;
}

Eigen::VectorXd interpolate(const Mesh &mesh, const std::function<Eigen::Vector3d(const Vec2 &)> &field) {
    Eigen::VectorXd u(kDofsPerNode * static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
        u.segment<3>(kDofsPerNode * static_cast<Eigen::Index>(i)) = field(mesh.nodes[i]);
    return u;
}

void write_state_csv(std::ostream &out, const Mesh &mesh, const PlateState &state) {
    write_schema_line(out, "plate-state");
    out << "node_id,x,y,phi1,phi2,w\n";
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
        out << i << ',' << format_number(mesh.nodes[i].x()) << ',' << format_number(mesh.nodes[i].y()) << ','
            << format_number(state.phi1(i)) << ',' << format_number(state.phi2(i)) << ','
            << format_number(state.w(i)) << '\n';
}

} // namespace rmplate
