#include "rmplate/error.hpp"
#include "rmplate/functionals.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace rmplate;

namespace {

PlateTensors unit_tensors(std::size_t elements) {
    return derive_plate_tensors(IsotropicMaterial::uniform(elements, 1, 1, 1, 1, 5, 2));
}

PlateState solved(const Mesh &m, const PlateTensors &t, const BoundaryLoad &load,
                  ShearMode shear = ShearMode::assumed) {
    LinearSystem s = assemble_stiffness(m, t, nullptr, nullptr, {shear, 1});
    s.rhs = assemble_load(m, load).rhs;
    return solve(s);
}

Eigen::VectorXd pure_bending_state(const Mesh &m, double a) {
    const Vec2 c = m.area_centroid();
    return interpolate(m, [&](const Vec2 &x) {
        const Vec2 d = x - c;
        return Eigen::Vector3d(a * d.x(), a * d.y(), -0.5 * a * d.squaredNorm());
    });
}

Mesh hexagon_mesh(double size) { return generate_mesh(make_domain(regular_polygon({0, 0}, 1, 6)), size); }

BoundaryLoad moment_load(const BoundarySpectrum &sp, const Mesh &m, const Eigen::VectorXd &M1,
                         const Eigen::VectorXd &Q) {
    const auto a = sample_boundary_function(sp, m, M1);
    const auto q = sample_boundary_function(sp, m, Q);
    BoundaryLoad load;
    load.samples.resize(m.boundary_edges.size());
    for (std::size_t i = 0; i < load.samples.size(); ++i)
        for (int g = 0; g < 2; ++g)
            load.samples[i][g] = LoadSample{q[i][g], Vec2(a[i][g], 0.0)};
    return load;
}

} // namespace

TEST(BoundaryWork, ZeroLoad) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 3, 3);
    const BoundaryLoad zero = sample_load(m, [](const Vec2 &, const BoundaryEdge &) { return LoadSample{}; }, "zero");
    EXPECT_EQ(boundary_work(m, zero, Eigen::VectorXd::Random(48)), 0.0);
}

TEST(BoundaryWork, PureBendingClosedForm) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 10, 10);
    const PlateTensors t = unit_tensors(100);
    const BoundaryLoad load = pure_bending_load(m, t, 1.0);
    EXPECT_NEAR(boundary_work(m, load, solved(m, t, load).dofs), 5.0 / 9.0, 1e-13);
    // The traction of the exact field does the same work on it.
    EXPECT_NEAR(boundary_work(m, load, pure_bending_state(m, 1.0)), 5.0 / 9.0, 1e-13);
}

TEST(BoundaryWork, EqualsQuadraticEnergy) {
    const Mesh m = hexagon_mesh(0.1);
    const PlateTensors t = unit_tensors(m.num_elements());
    for (std::uint64_t seed : {1, 2, 3}) {
        const BoundaryLoad load = random_load(m, seed);
        LinearSystem s = assemble_stiffness(m, t);
        s.rhs = assemble_load(m, load).rhs;
        const PlateState u = solve(s);
        const double W = boundary_work(m, load, u.dofs);
        EXPECT_NEAR(W, bilinear(s, u.dofs, u.dofs), 1e-8 * W);
    }
}

TEST(WorkReport, Gap) {
    const WorkReport r = work_report(2.0, 1.5);
    EXPECT_EQ(r.gap, 0.5);
    EXPECT_EQ(r.relative_gap, 0.25);
}

TEST(EnergyDensity, KernelStateIsZero) {
    const Mesh m = hexagon_mesh(0.2);
    const Eigen::VectorXd k = interpolate(m, [](const Vec2 &x) { return Eigen::Vector3d(0.3, -1.1, -0.3 * x.x() + 1.1 * x.y() + 2); });
    const EnergyField f = strain_energy_density(m, k, 1.0);
    for (const EnergyPoint &p : f.points())
        EXPECT_LT(p.E2, 1e-28);
}

TEST(EnergyDensity, PureBendingIsTwo) {
    const Mesh m = structured_mesh(0, 0, 1, 2, 5, 9);
    const EnergyField f = strain_energy_density(m, pure_bending_state(m, 1.0), 1.0, {ShearMode::assumed, 2});
    EXPECT_EQ(f.points().size(), 45u * 16u);
    for (const EnergyPoint &p : f.points()) {
        EXPECT_NEAR(p.E2, 2.0, 1e-12);
        EXPECT_NEAR(p.sym_grad_sq, 2.0, 1e-12);
    }
    EXPECT_NEAR(f.total(), 4.0, 1e-12);
}

TEST(EnergyDensity, SolvedPureBending) {
    for (ShearMode mode : {ShearMode::assumed, ShearMode::full_integration}) {
        double previous = 1e300;
        for (int n : {4, 8, 16}) {
            const Mesh m = structured_mesh(0, 0, 1, 1, n, n);
            const PlateTensors t = unit_tensors(m.num_elements());
            const EnergyField f =
                strain_energy_density(m, solved(m, t, pure_bending_load(m, t, 1.0), mode).dofs, 1.0, {mode, 1});
            double dev = 0.0;
            for (const EnergyPoint &p : f.points())
                dev = std::max(dev, std::abs(p.E2 - 2.0));
            if (mode == ShearMode::assumed)
                EXPECT_LT(dev, 1e-10);
            else
                EXPECT_LT(dev, previous);
            previous = dev;
        }
    }
}

TEST(RegionEnergy, FullMaskAndDisks) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 50, 50);
    const EnergyField f = strain_energy_density(m, pure_bending_state(m, 1.0), 1.0, {ShearMode::assumed, 8});
    const ElementMask all = make_mask(m, std::vector<char>(m.num_elements(), 1));
    const RegionIntegral full = region_energy(f, all);
    EXPECT_FALSE(full.empty);
    EXPECT_NEAR(full.value, 2.0, 1e-10);

    const RegionIntegral outside = region_energy(f, Vec2(3, 3), 0.5);
    EXPECT_TRUE(outside.empty);
    EXPECT_EQ(outside.value, 0.0);

    for (double r : {0.1, 0.2, 0.3}) {
        const double exact = 2 * std::numbers::pi * r * r;
        EXPECT_NEAR(region_energy(f, Vec2(0.5, 0.5), r).value, exact, 0.01 * exact) << r;
    }
}

TEST(RegionEnergy, AdditiveAndMonotone) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 12, 12);
    const PlateTensors t = unit_tensors(m.num_elements());
    const EnergyField f = strain_energy_density(m, solved(m, t, random_load(m, 4)).dofs, 1.0);
    for (const EnergyPoint &p : f.points())
        EXPECT_GE(p.E2, 0.0);
    std::vector<char> a(m.num_elements(), 0), b(m.num_elements(), 0), ab(m.num_elements(), 0);
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        (e % 2 ? a : b)[e] = e % 3 != 0;
        ab[e] = a[e] || b[e];
    }
    EXPECT_NEAR(region_energy(f, make_mask(m, a)).value + region_energy(f, make_mask(m, b)).value,
                region_energy(f, make_mask(m, ab)).value, 1e-13);
    double last = 0.0;
    for (double r = 0.05; r < 0.5; r += 0.05) {
        const double v = region_energy(f, Vec2(0.4, 0.6), r).value;
        EXPECT_GE(v, last);
        last = v;
    }
}

TEST(RegionEnergy, BucketQueryMatchesBruteForce) {
    const Mesh m = hexagon_mesh(0.05);
    const PlateTensors t = unit_tensors(m.num_elements());
    const EnergyField f = strain_energy_density(m, solved(m, t, random_load(m, 6)).dofs, 1.0, {ShearMode::assumed, 2});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.2, 1.2), R(0.0, 0.7);
    for (int i = 0; i < 30; ++i) {
        const Vec2 c(U(rng), U(rng));
        const double r = R(rng);
        double brute = 0.0;
        for (const EnergyPoint &p : f.points())
            if ((p.x - c).norm() <= r)
                brute += p.weight * p.E2;
        EXPECT_NEAR(region_energy(f, c, r).value, brute, 1e-12 * (1 + brute));
    }
}

TEST(Korn, PureBendingIsOne) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 8, 8);
    const PlateTensors t = unit_tensors(64);
    const Ratio r = korn_ratio(m, solved(m, t, pure_bending_load(m, t, 1.0)).dofs, 1.0);
    EXPECT_FALSE(r.degenerate);
    EXPECT_NEAR(r.value, 1.0, 1e-10);
    const Ratio k = korn_ratio(m, Eigen::VectorXd::Zero(3 * 81), 1.0);
    EXPECT_TRUE(k.degenerate);
}

TEST(Korn, ProjectionBoundOnCorpus) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Mesh m = i % 2 ? hexagon_mesh(0.2) : structured_mesh(0, 0, 1 + 0.1 * i, 1, 8, 6);
        const PlateTensors t = unit_tensors(m.num_elements());
        const Eigen::VectorXd u = solved(m, t, random_load(m, 40 + i)).dofs;
        const Ratio r = korn_ratio(m, u, 1.0);
        ASSERT_FALSE(r.degenerate);
        // |grad phi| / (|grad phi| + |gamma|) from the raw pieces.
        double grad = 0.0, gamma = 0.0;
        for (std::size_t e = 0; e < m.num_elements(); ++e)
            for (const PointOperators &op : element_quadrature(element_nodes(m, e), ShearMode::assumed)) {
                const ElementVector ue = gather(u, m.elements[e]);
                const Eigen::Vector3d b = op.bending * ue;
                Eigen::Matrix2d G;
                Eigen::Matrix<double, 2, 4> dN = op.shape_gradients;
                G.setZero();
                for (int n = 0; n < 4; ++n) {
                    G(0, 0) += dN(0, n) * ue(3 * n);
                    G(0, 1) += dN(1, n) * ue(3 * n);
                    G(1, 0) += dN(0, n) * ue(3 * n + 1);
                    G(1, 1) += dN(1, n) * ue(3 * n + 1);
                }
                EXPECT_NEAR(G(0, 0), b(0), 1e-10);
                grad += op.weight * G.squaredNorm();
                gamma += op.weight * (op.shear * ue).squaredNorm();
            }
        const double lower = std::sqrt(grad) / (std::sqrt(grad) + std::sqrt(gamma));
        EXPECT_GE(r.value, lower * (1 - 1e-12));
        EXPECT_TRUE(std::isfinite(r.value));
        worst = std::max(worst, r.value);
    }
    EXPECT_LT(worst, 10.0);
}

TEST(Poincare, LinearFunctionOnUnitSquare) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 10, 10);
    Eigen::VectorXd u(m.num_nodes());
    for (std::size_t n = 0; n < m.num_nodes(); ++n)
        u(n) = m.nodes[n].x();
    const Ratio r = poincare_ratio(m, u, 1.0);
    EXPECT_NEAR(r.value, 1.0 / std::sqrt(12.0), 1e-12);
    EXPECT_NEAR(poincare_ratio(m, (u.array() + 4.2).matrix(), 1.0).value, r.value, 1e-12);
    EXPECT_NEAR(poincare_ratio(m, u, 2.0).value, r.value / 2, 1e-12);
    EXPECT_TRUE(poincare_ratio(m, Eigen::VectorXd::Constant(m.num_nodes(), 3.0), 1.0).degenerate);
}

TEST(BoundarySpectrum, StructureAndErrors) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 4, 4);
    const BoundarySpectrum sp = boundary_spectrum(m, 1.0);
    EXPECT_EQ(sp.size(), 16);
    EXPECT_NEAR(sp.eigenvalues(0), 0.0, 1e-12);
    EXPECT_NEAR((sp.eigenvectors.transpose() * sp.mass * sp.eigenvectors - Eigen::MatrixXd::Identity(16, 16)).norm(),
                0.0, 1e-12);
    Mesh tiny = structured_mesh(0, 0, 1, 1, 1, 1);
    EXPECT_NO_THROW(boundary_spectrum(tiny, 1.0)); // four boundary nodes
    tiny.boundary_edges.pop_back();                // open polyline
    tiny.loop_offsets.back() -= 1;
    EXPECT_THROW(boundary_spectrum(tiny, 1.0), InvalidInput);
}

TEST(FractionalNorm, ConstantFunction) {
    const Mesh m = hexagon_mesh(0.1);
    const BoundarySpectrum sp = boundary_spectrum(m, 1.0);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(sp.size(), 2.5);
    for (double s : {-0.5, -1.0})
        EXPECT_NEAR(boundary_fractional_norm(sp, g, s), 2.5 * std::sqrt(m.perimeter()), 1e-10);
}

TEST(FractionalNorm, SingleEigenmode) {
    const Mesh m = structured_mesh(0, 0, 2, 1, 10, 5);
    for (double rho0 : {1.0, 0.3}) {
        const BoundarySpectrum sp = boundary_spectrum(m, rho0);
        for (Eigen::Index k : {Eigen::Index(1), Eigen::Index(5), Eigen::Index(17), sp.size() - 1}) {
            const Eigen::VectorXd v = sp.eigenvectors.col(k);
            const double l = 1 + rho0 * rho0 * sp.eigenvalues(k);
            for (double s : {-0.5, -1.0})
                EXPECT_NEAR(boundary_fractional_norm(sp, v, s), std::pow(l, s / 2), 1e-10 * std::pow(l, s / 2));
        }
    }
}

TEST(FractionalNorm, Properties) {
    const Mesh m = hexagon_mesh(0.15);
    const BoundarySpectrum sp = boundary_spectrum(m, 1.0);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> N;
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd g(sp.size()), h(sp.size());
        for (Eigen::Index j = 0; j < sp.size(); ++j) {
            g(j) = N(rng);
            h(j) = N(rng);
        }
        const double half = boundary_fractional_norm(sp, g, -0.5), one = boundary_fractional_norm(sp, g, -1.0);
        EXPECT_LE(one, half * (1 + 1e-14));
        EXPECT_NEAR(boundary_fractional_norm(sp, -3.0 * g, -0.5), 3.0 * half, 1e-12 * half);
        EXPECT_LE(boundary_fractional_norm(sp, g + h, -0.5),
                  (half + boundary_fractional_norm(sp, h, -0.5)) * (1 + 1e-14));
    }
}

TEST(FractionalNorm, MomentsFromSamplesMatchNodal) {
    const Mesh m = hexagon_mesh(0.2);
    const BoundarySpectrum sp = boundary_spectrum(m, 1.0);
    const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(sp.size(), -1.0, 2.0);
    const Eigen::VectorXd b = boundary_moments(sp, m, sample_boundary_function(sp, m, g));
    EXPECT_NEAR((b - sp.mass * g).norm(), 0.0, 1e-13);
}

TEST(Frequency, SingleModeLoad) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 8, 8);
    const double rho0 = 0.5;
    const BoundarySpectrum sp = boundary_spectrum(m, rho0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sp.size());
    for (Eigen::Index k : {3L, 12L, 31L}) {
        const FrequencyReport r = frequency(sp, m, moment_load(sp, m, sp.eigenvectors.col(k), zero));
        const double l = 1 + rho0 * rho0 * sp.eigenvalues(k);
        EXPECT_NEAR(r.F, std::pow(l, 0.25), 1e-10 * std::pow(l, 0.25));
        EXPECT_EQ(r.Q_half, 0.0);
    }
    // The same mode carried by Q instead of M.
    const FrequencyReport q = frequency(sp, m, moment_load(sp, m, zero, sp.eigenvectors.col(7)));
    EXPECT_NEAR(q.F, std::pow(1 + rho0 * rho0 * sp.eigenvalues(7), 0.25), 1e-10);
}

TEST(Frequency, ConstantLoadAndMonotonicity) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 8, 8);
    const BoundarySpectrum sp = boundary_spectrum(m, 1.0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sp.size());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sp.size());
    EXPECT_NEAR(frequency(sp, m, moment_load(sp, m, ones, 0.5 * ones)).F, 1.0, 1e-12);

    // Energy moving from mode 2 to mode 20 raises F.
    double last = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.125) {
        const Eigen::VectorXd g = std::sqrt(1 - t) * sp.eigenvectors.col(2) + std::sqrt(t) * sp.eigenvectors.col(20);
        const double F = frequency(sp, m, moment_load(sp, m, g, zero)).F;
        EXPECT_GE(F, last * (1 - 1e-12));
        last = F;
    }

    const BoundaryLoad none = moment_load(sp, m, zero, zero);
    EXPECT_THROW(frequency(sp, m, none), InvalidInput);
}

TEST(Frequency, AtLeastOneOnLoadFamilies) {
    const Mesh m = hexagon_mesh(0.1);
    const PlateTensors t = unit_tensors(m.num_elements());
    for (double rho0 : {1.0, 0.2}) {
        const BoundarySpectrum sp = boundary_spectrum(m, rho0);
        for (const BoundaryLoad &load : {pure_bending_load(m, t, 1.0), twist_load(m, 1.0), edge_moment_load(m, 2.0),
                                         shear_bending_load(m, 1.0), random_load(m, 1), random_load(m, 2)}) {
            const FrequencyReport r = frequency(sp, m, load);
            EXPECT_GE(r.F, 1.0) << load.family;
            EXPECT_LE(r.norm_one, r.norm_half);
        }
    }
}

TEST(Stability, FinitePositive) {
    const Mesh m = hexagon_mesh(0.1);
    const PlateTensors t = unit_tensors(m.num_elements());
    const BoundarySpectrum sp = boundary_spectrum(m, 1.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const BoundaryLoad load = random_load(m, seed);
        const double s = stability_ratio(m, solved(m, t, load).dofs, 1.0, frequency(sp, m, load));
        EXPECT_GT(s, 0.0);
        EXPECT_TRUE(std::isfinite(s));
    }
}

TEST(EnergyCsv, Header) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 1, 1);
    std::ostringstream out;
    write_energy_csv(out, strain_energy_density(m, pure_bending_state(m, 1.0), 1.0));
    EXPECT_EQ(out.str().rfind("# rmplate-csv v1 energy-field\nx,y,weight,E2\n", 0), 0u);
}
