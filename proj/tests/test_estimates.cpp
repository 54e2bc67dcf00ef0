#include "rmplate/error.hpp"
#include "rmplate/estimates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace rmplate;

namespace {

ExperimentConfig config(const std::string &text) {
    std::istringstream in(text);
    return parse_config(in);
}

Eigen::VectorXd pure_bending_state(const Mesh &m) {
    const Vec2 c = m.area_centroid();
    return interpolate(m, [&](const Vec2 &x) {
        const Vec2 d = x - c;
        return Eigen::Vector3d(d.x(), d.y(), -0.5 * d.squaredNorm());
    });
}

EnergyField solved_field(const Mesh &m, const BoundaryLoad &load, int subdivisions) {
    const PlateTensors t = derive_plate_tensors(IsotropicMaterial::uniform(m.num_elements(), 1, 1, 1, 1, 5, 2));
    LinearSystem s = assemble_stiffness(m, t);
    s.rhs = assemble_load(m, load).rhs;
    return strain_energy_density(m, solve(s).dofs, 1.0, {ShearMode::assumed, subdivisions});
}

} // namespace

TEST(EnergyLemma, NoInclusionIsTrivial) {
    const SizeEstimateReport r = run_size_experiment(config("mesh_size = 0.1\nload = twist c=1\n"));
    EXPECT_EQ(r.lemma.lhs, 0.0);
    EXPECT_EQ(r.lemma.mid, 0.0);
    EXPECT_EQ(r.lemma.rhs, 0.0);
    EXPECT_TRUE(r.lemma.pass());
}

TEST(EnergyLemma, StiffDiskDenseOracle) {
    const SizeEstimateReport r = run_size_experiment(
        config("mesh_size = 0.1\ninclusion_disk = 0.5 0.5 0.2\nkappa = 2\nload = pure_bending a=1\n"),
        {.dense_oracle = true});
    EXPECT_EQ(r.lemma.regime, JumpRegime::stiff);
    EXPECT_GT(r.lemma.mid, 0.0);
    EXPECT_LE(r.lemma.lhs, r.lemma.mid);
    EXPECT_LE(r.lemma.mid, r.lemma.rhs);
    EXPECT_TRUE(r.lemma.pass());
    EXPECT_NEAR(r.lemma.mid_boundary, r.lemma.mid_work, 1e-9 * r.lemma.mid);
    // Sparse path agrees with the oracle.
    const SizeEstimateReport s = run_size_experiment(
        config("mesh_size = 0.1\ninclusion_disk = 0.5 0.5 0.2\nkappa = 2\nload = pure_bending a=1\n"));
    EXPECT_NEAR(s.gap, r.gap, 1e-10 * r.W0);
}

TEST(EnergyLemma, SoftDiskDenseOracle) {
    const SizeEstimateReport r = run_size_experiment(
        config("mesh_size = 0.1\ninclusion_disk = 0.5 0.5 0.2\nkappa = 0.5\nload = twist c=1\n"),
        {.dense_oracle = true});
    EXPECT_EQ(r.lemma.regime, JumpRegime::soft);
    EXPECT_LT(r.gap, 0.0); // W > W0
    EXPECT_GT(r.lemma.mid, 0.0);
    EXPECT_NEAR(r.lemma.mid, r.W - r.W0, 1e-9 * r.lemma.mid);
    EXPECT_TRUE(r.lemma.pass());
}

TEST(EnergyLemma, ChainOnVariedCorpus) {
    const std::vector<std::string> shapes{"inclusion_disk = 0.3 0.6 0.12", "inclusion_rect = 0.2 0.2 0.5 0.4",
                                          "inclusion_disk = 0.5 0.5 0.25 5"};
    for (const std::string &shape : shapes)
        for (const char *kappa : {"3", "0.25"})
            for (const char *load : {"random seed=11", "shear_bending q=1"}) {
                const SizeEstimateReport r = run_size_experiment(config(
                    "mesh_size = 0.04\n" + shape + "\nkappa = " + kappa + "\nload = " + load + "\n"));
                EXPECT_TRUE(r.lemma.pass()) << shape << " " << kappa << " " << load;
                EXPECT_TRUE(r.sign_ok);
                EXPECT_GE(r.lemma.lower_slack(), -r.lemma.tol);
                EXPECT_GE(r.lemma.upper_slack(), -r.lemma.tol);
            }
}

TEST(SizeBounds, Examples) {
    const JumpBounds stiff{1.0, 2.0, JumpRegime::stiff};
    const SizeBounds zero = size_bounds(0.0, 1.0, stiff, 1.0, 1.0, 1.0);
    EXPECT_EQ(zero.lower, 0.0);
    EXPECT_EQ(zero.upper, 0.0);
    const SizeBounds a = size_bounds(0.1, 2.0, stiff, 1.5, 0.5, 0.5);
    const SizeBounds b = size_bounds(0.2, 2.0, stiff, 1.5, 0.5, 0.5);
    EXPECT_DOUBLE_EQ(b.lower, 2 * a.lower);
    EXPECT_DOUBLE_EQ(b.upper, 2 * a.upper);
    EXPECT_DOUBLE_EQ(a.lower, 1.5 * 0.25 * 0.1 / (1.0 * 2.0));
    EXPECT_DOUBLE_EQ(a.upper, 0.5 * 2.0 * 0.25 * 0.1 / (1.0 * 2.0));

    const JumpBounds soft{0.5, 0.5, JumpRegime::soft};
    const SizeBounds s = size_bounds(-0.1, 2.0, soft, 1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(s.lower, 0.5 * 0.1 / (0.5 * 2.0));
    EXPECT_DOUBLE_EQ(s.upper, 0.1 / (0.5 * 2.0));
}

TEST(SizeBounds, Errors) {
    const JumpBounds stiff{1.0, 2.0, JumpRegime::stiff};
    EXPECT_THROW(size_bounds(-0.1, 1.0, stiff, 1, 1, 1), InequalityViolation);
    EXPECT_NO_THROW(size_bounds(-1e-12, 1.0, stiff, 1, 1, 1)); // within the sign tolerance
    EXPECT_THROW(size_bounds(0.1, 1.0, {0.5, 0.5, JumpRegime::soft}, 1, 1, 1), InequalityViolation);
    EXPECT_THROW(size_bounds(0.1, 0.0, stiff, 1, 1, 1), InvalidInput);
    EXPECT_THROW(size_bounds(0.1, 1.0, stiff, 0, 1, 1), InvalidInput);
}

TEST(Calibration, Singleton) {
    const CorpusPoint p{0.04, 0.02, 0.5, {1.0, 2.0, JumpRegime::stiff}, 1.0};
    const Calibration c = calibrate_constants({p});
    const SizeBounds b = size_bounds(p.gap, p.W0, p.jumps, c.C1, c.C2, p.rho0);
    EXPECT_NEAR(b.lower, p.area, 1e-15);
    EXPECT_NEAR(b.upper, p.area, 1e-15);
}

TEST(Calibration, IdenticalRatiosCollapse) {
    const JumpBounds j{1.0, 2.0, JumpRegime::stiff};
    std::vector<CorpusPoint> corpus;
    for (double s : {1.0, 2.0, 3.0})
        corpus.push_back({0.01 * s, 0.02 * s, 0.5, j, 1.0});
    const Calibration c = calibrate_constants(corpus);
    for (const CorpusPoint &p : corpus) {
        const SizeBounds b = size_bounds(p.gap, p.W0, j, c.C1, c.C2, 1.0);
        EXPECT_NEAR(b.lower, p.area, 1e-15);
        EXPECT_NEAR(b.upper, p.area, 1e-15);
    }
    EXPECT_NEAR(c.C1, c.C2 * j.delta / (j.delta - 1.0), 1e-12);
}

TEST(Calibration, Errors) {
    EXPECT_THROW(calibrate_constants({}), InvalidInput);
    const CorpusPoint stiff{0.04, 0.02, 0.5, {1.0, 2.0, JumpRegime::stiff}, 1.0};
    const CorpusPoint soft{0.04, -0.02, 0.5, {0.5, 0.5, JumpRegime::soft}, 1.0};
    EXPECT_THROW(calibrate_constants({stiff, soft}), InvalidInput);
    EXPECT_THROW(calibrate_constants({{0.04, 0.0, 0.5, stiff.jumps, 1.0}}), InvalidInput);
}

TEST(Calibration, BracketsFiveInclusionCorpus) {
    std::vector<CorpusPoint> corpus;
    std::vector<SizeEstimateReport> reports;
    for (const char *shape : {"inclusion_disk = 0.5 0.5 0.1", "inclusion_disk = 0.4 0.6 0.15",
                              "inclusion_rect = 0.3 0.3 0.6 0.5", "inclusion_disk = 0.5 0.5 0.25 6",
                              "inclusion_rect = 0.2 0.4 0.8 0.6"}) {
        reports.push_back(run_size_experiment(
            config(std::string("mesh_size = 0.04\n") + shape + "\nkappa = 2\nload = random seed=5\n")));
        corpus.push_back(reports.back().corpus_point());
    }
    const Calibration c = calibrate_constants(corpus);
    for (const CorpusPoint &p : corpus) {
        const SizeBounds b = size_bounds(p.gap, p.W0, p.jumps, c.C1, c.C2, p.rho0);
        EXPECT_LE(b.lower, p.area * (1 + 1e-12));
        EXPECT_GE(b.upper, p.area * (1 - 1e-12));
        EXPECT_LE(b.lower, b.upper);
    }
    EXPECT_GT(c.spread(), 0.0);
}

TEST(SizeExperiment, NoInclusion) {
    const SizeEstimateReport r = run_size_experiment(config("mesh_size = 0.1\nload = random seed=2\n"));
    EXPECT_EQ(r.gap, 0.0);
    EXPECT_EQ(r.area, 0.0);
    EXPECT_EQ(r.bounds.lower, 0.0);
    EXPECT_EQ(r.bounds.upper, 0.0);
    EXPECT_FALSE(r.jumps.has_value());
    EXPECT_GE(r.F, 1.0);
}

TEST(SizeExperiment, CenteredSquare) {
    const std::string base = "mesh_size = 0.1\ninclusion_rect = 0.4 0.4 0.6 0.6\nload = pure_bending a=1\n";
    const SizeEstimateReport stiff = run_size_experiment(config(base + "kappa = 2\n"), {.dense_oracle = true});
    EXPECT_GT(stiff.gap, 0.0);
    EXPECT_NEAR(stiff.area, 0.04, 1e-12);
    const Calibration c = calibrate_constants({stiff.corpus_point()});
    const SizeBounds b = size_bounds(stiff.gap, stiff.W0, *stiff.jumps, c.C1, c.C2, stiff.rho0);
    EXPECT_LE(b.lower, 0.04 * (1 + 1e-12));
    EXPECT_GE(b.upper, 0.04 * (1 - 1e-12));
    EXPECT_TRUE(stiff.lemma.pass());

    const SizeEstimateReport soft = run_size_experiment(config(base + "kappa = 0.5\n"), {.dense_oracle = true});
    EXPECT_LT(soft.gap, 0.0);
    EXPECT_TRUE(soft.lemma.pass());
    EXPECT_TRUE(soft.sign_ok);
}

TEST(SizeExperiment, KappaOneIsRejected) {
    EXPECT_THROW(run_size_experiment(config("mesh_size = 0.1\ninclusion_disk = 0.5 0.5 0.2\nkappa = 1\n")),
                 InvalidInput);
}

TEST(SizeExperiment, FrequencyOverride) {
    const SizeEstimateReport r = run_size_experiment(config("mesh_size = 0.1\nload = twist c=1\nF = 2.5\n"));
    EXPECT_EQ(r.F, 2.5);
    EXPECT_TRUE(r.F_override);
}

TEST(SizeExperiment, GapGrowsWithNestedDisks) {
    double last = 0.0;
    for (double r : {0.05, 0.1, 0.15, 0.2, 0.25}) {
        const SizeEstimateReport rep = run_size_experiment(config(
            "mesh_size = 0.02\ninclusion_disk = 0.5 0.5 " + std::to_string(r) + "\nkappa = 2\nload = twist c=1\n"));
        EXPECT_GE(rep.gap, last);
        last = rep.gap;
    }
}

TEST(ThreeSpheres, ConstantDensity) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 50, 50);
    const EnergyField f = strain_energy_density(m, pure_bending_state(m), 1.0, {ShearMode::assumed, 8});
    const double rho = 0.02, theta = 0.3;
    const ThreeSpheresReport r = three_spheres_check(f, m, {0.5, 0.5}, rho, 1.0, {.theta = theta});
    // Integrals are proportional to the disk areas.
    const double R = 7 * rho / (2 * theta);
    EXPECT_NEAR(r.I_rho, 2 * std::numbers::pi * rho * rho, 0.05 * r.I_rho);
    EXPECT_NEAR(r.tau, std::log(R / (3 * rho)) / std::log(R / rho), 0.02);
    EXPECT_TRUE(r.pass());
    EXPECT_NEAR(r.I_3rho, r.C * std::pow(1.0 / rho, 2) * std::pow(r.I_rho, r.tau) * std::pow(r.I_outer, 1 - r.tau),
                1e-10 * r.I_3rho);
}

TEST(ThreeSpheres, ZeroFieldFlagsTau) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 20, 20);
    const EnergyField f = strain_energy_density(m, Eigen::VectorXd::Zero(3 * m.num_nodes()), 1.0);
    const ThreeSpheresReport r = three_spheres_check(f, m, {0.5, 0.5}, 0.02, 1.0);
    EXPECT_FALSE(r.tau_defined);
    EXPECT_TRUE(r.monotone);
    EXPECT_TRUE(r.feasible);
    EXPECT_FALSE(r.pass());
}

TEST(ThreeSpheres, Preconditions) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 20, 20);
    const EnergyField f = strain_energy_density(m, pure_bending_state(m), 1.0);
    EXPECT_THROW(three_spheres_check(f, m, {0.1, 0.5}, 0.02, 1.0), InvalidInput);  // too close to the edge
    EXPECT_THROW(three_spheres_check(f, m, {1.5, 0.5}, 0.02, 1.0), InvalidInput);  // outside
    EXPECT_THROW(three_spheres_check(f, m, {0.5, 0.5}, 1.0, 1.0), InvalidInput);   // rho >= rho0
    EXPECT_THROW(three_spheres_check(f, m, {0.5, 0.5}, 0.02, 1.0, {.theta = 1.5}), InvalidInput);
}

TEST(ThreeSpheres, TwistAtCentroid) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 60, 60);
    const EnergyField f = solved_field(m, twist_load(m, 1.0), 2);
    const ThreeSpheresReport r = three_spheres_check(f, m, m.area_centroid(), 0.04, 1.0);
    EXPECT_GT(r.tau, 0.0);
    EXPECT_LT(r.tau, 1.0);
    EXPECT_TRUE(r.pass());
}

TEST(ThreeSpheres, ScanIsMonotone) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 40, 40);
    const EnergyField f = solved_field(m, random_load(m, 3), 2);
    const ThreeSpheresScan scan = three_spheres_scan(f, m, 0.03, 1.0, 0.015, {}, 2);
    ASSERT_FALSE(scan.reports.empty());
    for (const auto &r : scan.reports) {
        EXPECT_TRUE(r.monotone);
        EXPECT_GE(m.boundary_distance(r.center), r.outer);
    }
    EXPECT_GE(scan.pass_fraction, 0.95);
    EXPECT_THROW(three_spheres_scan(f, m, 0.2, 1.0, 0.1), InvalidInput); // no admissible center
}

TEST(Lps, ConstantDensity) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 100, 100);
    const EnergyField f = strain_energy_density(m, pure_bending_state(m), 1.0, {ShearMode::assumed, 4});
    for (double rho : {0.02, 0.04}) {
        const LpsReport r = lps_check(f, m, rho);
        const double exact = std::numbers::pi * rho * rho;
        EXPECT_NEAR(r.min_ratio, exact, 0.05 * exact);
        EXPECT_NEAR(r.max_ratio, exact, 0.05 * exact);
        EXPECT_LE(r.pitch, rho / 2);
    }
}

TEST(Lps, ZeroFieldAndEmptyRegion) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 20, 20);
    const EnergyField zero = strain_energy_density(m, Eigen::VectorXd::Zero(3 * m.num_nodes()), 1.0);
    EXPECT_TRUE(lps_check(zero, m, 0.02).degenerate);
    EXPECT_THROW(lps_check(zero, m, 0.2), InvalidInput);
}

TEST(Lps, RatiosInUnitIntervalAndMonotoneInRho) {
    const Mesh m = structured_mesh(0, 0, 1, 1, 50, 50);
    const EnergyField f = solved_field(m, random_load(m, 7), 2);
    double last = 1.0;
    for (double rho : {0.04, 0.03, 0.02, 0.01}) {
        const LpsReport r = lps_check(f, m, rho, {.theta = 0.3, .pitch = std::nullopt, .jobs = 2});
        for (double q : r.ratios) {
            EXPECT_GE(q, 0.0);
            EXPECT_LE(q, 1.0);
        }
        EXPECT_GT(r.min_ratio, 0.0);
        EXPECT_LE(r.min_ratio, last);
        last = r.min_ratio;
    }
}

TEST(Lps, CoveringSquareSide) {
    EXPECT_NEAR(covering_square_side(0.3, 0.05, 2.0), 4 * 0.3 * 0.05 * 2.0 / (2 * std::sqrt(2.0) * 0.3 + 7), 1e-16);
}

TEST(Convergence, PureBendingOrder) {
    const ConvergenceStudy st = pure_bending_convergence(config("mesh_size = 0.1\nlevels = 3\n"));
    ASSERT_EQ(st.levels.size(), 3u);
    EXPECT_NEAR(st.W_exact, 5.0 / 9.0, 1e-14);
    EXPECT_GE(st.levels.back().order_energy_sq, 1.9);
    EXPECT_NEAR(st.levels.back().order_energy, 1.0, 0.05);
    EXPECT_NEAR(st.levels.back().W, st.W_exact, 0.005 * st.W_exact);
    for (std::size_t i = 1; i < st.levels.size(); ++i)
        EXPECT_LT(st.levels[i].error.energy_sq, st.levels[i - 1].error.energy_sq);
}
