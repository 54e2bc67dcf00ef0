#include "rmplate/estimates.hpp"

#include "rmplate/error.hpp"
#include "rmplate/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rmplate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double observed_order(double e_prev, double e_cur, double h_prev, double h_cur) {
    if (!(e_prev > 0.0 && e_cur > 0.0))
        return kNaN;
    return std::log(e_prev / e_cur) / std::log(h_prev / h_cur);
}

} // namespace

EnergyLemmaReport verify_energy_lemma(const LemmaInputs &in, const Eigen::VectorXd &u0, const Eigen::VectorXd &u) {
    if (!in.mesh || !in.tensors || !in.mask || !in.load)
        throw InvalidInput("energy lemma inputs incomplete");
    const Mesh &mesh = *in.mesh;
    const double h = in.tensors->h;
    EnergyLemmaReport r;
    r.regime = in.jumps.regime;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        if (!(*in.mask)[e])
            continue;
        const ElementVector ue = gather(u0, mesh.elements[e]);
        for (const PointOperators &op : element_quadrature(element_nodes(mesh, e), in.shear, 2)) {
            const Eigen::Vector3d k = op.bending * ue;
            r.bending_D += op.weight * (h * h * h / 12.0) * (k(0) * k(0) + k(1) * k(1) + 0.5 * k(2) * k(2));
            r.shear_D += op.weight * h * (op.shear * ue).squaredNorm();
        }
    }
    const EllipticityConstants &c = in.ellipticity;
    const double eta = in.jumps.eta;
    const double delta = in.jumps.delta;
    const double lower_form = c.xi0 * r.bending_D + c.sigma0 * r.shear_D;
    const double upper_form = c.xi1 * r.bending_D + c.sigma1 * r.shear_D;

    const double W0 = boundary_work(mesh, *in.load, u0);
    const double W = boundary_work(mesh, *in.load, u);
    const double diff = boundary_work(mesh, *in.load, u0 - u);
    if (r.regime == JumpRegime::stiff) {
        r.lhs = eta / delta * lower_form;
        r.rhs = (delta - 1.0) * upper_form;
        r.mid_boundary = diff;
        r.mid_work = W0 - W;
    } else {
        r.lhs = eta * lower_form;
        r.rhs = (1.0 - delta) / delta * upper_form;
        r.mid_boundary = -diff;
        r.mid_work = W - W0;
    }
    r.mid = r.mid_boundary;
    r.tol = 1e-8 * std::max(std::abs(r.mid), r.rhs);
    r.lower_pass = r.lhs <= r.mid + r.tol;
    r.upper_pass = r.mid <= r.rhs + r.tol;
    r.cross_check_pass =
        std::abs(r.mid_boundary - r.mid_work) <= 1e-9 * std::max(std::abs(r.mid_boundary), std::abs(r.mid_work));
    r.sign_consistent = r.mid >= -1e-10 * std::abs(W0);
    return r;
}

SizeBounds size_bounds(double gap, double W0, const JumpBounds &jumps, double C1, double C2, double rho0,
                       double sign_tol) {
    if (!(W0 > 0.0))
        throw InvalidInput("size bounds need W0 > 0");
    if (!(C1 > 0.0 && C2 > 0.0 && rho0 > 0.0))
        throw InvalidInput("size bounds need positive C1, C2 and rho0");
    if (!(jumps.eta > 0.0 && jumps.delta > 0.0))
        throw InvalidInput("size bounds need positive eta and delta");
    const double r2 = rho0 * rho0;
    SizeBounds b;
    if (jumps.regime == JumpRegime::stiff) {
        if (gap < -sign_tol * W0)
            throw InequalityViolation("stiff inclusion with W0 - W < 0");
        const double g = std::max(gap, 0.0);
        b.lower = C1 * r2 * g / ((jumps.delta - 1.0) * W0);
        b.upper = C2 * jumps.delta * r2 * g / (jumps.eta * W0);
    } else {
        if (gap > sign_tol * W0)
            throw InequalityViolation("soft inclusion with W - W0 < 0");
        const double g = std::max(-gap, 0.0);
        b.lower = C1 * jumps.delta * r2 * g / ((1.0 - jumps.delta) * W0);
        b.upper = C2 * r2 * g / (jumps.eta * W0);
    }
    return b;
}

Calibration calibrate_constants(const std::vector<CorpusPoint> &corpus) {
    if (corpus.empty())
        throw InvalidInput("calibration corpus is empty");
    const JumpRegime regime = corpus.front().jumps.regime;
    Calibration cal;
    cal.C1 = std::numeric_limits<double>::infinity();
    cal.C2 = 0.0;
    std::size_t used = 0;
    for (const CorpusPoint &p : corpus) {
        if (p.jumps.regime != regime)
            throw InvalidInput("calibration corpus mixes stiff and soft inclusions");
        if (p.area == 0.0 && p.gap == 0.0)
            continue;
        // Bounds with unit constants; the fitted constants rescale them onto the area.
        const SizeBounds unit = size_bounds(p.gap, p.W0, p.jumps, 1.0, 1.0, p.rho0);
        if (!(unit.lower > 0.0 && unit.upper > 0.0 && p.area > 0.0))
            throw InvalidInput("degenerate calibration corpus (zero work gap or zero area)");
        cal.C1 = std::min(cal.C1, p.area / unit.lower);
        cal.C2 = std::max(cal.C2, p.area / unit.upper);
        ++used;
    }
    if (used == 0)
        throw InvalidInput("degenerate calibration corpus (all work gaps zero)");
    return cal;
}

ThreeSpheresReport three_spheres_check(const EnergyField &field, const Mesh &mesh, const Vec2 &center, double rho,
                                       double rho0, const ThreeSpheresOptions &options) {
    if (!(options.theta > 0.0 && options.theta < 1.0))
        throw InvalidInput("theta must lie in (0, 1)");
    if (!(rho > 0.0 && rho < rho0))
        throw InvalidInput("three spheres needs 0 < rho < rho0");
    ThreeSpheresReport r;
    r.center = center;
    r.rho = rho;
    r.theta = options.theta;
    r.outer = 7.0 * rho / (2.0 * options.theta);
    if (!mesh.contains(center) || mesh.boundary_distance(center) < r.outer) {
        std::ostringstream msg;
        msg << "center (" << center.x() << ", " << center.y() << ") is closer than 7 rho / (2 theta) = " << r.outer
            << " to the boundary";
        throw InvalidInput(msg.str());
    }
    r.I_rho = region_energy(field, center, rho).value;
    r.I_3rho = region_energy(field, center, 3.0 * rho).value;
    r.I_outer = region_energy(field, center, r.outer).value;
    const double slack = 1.0 + 1e-12;
    r.monotone = r.I_rho <= r.I_3rho * slack && r.I_3rho <= r.I_outer * slack;

    if (r.I_outer == 0.0) {
        r.tau_defined = false;
        r.tau = kNaN;
        r.C = 0.0;
        return r;
    }
    if (r.I_rho == 0.0) {
        r.feasible = r.I_3rho == 0.0;
        r.tau_defined = false;
        r.tau = kNaN;
        r.C = r.feasible ? 0.0 : std::numeric_limits<double>::infinity();
        return r;
    }
    if (r.I_outer <= r.I_rho) {
        r.tau_defined = false;
        r.tau = kNaN;
        r.C = (rho / rho0) * (rho / rho0) * r.I_3rho / r.I_outer;
        return r;
    }
    // Exponent with I_3rho = I_rho^tau I_outer^(1 - tau); the scale factor
    // (rho0 / rho)^2 is then absorbed into C = (rho / rho0)^2.
    const double tau = std::log(r.I_outer / r.I_3rho) / std::log(r.I_outer / r.I_rho);
    r.clamped = !(tau >= options.tau_min && tau <= options.tau_max);
    r.tau = std::clamp(tau, options.tau_min, options.tau_max);
    const double logC = std::log(r.I_3rho) - 2.0 * std::log(rho0 / rho) - r.tau * std::log(r.I_rho) -
                        (1.0 - r.tau) * std::log(r.I_outer);
    r.C = std::exp(logC);
    return r;
}

std::vector<Vec2> admissible_centers(const Mesh &mesh, double depth, double pitch) {
    if (!(pitch > 0.0))
        throw InvalidInput("center grid pitch must be positive");
    if (mesh.nodes.empty())
        return {};
    Vec2 lo = mesh.nodes.front();
    Vec2 hi = lo;
    for (const Vec2 &x : mesh.nodes) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
    }
    const Vec2 extent = hi - lo;
    const int nx = static_cast<int>(std::floor(extent.x() / pitch)) + 1;
    const int ny = static_cast<int>(std::floor(extent.y() / pitch)) + 1;
    const Vec2 start = lo + 0.5 * (extent - pitch * Vec2(nx - 1, ny - 1));
    std::vector<Vec2> centers;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Vec2 x = start + pitch * Vec2(i, j);
            if (mesh.contains(x) && mesh.boundary_distance(x) > depth)
                centers.push_back(x);
        }
    return centers;
}

ThreeSpheresScan three_spheres_scan(const EnergyField &field, const Mesh &mesh, double rho, double rho0,
                                    double pitch, const ThreeSpheresOptions &options, int jobs) {
    const std::vector<Vec2> centers = admissible_centers(mesh, 7.0 * rho / (2.0 * options.theta), pitch);
    if (centers.empty())
        throw InvalidInput("no admissible three-spheres center");
    ThreeSpheresScan scan;
    scan.reports.resize(centers.size());
    parallel_for(centers.size(), jobs, [&](std::size_t i) {
        scan.reports[i] = three_spheres_check(field, mesh, centers[i], rho, rho0, options);
    });
    std::size_t pass = 0;
    for (const auto &r : scan.reports)
        pass += r.pass() ? 1 : 0;
    scan.pass_fraction = static_cast<double>(pass) / static_cast<double>(centers.size());
    return scan;
}

double covering_square_side(double theta, double h1, double rho0) {
    return 4.0 * theta * h1 * rho0 / (2.0 * std::numbers::sqrt2 * theta + 7.0);
}

LpsReport lps_check(const EnergyField &field, const Mesh &mesh, double rho, const LpsOptions &options) {
    if (!(rho > 0.0))
        throw InvalidInput("rho must be positive");
    if (!(options.theta > 0.0 && options.theta < 1.0))
        throw InvalidInput("theta must lie in (0, 1)");
    LpsReport r;
    r.rho = rho;
    r.theta = options.theta;
    r.pitch = std::min(options.pitch.value_or(0.5 * rho), 0.5 * rho);
    r.centers = admissible_centers(mesh, 7.0 * rho / (2.0 * options.theta), r.pitch);
    if (r.centers.empty())
        throw InvalidInput("empty admissible region for the LPS check");
    r.total = field.total();
    if (!(r.total > 0.0)) {
        r.degenerate = true;
        r.ratios.assign(r.centers.size(), kNaN);
        r.min_ratio = r.max_ratio = kNaN;
        return r;
    }
    r.ratios.resize(r.centers.size());
    parallel_for(r.centers.size(), options.jobs,
                 [&](std::size_t i) { r.ratios[i] = region_energy(field, r.centers[i], rho).value / r.total; });
    r.min_ratio = *std::min_element(r.ratios.begin(), r.ratios.end());
    r.max_ratio = *std::max_element(r.ratios.begin(), r.ratios.end());
    return r;
}

double SizeEstimateReport::size_ratio() const {
    if (gap == 0.0)
        return kNaN;
    return area * W0 / (rho0 * rho0 * std::abs(gap));
}

CorpusPoint SizeEstimateReport::corpus_point() const {
    if (!jumps)
        throw InvalidInput("experiment " + id + " has no inclusion");
    return {area, gap, W0, *jumps, rho0};
}

PlateState solve_system(const LinearSystem &system, bool dense_oracle, double compatibility_tol) {
    if (dense_oracle) {
        OracleOptions o;
        o.compatibility_tol = compatibility_tol;
        return dense_oracle_solve(system, o);
    }
    SolveOptions o;
    o.compatibility_tol = compatibility_tol;
    return solve(system, o);
}

SizeEstimateReport run_size_experiment(const ExperimentConfig &config, const RunOptions &options) {
    const Problem p = build_problem(config);
    const ShearMode shear = options.shear.value_or(config.shear);
    const bool dense = options.dense_oracle || config.dense_oracle;
    const int jobs = std::max(options.jobs, config.jobs);
    const double rho0 = p.domain.apriori.rho0;

    SizeEstimateReport rep;
    rep.id = config.id;
    rep.rho0 = rho0;
    rep.C1 = config.C1;
    rep.C2 = config.C2;
    rep.warnings = p.warnings;

    const LoadVector lv = assemble_load(p.mesh, p.load, config.tol);
    LinearSystem K0 = assemble_stiffness(p.mesh, p.tensors, nullptr, nullptr, {shear, jobs});
    K0.rhs = lv.rhs;
    const PlateState s0 = solve_system(K0, dense, config.tol);
    rep.dofs = static_cast<std::size_t>(K0.num_dofs());
    rep.residual = s0.residual;
    rep.W0 = boundary_work(p.mesh, p.load, s0.dofs);
    if (!(rep.W0 > 0.0))
        throw InvalidInput("reference work W0 is not positive (zero load?)");

    if (config.kappa || !p.inclusion_material.shear.empty())
        rep.jumps = jump_bounds(p.tensors, p.inclusion_material, p.inclusion.mask);
    Eigen::VectorXd u = s0.dofs;
    if (p.has_inclusion()) {
        LinearSystem K1 = assemble_stiffness(p.mesh, p.tensors, &p.inclusion.mask, &p.inclusion_material, {shear, jobs});
        K1.rhs = lv.rhs;
        const PlateState s1 = solve_system(K1, dense, config.tol);
        rep.residual = std::max(rep.residual, s1.residual);
        u = s1.dofs;
        rep.W = boundary_work(p.mesh, p.load, u);
    } else {
        rep.W = rep.W0;
        rep.jumps.reset();
    }
    const WorkReport work = work_report(rep.W0, rep.W);
    rep.gap = work.gap;
    rep.relative_gap = work.relative_gap;
    rep.area = p.has_inclusion() ? p.inclusion.mask.area : 0.0;
    for (const Polygon &poly : p.inclusion.polygons)
        rep.polygon_area += poly.area();

    if (p.has_inclusion()) {
        const FatnessResult fat =
            fatness_ratio(p.mesh, p.inclusion.mask, p.inclusion.polygons, p.domain.apriori.h1 * rho0);
        rep.fatness = fat.ratio;
        rep.fat = fat.fat();
    }

    const BoundarySpectrum spectrum = boundary_spectrum(p.mesh, rho0);
    const FrequencyReport freq = frequency(spectrum, p.mesh, p.load);
    rep.F = config.F.value_or(freq.F);
    rep.F_override = config.F.has_value();
    rep.stability = stability_ratio(p.mesh, s0.dofs, rho0, freq);

    if (rep.jumps) {
        LemmaInputs in;
        in.mesh = &p.mesh;
        in.tensors = &p.tensors;
        in.ellipticity = p.ellipticity;
        in.jumps = *rep.jumps;
        in.mask = &p.inclusion.mask;
        in.load = &p.load;
        in.shear = shear;
        rep.lemma = verify_energy_lemma(in, s0.dofs, u);
        rep.sign_ok = rep.lemma.sign_consistent;
        if (rep.sign_ok)
            rep.bounds = size_bounds(rep.gap, rep.W0, *rep.jumps, rep.C1, rep.C2, rho0);
        else
            rep.bounds = {kNaN, kNaN};
    } else {
        rep.lemma.mid = rep.lemma.mid_boundary = rep.lemma.mid_work = rep.gap;
    }
    return rep;
}

ConvergenceStudy pure_bending_convergence(const ExperimentConfig &config, const RunOptions &options) {
    ExperimentConfig base = config;
    base.inclusion_path.clear();
    base.inclusion_shapes.clear();
    base.kappa.reset();
    base.shear_table.clear();
    base.bending_table.clear();
    const ShearMode shear = options.shear.value_or(config.shear);
    const bool dense = options.dense_oracle || config.dense_oracle;
    const int jobs = std::max(options.jobs, config.jobs);
    const double a = config.load.param("a", 1.0);

    ConvergenceStudy study;
    double size = config.mesh_size;
    for (int level = 0; level < config.levels; ++level, size *= 0.5) {
        base.mesh_size = size;
        base.load = parse_load_spec("pure_bending");
        base.load.params["a"] = a;
        const Problem p = build_problem(base);
        const double rho0 = p.domain.apriori.rho0;
        LinearSystem K = assemble_stiffness(p.mesh, p.tensors, nullptr, nullptr, {shear, jobs});
        K.rhs = assemble_load(p.mesh, p.load, config.tol).rhs;
        const PlateState s = solve_system(K, dense, config.tol);

        const Vec2 xc = p.mesh.area_centroid();
        ExactPlate exact;
        exact.phi = [a, xc](const Vec2 &x) -> Vec2 { return a * (x - xc); };
        exact.grad_phi = [a](const Vec2 &) -> Eigen::Matrix2d { return a * Eigen::Matrix2d::Identity(); };
        exact.w = [a, xc](const Vec2 &x) { return -0.5 * a * (x - xc).squaredNorm(); };
        exact.grad_w = [a, xc](const Vec2 &x) -> Vec2 { return -a * (x - xc); };

        ConvergenceLevel lv;
        lv.mesh_size = p.mesh.mesh_size;
        lv.elements = p.mesh.num_elements();
        lv.dofs = static_cast<std::size_t>(K.num_dofs());
        lv.W = boundary_work(p.mesh, p.load, s.dofs);
        lv.error = discretization_error(p.mesh, s.dofs, exact, rho0);
        if (!study.levels.empty()) {
            const ConvergenceLevel &prev = study.levels.back();
            lv.order_energy_sq =
                observed_order(prev.error.energy_sq, lv.error.energy_sq, prev.mesh_size, lv.mesh_size);
            lv.order_energy = observed_order(prev.error.energy, lv.error.energy, prev.mesh_size, lv.mesh_size);
            lv.order_l2 = observed_order(prev.error.l2, lv.error.l2, prev.mesh_size, lv.mesh_size);
        }
        if (level == config.levels - 1) {
            const double B = p.tensors.bending.front();
            const double nu = p.tensors.poisson.front();
            study.W_exact = 2.0 * B * a * a * (1.0 + nu) * p.mesh.area();
        }
        study.levels.push_back(lv);
    }
    return study;
}

} // namespace rmplate
