#include "rmplate/material.hpp"

#include "rmplate/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rmplate {

namespace {

// Voigt slot -> tensor index pair: (1,1), (2,2), (1,2).
constexpr std::array<std::array<int, 2>, 3> kVoigtPairs{{{0, 0}, {1, 1}, {0, 1}}};

int flat(int a, int b, int c, int d) { return 8 * a + 4 * b + 2 * c + d; }

std::vector<std::vector<double>> read_csv_rows(const std::string &path, std::size_t columns) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open table " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        double v = 0.0;
        while (ls >> v)
            row.push_back(v);
        if (row.empty() && lineno == 1)
            continue; // header
        if (!ls.eof() || row.size() != columns)
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                               " numeric columns");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t element_id(double v, const std::string &path) {
    if (v < 0.0 || v != std::floor(v))
        throw InvalidInput(path + ": element ids must be nonnegative integers");
    return static_cast<std::size_t>(v);
}

} // namespace

IsotropicMaterial IsotropicMaterial::uniform(std::size_t elements, double lambda, double mu, double h,
                                             double alpha0, double gamma0, double alpha1) {
    IsotropicMaterial m;
    m.lambda.assign(elements, lambda);
    m.mu.assign(elements, mu);
    m.h = h;
    m.alpha0 = alpha0;
    m.gamma0 = gamma0;
    m.alpha1 = alpha1;
    return m;
}

PlateTensors derive_plate_tensors(const IsotropicMaterial &material) {
    if (material.lambda.size() != material.mu.size())
        throw InvalidInput("lambda and mu fields have different sizes");
    if (!(material.h > 0.0))
        throw InvalidInput("plate thickness h must be positive");
    if (!(material.alpha0 > 0.0) || !(material.gamma0 > 0.0) || !(material.alpha1 > 0.0))
        throw InvalidInput("alpha0, gamma0, alpha1 must be positive");
    const std::size_t n = material.mu.size();
    PlateTensors t;
    t.h = material.h;
    t.shear.resize(n);
    t.young.resize(n);
    t.poisson.resize(n);
    t.bending.resize(n);
    const double h3 = material.h * material.h * material.h;
    for (std::size_t e = 0; e < n; ++e) {
        const double lambda = material.lambda[e];
        const double mu = material.mu[e];
        std::ostringstream where;
        where << " at element " << e << " (lambda = " << lambda << ", mu = " << mu << ")";
        if (!(mu >= material.alpha0))
            throw InvalidInput("ellipticity violated: mu < alpha0" + where.str());
        if (!(2.0 * mu + 3.0 * lambda >= material.gamma0))
            throw InvalidInput("ellipticity violated: 2 mu + 3 lambda < gamma0" + where.str());
        if (std::abs(lambda) + std::abs(mu) > material.alpha1 * (1.0 + 1e-12))
            throw InvalidInput("regularity bound violated: |lambda| + |mu| > alpha1" + where.str());
        const double E = mu * (2.0 * mu + 3.0 * lambda) / (mu + lambda);
        const double nu = lambda / (2.0 * (mu + lambda));
        t.shear[e] = material.h * mu;
        t.young[e] = E;
        t.poisson[e] = nu;
        t.bending[e] = E * h3 / (12.0 * (1.0 - nu * nu));
    }
    return t;
}

double lipschitz_violation(const Mesh &mesh, const IsotropicMaterial &material, double rho0) {
    std::vector<std::vector<std::size_t>> node_elements(mesh.num_nodes());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        for (int n : mesh.elements[e])
            node_elements[n].push_back(e);
    double worst = 0.0;
    for (const auto &around : node_elements) {
        for (std::size_t i = 0; i < around.size(); ++i) {
            for (std::size_t j = i + 1; j < around.size(); ++j) {
                const std::size_t a = around[i];
                const std::size_t b = around[j];
                const double allowed = material.alpha1 * (mesh.centroid(a) - mesh.centroid(b)).norm() / rho0;
                const double seen = std::abs(material.lambda[a] - material.lambda[b]) +
                                    std::abs(material.mu[a] - material.mu[b]);
                if (seen > 0.0)
                    worst = std::max(worst, allowed > 0.0 ? seen / allowed : std::numeric_limits<double>::infinity());
            }
        }
    }
    return worst;
}

Mat2 bending_apply(const PlateTensors &tensors, std::size_t element, const Mat2 &A) {
    const double B = tensors.bending.at(element);
    const double nu = tensors.poisson[element];
    const Mat2 sym = 0.5 * (A + A.transpose());
    return B * ((1.0 - nu) * sym + nu * A.trace() * Mat2::Identity());
}

Mat3 bending_voigt(double bending, double poisson) {
    Mat3 D;
    D << 1.0, poisson, 0.0,
         poisson, 1.0, 0.0,
         0.0, 0.0, 0.5 * (1.0 - poisson);
    return bending * D;
}

EllipticityConstants ellipticity_constants(const IsotropicMaterial &material, const PlateTensors &tensors) {
    EllipticityConstants c;
    c.sigma0 = material.alpha0;
    c.sigma1 = material.alpha1;
    c.xi0 = std::min(2.0 * material.alpha0, material.gamma0);
    c.xi1 = 2.0 * material.alpha1;
    const double h = tensors.h;
    const double scale = h * h * h / 12.0;
    constexpr double slack = 1e-12;
    for (std::size_t e = 0; e < tensors.num_elements(); ++e) {
        const double S = tensors.shear[e];
        if (S < h * c.sigma0 * (1.0 - slack) || S > h * c.sigma1 * (1.0 + slack))
            throw InvalidInput("shear sandwich h sigma0 <= S <= h sigma1 violated at element " + std::to_string(e));
        // On symmetric matrices with the Frobenius norm the bending operator
        // has eigenvalue B(1 - nu) on the deviatoric plane and B(1 + nu) on
        // the identity direction.
        const double B = tensors.bending[e];
        const double nu = tensors.poisson[e];
        const double lo = std::min(B * (1.0 - nu), B * (1.0 + nu));
        const double hi = std::max(B * (1.0 - nu), B * (1.0 + nu));
        if (lo < scale * c.xi0 * (1.0 - slack) || hi > scale * c.xi1 * (1.0 + slack))
            throw InvalidInput("bending sandwich violated at element " + std::to_string(e));
    }
    return c;
}

InclusionMaterial InclusionMaterial::scalar(double kappa) {
    InclusionMaterial m;
    m.kappa = kappa;
    return m;
}

Mat3 voigt_from_components(const std::array<double, 16> &P, double tol) {
    double scale = 0.0;
    for (double v : P)
        scale = std::max(scale, std::abs(v));
    const double eps = tol * std::max(scale, 1.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    const double v = P[flat(a, b, c, d)];
                    if (std::abs(v - P[flat(b, a, c, d)]) > eps || std::abs(v - P[flat(a, b, d, c)]) > eps ||
                        std::abs(v - P[flat(c, d, a, b)]) > eps)
                        throw InvalidInput("bending tensor violates minor/major symmetry");
                }
    Mat3 D;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            D(i, j) = P[flat(kVoigtPairs[i][0], kVoigtPairs[i][1], kVoigtPairs[j][0], kVoigtPairs[j][1])];
    return D;
}

std::map<std::size_t, Mat2> read_shear_table(const std::string &path) {
    std::map<std::size_t, Mat2> table;
    for (const auto &row : read_csv_rows(path, 5)) {
        Mat2 S;
        S << row[1], row[2], row[3], row[4];
        if (std::abs(S(0, 1) - S(1, 0)) > 1e-12 * std::max(1.0, S.cwiseAbs().maxCoeff()))
            throw InvalidInput(path + ": shear tensor is not symmetric");
        table[element_id(row[0], path)] = S;
    }
    return table;
}

std::map<std::size_t, Mat3> read_bending_table(const std::string &path) {
    std::map<std::size_t, Mat3> table;
    for (const auto &row : read_csv_rows(path, 17)) {
        std::array<double, 16> P{};
        std::copy(row.begin() + 1, row.end(), P.begin());
        table[element_id(row[0], path)] = voigt_from_components(P);
    }
    return table;
}

const char *to_string(JumpRegime regime) { return regime == JumpRegime::stiff ? "stiff" : "soft"; }

JumpBounds jump_bounds(const PlateTensors &tensors, const InclusionMaterial &inclusion, const ElementMask &mask) {
    if (inclusion.is_scalar()) {
        const double kappa = *inclusion.kappa;
        if (!(kappa > 0.0))
            throw InvalidInput("inclusion contrast kappa must be positive");
        if (std::abs(kappa - 1.0) <= 1e-12)
            throw InvalidInput("kappa = 1 gives no inclusion contrast (eta must be positive)");
        if (kappa > 1.0)
            return {kappa - 1.0, kappa, JumpRegime::stiff};
        return {1.0 - kappa, kappa, JumpRegime::soft};
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t lo_at = 0;
    std::size_t hi_at = 0;
    bool any = false;
    for (std::size_t e = 0; e < tensors.num_elements(); ++e) {
        if (!mask[e])
            continue;
        const auto s = inclusion.shear.find(e);
        const auto p = inclusion.bending.find(e);
        if (s == inclusion.shear.end() || p == inclusion.bending.end())
            throw InvalidInput("inclusion tensor tables miss element " + std::to_string(e));
        any = true;
        Eigen::SelfAdjointEigenSolver<Mat2> shear_eig(s->second / tensors.shear[e], Eigen::EigenvaluesOnly);
        const Mat3 D = bending_voigt(tensors.bending[e], tensors.poisson[e]);
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat3> bend_eig(p->second, D, Eigen::EigenvaluesOnly);
        if (bend_eig.info() != Eigen::Success)
            throw NumericalFailure("generalized eigenvalue solve failed at element " + std::to_string(e));
        for (double mu : {shear_eig.eigenvalues()(0), shear_eig.eigenvalues()(1), bend_eig.eigenvalues()(0),
                          bend_eig.eigenvalues()(2)}) {
            if (mu < lo) {
                lo = mu;
                lo_at = e;
            }
            if (mu > hi) {
                hi = mu;
                hi_at = e;
            }
        }
    }
    if (!any)
        throw InvalidInput("explicit inclusion tensors need a nonempty inclusion mask");
    constexpr double margin = 1e-12;
    if (lo > 1.0 + margin)
        return {lo - 1.0, hi, JumpRegime::stiff};
    if (hi < 1.0 - margin && lo > 0.0)
        return {1.0 - hi, lo, JumpRegime::soft};
    std::ostringstream msg;
    msg << "indefinite jump: relative eigenvalues span [" << lo << ", " << hi << "] (elements " << lo_at << " and "
        << hi_at << "); neither the stiff nor the soft regime holds";
    throw InvalidInput(msg.str());
}

ElementCoefficients reference_coefficients(const PlateTensors &tensors, std::size_t element) {
    return {tensors.shear[element] * Mat2::Identity(),
            bending_voigt(tensors.bending[element], tensors.poisson[element])};
}

ElementCoefficients composite_coefficients(const PlateTensors &tensors, const InclusionMaterial *inclusion,
                                           const ElementMask *mask, std::size_t element) {
    ElementCoefficients c = reference_coefficients(tensors, element);
    if (!inclusion || !mask || !(*mask)[element])
        return c;
    if (inclusion->is_scalar()) {
        c.shear *= *inclusion->kappa;
        c.bending *= *inclusion->kappa;
        return c;
    }
    const auto s = inclusion->shear.find(element);
    const auto p = inclusion->bending.find(element);
    if (s == inclusion->shear.end() || p == inclusion->bending.end())
        throw InvalidInput("inclusion tensor tables miss element " + std::to_string(element));
    return {s->second, p->second};
}

} // namespace rmplate
