#pragma once

#include "rmplate/geometry.hpp"
#include "rmplate/material.hpp"
#include "rmplate/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rmplate {

// "pure_bending a=1", "twist c=1", "edge_moment c=1", "shear_bending q=1",
// "random seed=3", "csv path".
struct LoadSpec {
    std::string family = "pure_bending";
    std::map<std::string, double> params;
    std::string path; // csv family only

    double param(const std::string &key, double fallback) const;
};

LoadSpec parse_load_spec(const std::string &text);

struct ExperimentConfig {
    std::string id = "experiment";
    std::string source; // config file path, empty for in-memory configs

    std::string domain_path;
    std::array<double, 4> domain_rect{0.0, 0.0, 1.0, 1.0};
    AprioriData apriori;
    double mesh_size = 0.05;

    double lambda = 1.0;
    double mu = 1.0;
    double thickness = 1.0;
    double alpha0 = 1.0;
    double gamma0 = 5.0;
    double alpha1 = 2.0;

    std::string inclusion_path;
    std::vector<Polygon> inclusion_shapes; // from inclusion_disk / inclusion_rect keys
    std::optional<double> kappa;
    std::string shear_table;
    std::string bending_table;

    LoadSpec load;
    ShearMode shear = ShearMode::assumed;
    bool dense_oracle = false;
    int jobs = 1;

    double theta = 0.3;
    double tol = 1e-9; // load compatibility, relative
    std::vector<double> rho{0.02};
    std::optional<Vec2> center;
    std::optional<double> lps_pitch;
    int subdivisions = 2; // energy field quadrature refinement

    double C1 = 1.0;
    double C2 = 1.0;
    std::optional<double> F; // frequency override

    int levels = 3;
    std::uint64_t seed = 1;

    bool has_inclusion() const { return !inclusion_path.empty() || !inclusion_shapes.empty(); }
};

// Flat "key = value" lines, '#' comments. Relative paths are resolved
// against base_dir. Throws InvalidInput naming the offending line.
ExperimentConfig parse_config(std::istream &in, const std::string &base_dir = ".");
ExperimentConfig read_config(const std::string &path);

// Everything a forward solve needs, built from a config.
struct Problem {
    Domain domain;
    Mesh mesh;
    IsotropicMaterial material;
    PlateTensors tensors;
    EllipticityConstants ellipticity;
    Inclusion inclusion;
    InclusionMaterial inclusion_material;
    BoundaryLoad load;
    std::vector<std::string> warnings;

    bool has_inclusion() const { return !inclusion.mask.flags.empty() && !inclusion.mask.empty(); }
};

Problem build_problem(const ExperimentConfig &config);

BoundaryLoad make_load(const LoadSpec &spec, const Mesh &mesh, const PlateTensors &tensors);

} // namespace rmplate
