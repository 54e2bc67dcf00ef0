#include "rmplate/config.hpp"

#include "rmplate/error.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

namespace rmplate {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct LineError {
    int line;
    std::string key;

    [[noreturn]] void fail(const std::string &what) const {
        throw InvalidInput("config line " + std::to_string(line) + " (" + key + "): " + what);
    }
};

double to_double(const std::string &text, const LineError &where) {
    double v = 0.0;
    const char *end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        where.fail("expected a number, got '" + text + "'");
    return v;
}

std::vector<double> to_doubles(std::string text, const LineError &where) {
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok)
        out.push_back(to_double(tok, where));
    return out;
}

int to_int(const std::string &text, const LineError &where) {
    int v = 0;
    const char *end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        where.fail("expected an integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string &text, const LineError &where) {
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    where.fail("expected true or false");
}

std::string resolve(const std::string &path, const std::string &base_dir, const LineError &where) {
    fs::path p(path);
    if (p.is_relative())
        p = fs::path(base_dir) / p;
    if (!fs::exists(p))
        where.fail("file not found: " + p.string());
    return p.string();
}

} // namespace

double LoadSpec::param(const std::string &key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

LoadSpec parse_load_spec(const std::string &text) {
    std::istringstream in(text);
    LoadSpec spec;
    if (!(in >> spec.family))
        throw InvalidInput("empty load specification");
    static const std::vector<std::string> families{"pure_bending", "twist", "edge_moment", "shear_bending", "random",
                                                   "csv"};
    if (std::find(families.begin(), families.end(), spec.family) == families.end())
        throw InvalidInput("unknown load family '" + spec.family + "'");
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (spec.family == "csv" && eq == std::string::npos) {
            spec.path = tok;
            continue;
        }
        if (eq == std::string::npos)
            throw InvalidInput("load parameter '" + tok + "' is not key=value");
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "path") {
            spec.path = value;
            continue;
        }
        double v = 0.0;
        const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
        if (r.ec != std::errc() || r.ptr != value.data() + value.size())
            throw InvalidInput("load parameter '" + tok + "' is not numeric");
        spec.params[key] = v;
    }
    if (spec.family == "csv" && spec.path.empty())
        throw InvalidInput("csv load needs a file path");
    return spec;
}

ExperimentConfig parse_config(std::istream &in, const std::string &base_dir) {
    ExperimentConfig c;
    bool rho_set = false;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const LineError where{lineno, key};
        if (value.empty())
            where.fail("missing value");

        const auto vec = [&](std::size_t n) {
            const auto v = to_doubles(value, where);
            if (v.size() != n)
                where.fail("expected " + std::to_string(n) + " numbers");
            return v;
        };

        if (key == "id")
            c.id = value;
        else if (key == "domain")
            c.domain_path = resolve(value, base_dir, where);
        else if (key == "domain_rect") {
            const auto v = vec(4);
            std::copy(v.begin(), v.end(), c.domain_rect.begin());
        } else if (key == "rho0")
            c.apriori.rho0 = to_double(value, where);
        else if (key == "M0")
            c.apriori.M0 = to_double(value, where);
        else if (key == "M1")
            c.apriori.M1 = to_double(value, where);
        else if (key == "s0")
            c.apriori.s0 = to_double(value, where);
        else if (key == "d0")
            c.apriori.d0 = to_double(value, where);
        else if (key == "h1")
            c.apriori.h1 = to_double(value, where);
        else if (key == "x0") {
            const auto v = vec(2);
            c.apriori.x0 = Vec2(v[0], v[1]);
        } else if (key == "mesh_size")
            c.mesh_size = to_double(value, where);
        else if (key == "lambda")
            c.lambda = to_double(value, where);
        else if (key == "mu")
            c.mu = to_double(value, where);
        else if (key == "h" || key == "thickness")
            c.thickness = to_double(value, where);
        else if (key == "alpha0")
            c.alpha0 = to_double(value, where);
        else if (key == "gamma0")
            c.gamma0 = to_double(value, where);
        else if (key == "alpha1")
            c.alpha1 = to_double(value, where);
        else if (key == "inclusion")
            c.inclusion_path = resolve(value, base_dir, where);
        else if (key == "inclusion_disk") {
            auto v = to_doubles(value, where);
            if (v.size() != 3 && v.size() != 4)
                where.fail("expected cx cy r [sides]");
            const int sides = v.size() == 4 ? static_cast<int>(v[3]) : 64;
            if (!(v[2] > 0.0) || sides < 3)
                where.fail("disk needs r > 0 and at least 3 sides");
            c.inclusion_shapes.push_back(regular_polygon(Vec2(v[0], v[1]), v[2], sides));
        } else if (key == "inclusion_rect") {
            const auto v = vec(4);
            if (!(v[2] > v[0] && v[3] > v[1]))
                where.fail("rectangle needs x0 < x1 and y0 < y1");
            c.inclusion_shapes.push_back(rectangle(v[0], v[1], v[2], v[3]));
        } else if (key == "kappa")
            c.kappa = to_double(value, where);
        else if (key == "shear_table")
            c.shear_table = resolve(value, base_dir, where);
        else if (key == "bending_table")
            c.bending_table = resolve(value, base_dir, where);
        else if (key == "load") {
            try {
                c.load = parse_load_spec(value);
            } catch (const InvalidInput &e) {
                where.fail(e.what());
            }
            if (c.load.family == "csv")
                c.load.path = resolve(c.load.path, base_dir, where);
        } else if (key == "shear") {
            if (value == "assumed")
                c.shear = ShearMode::assumed;
            else if (value == "full_integration" || value == "full")
                c.shear = ShearMode::full_integration;
            else
                where.fail("expected assumed or full_integration");
        } else if (key == "dense_oracle")
            c.dense_oracle = to_bool(value, where);
        else if (key == "jobs")
            c.jobs = to_int(value, where);
        else if (key == "theta")
            c.theta = to_double(value, where);
        else if (key == "tol")
            c.tol = to_double(value, where);
        else if (key == "rho") {
            c.rho = to_doubles(value, where);
            rho_set = true;
        } else if (key == "center") {
            const auto v = vec(2);
            c.center = Vec2(v[0], v[1]);
        } else if (key == "lps_pitch")
            c.lps_pitch = to_double(value, where);
        else if (key == "subdivisions")
            c.subdivisions = to_int(value, where);
        else if (key == "C1")
            c.C1 = to_double(value, where);
        else if (key == "C2")
            c.C2 = to_double(value, where);
        else if (key == "F")
            c.F = to_double(value, where);
        else if (key == "levels")
            c.levels = to_int(value, where);
        else if (key == "seed") {
            const int s = to_int(value, where);
            if (s < 0)
                where.fail("seed must be nonnegative");
            c.seed = static_cast<std::uint64_t>(s);
        } else
            where.fail("unknown key");
    }

    if (!(c.mesh_size > 0.0))
        throw InvalidInput("mesh_size must be positive");
    if (!(c.theta > 0.0 && c.theta < 1.0))
        throw InvalidInput("theta must lie in (0, 1)");
    if (!(c.tol > 0.0))
        throw InvalidInput("tol must be positive");
    if (c.jobs < 1)
        throw InvalidInput("jobs must be at least 1");
    if (c.levels < 2)
        throw InvalidInput("levels must be at least 2");
    if (c.subdivisions < 1)
        throw InvalidInput("subdivisions must be at least 1");
    if (rho_set && c.rho.empty())
        throw InvalidInput("rho needs at least one value");
    for (double r : c.rho)
        if (!(r > 0.0))
            throw InvalidInput("rho values must be positive");
    if (!(c.C1 > 0.0 && c.C2 > 0.0))
        throw InvalidInput("C1 and C2 must be positive");
    if (c.F && !(*c.F >= 1.0))
        throw InvalidInput("frequency override F must be at least 1");
    if (c.lps_pitch && !(*c.lps_pitch > 0.0))
        throw InvalidInput("lps_pitch must be positive");
    if (c.has_inclusion() && !c.kappa && (c.shear_table.empty() || c.bending_table.empty()))
        throw InvalidInput("inclusion given without kappa or both tensor tables");
    return c;
}

ExperimentConfig read_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open config " + path);
    const fs::path p(path);
    ExperimentConfig c = parse_config(in, p.parent_path().empty() ? "." : p.parent_path().string());
    c.source = path;
    if (c.id == "experiment")
        c.id = p.stem().string();
    return c;
}

BoundaryLoad make_load(const LoadSpec &spec, const Mesh &mesh, const PlateTensors &tensors) {
    if (spec.family == "pure_bending")
        return pure_bending_load(mesh, tensors, spec.param("a", 1.0));
    if (spec.family == "twist")
        return twist_load(mesh, spec.param("c", 1.0));
    if (spec.family == "edge_moment")
        return edge_moment_load(mesh, spec.param("c", 1.0));
    if (spec.family == "shear_bending")
        return shear_bending_load(mesh, spec.param("q", 1.0));
    if (spec.family == "random") {
        const double seed = spec.param("seed", 1.0);
        if (seed < 0.0)
            throw InvalidInput("random load seed must be nonnegative");
        return random_load(mesh, static_cast<std::uint64_t>(seed));
    }
    if (spec.family == "csv") {
        std::ifstream in(spec.path);
        if (!in)
            throw InvalidInput("cannot open load file " + spec.path);
        return read_load_csv(in, mesh);
    }
    throw InvalidInput("unknown load family '" + spec.family + "'");
}

Problem build_problem(const ExperimentConfig &config) {
    Problem p;
    Polygon boundary;
    if (!config.domain_path.empty()) {
        auto polys = read_polygons_file(config.domain_path);
        if (polys.size() != 1)
            throw InvalidInput("domain file must hold exactly one polygon");
        boundary = std::move(polys.front());
    } else {
        const auto &r = config.domain_rect;
        if (!(r[2] > r[0] && r[3] > r[1]))
            throw InvalidInput("domain_rect needs x0 < x1 and y0 < y1");
        boundary = rectangle(r[0], r[1], r[2], r[3]);
    }
    p.domain = make_domain(std::move(boundary), config.apriori);
    p.mesh = generate_mesh(p.domain, config.mesh_size);
    p.material = IsotropicMaterial::uniform(p.mesh.num_elements(), config.lambda, config.mu, config.thickness,
                                            config.alpha0, config.gamma0, config.alpha1);
    p.tensors = derive_plate_tensors(p.material);
    p.ellipticity = ellipticity_constants(p.material, p.tensors);

    std::vector<Polygon> shapes = config.inclusion_shapes;
    if (!config.inclusion_path.empty()) {
        auto more = read_polygons_file(config.inclusion_path);
        shapes.insert(shapes.end(), more.begin(), more.end());
    }
    p.inclusion = rasterize_inclusion(p.mesh, std::move(shapes), &p.domain.apriori);
    p.warnings = p.inclusion.warnings;
    if (!p.inclusion.polygons.empty() && p.inclusion.mask.empty())
        p.warnings.push_back("inclusion polygons cover no element centroid; treated as no inclusion");
    if (config.kappa)
        p.inclusion_material = InclusionMaterial::scalar(*config.kappa);
    if (!config.shear_table.empty())
        p.inclusion_material.shear = read_shear_table(config.shear_table);
    if (!config.bending_table.empty())
        p.inclusion_material.bending = read_bending_table(config.bending_table);

    p.load = make_load(config.load, p.mesh, p.tensors);
    return p;
}

} // namespace rmplate
