#include "rmplate/geometry.hpp"

#include "rmplate/csv.hpp"
#include "rmplate/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <queue>
#include <sstream>

namespace rmplate {

namespace {

double cross(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Vec2 &a, const Vec2 &b, const Vec2 &c) {
    const double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
}

bool on_segment(const Vec2 &a, const Vec2 &b, const Vec2 &p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Vec2 &p1, const Vec2 &p2, const Vec2 &q1, const Vec2 &q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4)
        return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

Vec2 closest_on_segment(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0)
        return a;
    const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
    return a + t * d;
}

bool quad_is_convex(const std::array<Vec2, 4> &x) {
    for (int i = 0; i < 4; ++i) {
        const Vec2 &a = x[i];
        const Vec2 &b = x[(i + 1) % 4];
        const Vec2 &c = x[(i + 2) % 4];
        if (cross(b - a, c - b) <= 0.0)
            return false;
    }
    return true;
}

double polygon_to_polygon_distance(const Polygon &a, const Mesh &mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2 &v : a.vertices())
        best = std::min(best, mesh.boundary_distance(v));
    for (const BoundaryEdge &edge : mesh.boundary_edges)
        best = std::min(best, a.distance(mesh.nodes[edge.nodes[0]]));
    return best;
}

} // namespace

double segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
    return (p - closest_on_segment(p, a, b)).norm();
}

double Polygon::signed_area() const {
    double twice = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
        twice += cross(vertices_[i], vertices_[(i + 1) % n]);
    return 0.5 * twice;
}

double Polygon::area() const { return std::abs(signed_area()); }

Vec2 Polygon::centroid() const {
    const std::size_t n = vertices_.size();
    Vec2 c = Vec2::Zero();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 &a = vertices_[i];
        const Vec2 &b = vertices_[(i + 1) % n];
        const double w = cross(a, b);
        twice += w;
        c += w * (a + b);
    }
    if (twice == 0.0)
        return Vec2::Zero();
    return c / (3.0 * twice);
}

double Polygon::diameter() const {
    double d = 0.0;
    for (const Vec2 &a : vertices_)
        for (const Vec2 &b : vertices_)
            d = std::max(d, (a - b).norm());
    return d;
}

double Polygon::perimeter() const {
    double p = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
        p += (vertices_[(i + 1) % n] - vertices_[i]).norm();
    return p;
}

bool Polygon::is_simple() const {
    const std::size_t n = vertices_.size();
    if (n < 3)
        return false;
    for (const Vec2 &v : vertices_)
        if (!v.allFinite())
            return false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (vertices_[i] == vertices_[j])
                return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 &a = vertices_[i];
        const Vec2 &b = vertices_[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const Vec2 &c = vertices_[j];
            const Vec2 &d = vertices_[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex; reject
                // fold-backs where they overlap collinearly.
                const Vec2 &shared = (j == i + 1) ? b : a;
                const Vec2 &other_i = (j == i + 1) ? a : b;
                const Vec2 &other_j = (j == i + 1) ? d : c;
                if (orientation(other_i, shared, other_j) == 0 &&
                    (other_i - shared).dot(other_j - shared) > 0.0)
                    return false;
                continue;
            }
            if (segments_intersect(a, b, c, d))
                return false;
        }
    }
    return true;
}

bool Polygon::contains(const Vec2 &p) const {
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 &a = vertices_[i];
        const Vec2 &b = vertices_[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
            if (p.x() < x)
                inside = !inside;
        }
    }
    return inside;
}

double Polygon::distance(const Vec2 &p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
        best = std::min(best, segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
    return best;
}

Vec2 Polygon::closest_point(const Vec2 &p) const {
    double best = std::numeric_limits<double>::infinity();
    Vec2 result = p;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 q = closest_on_segment(p, vertices_[i], vertices_[(i + 1) % n]);
        const double d = (p - q).norm();
        if (d < best) {
            best = d;
            result = q;
        }
    }
    return result;
}

void Polygon::make_counterclockwise() {
    if (signed_area() < 0.0)
        std::reverse(vertices_.begin(), vertices_.end());
}

Polygon rectangle(double x0, double y0, double x1, double y1) {
    return Polygon({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

Polygon regular_polygon(const Vec2 &center, double radius, int sides) {
    return ellipse_polygon(center, radius, radius, sides);
}

Polygon ellipse_polygon(const Vec2 &center, double rx, double ry, int sides) {
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(sides));
    for (int k = 0; k < sides; ++k) {
        const double t = 2.0 * std::numbers::pi * k / sides;
        v.emplace_back(center.x() + rx * std::cos(t), center.y() + ry * std::sin(t));
    }
    return Polygon(std::move(v));
}

Domain make_domain(Polygon boundary, AprioriData apriori) {
    if (!boundary.is_simple())
        throw InvalidInput("domain polygon is not simple");
    boundary.make_counterclockwise();
    if (!(boundary.area() > 0.0))
        throw InvalidInput("domain polygon has zero area");
    if (!(apriori.rho0 > 0.0) || !(apriori.M0 > 0.0) || !(apriori.M1 > 0.0) ||
        !(apriori.s0 > 0.0) || !(apriori.d0 > 0.0) || !(apriori.h1 > 0.0))
        throw InvalidInput("a priori constants rho0, M0, M1, s0, d0, h1 must be positive");
    if (boundary.diameter() > apriori.M1 * apriori.rho0 * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "diam(domain) = " << boundary.diameter() << " exceeds M1*rho0 = "
            << apriori.M1 * apriori.rho0;
        throw InvalidInput(msg.str());
    }
    if (!apriori.x0)
        apriori.x0 = boundary.centroid();
    const Vec2 x0 = *apriori.x0;
    if (!boundary.contains(x0) || boundary.distance(x0) < apriori.s0 * apriori.rho0) {
        std::ostringstream msg;
        msg << "disk of radius s0*rho0 = " << apriori.s0 * apriori.rho0 << " around x0 = ("
            << x0.x() << ", " << x0.y() << ") is not inside the domain";
        throw InvalidInput(msg.str());
    }
    return Domain{std::move(boundary), apriori};
}

BoundaryDistance distance_to_boundary(const Vec2 &point, const Domain &domain) {
    return {domain.boundary.distance(point), !domain.boundary.contains(point) &&
                                                 domain.boundary.distance(point) > 0.0};
}

Vec2 Mesh::centroid(std::size_t e) const {
    const auto &q = elements[e];
    return 0.25 * (nodes[q[0]] + nodes[q[1]] + nodes[q[2]] + nodes[q[3]]);
}

double Mesh::element_area(std::size_t e) const {
    const auto &q = elements[e];
    return 0.5 * (cross(nodes[q[2]] - nodes[q[0]], nodes[q[3]] - nodes[q[1]]));
}

double Mesh::area() const {
    double a = 0.0;
    for (std::size_t e = 0; e < elements.size(); ++e)
        a += element_area(e);
    return a;
}

double Mesh::perimeter() const {
    double p = 0.0;
    for (const BoundaryEdge &edge : boundary_edges)
        p += edge.length;
    return p;
}

double Mesh::boundary_distance(const Vec2 &p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const BoundaryEdge &edge : boundary_edges)
        best = std::min(best, segment_distance(p, nodes[edge.nodes[0]], nodes[edge.nodes[1]]));
    return best;
}

bool Mesh::contains(const Vec2 &p) const {
    bool inside = false;
    for (const BoundaryEdge &edge : boundary_edges) {
        const Vec2 &a = nodes[edge.nodes[0]];
        const Vec2 &b = nodes[edge.nodes[1]];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x)
                inside = !inside;
        }
    }
    return inside;
}

Vec2 Mesh::area_centroid() const {
    Vec2 c = Vec2::Zero();
    double total = 0.0;
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const auto &q = elements[e];
        const Polygon quad({nodes[q[0]], nodes[q[1]], nodes[q[2]], nodes[q[3]]});
        const double a = element_area(e);
        c += a * quad.centroid();
        total += a;
    }
    return c / total;
}

void finalize_mesh(Mesh &mesh) {
    // Edges owned by exactly one element form the boundary.
    std::map<std::pair<int, int>, std::pair<int, int>> owners; // key (min,max) -> (element, count)
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto &q = mesh.elements[e];
        for (int k = 0; k < 4; ++k) {
            const int a = q[k];
            const int b = q[(k + 1) % 4];
            auto [it, inserted] = owners.try_emplace({std::min(a, b), std::max(a, b)},
                                                     static_cast<int>(e), 0);
            ++it->second.second;
            if (it->second.second > 2)
                throw InvalidInput("mesh edge shared by more than two elements");
        }
    }
    std::map<int, BoundaryEdge> outgoing;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto &q = mesh.elements[e];
        for (int k = 0; k < 4; ++k) {
            const int a = q[k];
            const int b = q[(k + 1) % 4];
            if (owners.at({std::min(a, b), std::max(a, b)}).second != 1)
                continue;
            BoundaryEdge edge;
            edge.nodes = {a, b};
            edge.element = static_cast<int>(e);
            const Vec2 d = mesh.nodes[b] - mesh.nodes[a];
            edge.length = d.norm();
            edge.tangent = d / edge.length;
            edge.normal = Vec2(edge.tangent.y(), -edge.tangent.x());
            if (!outgoing.emplace(a, edge).second)
                throw InvalidInput("mesh boundary pinches at a node; adjust target_size");
        }
    }
    mesh.boundary_edges.clear();
    mesh.loop_offsets.assign(1, 0);
    while (!outgoing.empty()) {
        const int start = outgoing.begin()->first;
        int current = start;
        do {
            auto it = outgoing.find(current);
            if (it == outgoing.end())
                throw InvalidInput("mesh boundary is not a set of closed loops");
            mesh.boundary_edges.push_back(it->second);
            current = it->second.nodes[1];
            outgoing.erase(it);
        } while (current != start);
        mesh.loop_offsets.push_back(mesh.boundary_edges.size());
    }
    mesh.mesh_size = 0.0;
    for (const auto &q : mesh.elements) {
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                mesh.mesh_size = std::max(mesh.mesh_size, (mesh.nodes[q[i]] - mesh.nodes[q[j]]).norm());
    }
}

Mesh structured_mesh(double x0, double y0, double x1, double y1, int nx, int ny) {
    if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0))
        throw InvalidInput("structured_mesh needs nx, ny >= 1 and a nondegenerate box");
    Mesh mesh;
    mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.nodes.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    finalize_mesh(mesh);
    return mesh;
}

Mesh generate_mesh(const Domain &domain, double target_size, const MeshOptions &options) {
    if (!(target_size > 0.0))
        throw InvalidInput("target_size must be positive");
    const Polygon &poly = domain.boundary;
    if (!poly.is_simple())
        throw InvalidInput("domain polygon is not simple");

    Vec2 lo = poly[0];
    Vec2 hi = poly[0];
    for (const Vec2 &v : poly.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double width = hi.x() - lo.x();
    const double height = hi.y() - lo.y();
    // Small slack so that exact multiples (1/0.25) do not round up.
    const auto cells = [target_size](double extent) {
        return std::max(1.0, std::ceil(extent / target_size - 1e-9));
    };
    const double nxd = cells(width);
    const double nyd = cells(height);
    if (nxd * nyd > 4.0 * static_cast<double>(options.max_elements))
        throw InvalidInput("mesh would exceed the element budget");
    const int nx = static_cast<int>(nxd);
    const int ny = static_cast<int>(nyd);
    const double hx = width / nx;
    const double hy = height / ny;

    std::vector<int> node_id(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1);
    const auto grid = [nx](int i, int j) { return static_cast<std::size_t>(j * (nx + 1) + i); };
    Mesh mesh;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 c(lo.x() + (i + 0.5) * hx, lo.y() + (j + 0.5) * hy);
            if (!poly.contains(c))
                continue;
            std::array<int, 4> q{};
            const std::array<std::pair<int, int>, 4> corners{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
            for (int k = 0; k < 4; ++k) {
                auto [ci, cj] = corners[k];
                int &id = node_id[grid(ci, cj)];
                if (id < 0) {
                    id = static_cast<int>(mesh.nodes.size());
                    mesh.nodes.emplace_back(lo.x() + ci * hx, lo.y() + cj * hy);
                }
                q[k] = id;
            }
            mesh.elements.push_back(q);
        }
    }
    if (mesh.elements.empty())
        throw InvalidInput("target_size too coarse: no grid cell centroid falls inside the domain");
    if (mesh.elements.size() > options.max_elements)
        throw InvalidInput("mesh would exceed the element budget");

    // Connectivity check through shared nodes.
    {
        std::vector<std::vector<int>> node_elements(mesh.nodes.size());
        for (std::size_t e = 0; e < mesh.elements.size(); ++e)
            for (int n : mesh.elements[e])
                node_elements[n].push_back(static_cast<int>(e));
        std::vector<char> seen(mesh.elements.size(), 0);
        std::queue<int> todo;
        todo.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!todo.empty()) {
            const int e = todo.front();
            todo.pop();
            for (int n : mesh.elements[e])
                for (int f : node_elements[n])
                    if (!seen[f]) {
                        seen[f] = 1;
                        ++reached;
                        todo.push(f);
                    }
        }
        if (reached != mesh.elements.size())
            throw InvalidInput("grid overlay produced a disconnected mesh; decrease target_size");
    }

    finalize_mesh(mesh);

    // Snap boundary nodes that sit close to the polygon.
    const double snap = options.snap_fraction * std::min(hx, hy);
    std::vector<std::vector<int>> node_elements(mesh.nodes.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        for (int n : mesh.elements[e])
            node_elements[n].push_back(static_cast<int>(e));
    bool moved = false;
    for (const BoundaryEdge &edge : mesh.boundary_edges) {
        const int n = edge.nodes[0];
        const Vec2 old = mesh.nodes[n];
        const double d = poly.distance(old);
        if (d == 0.0 || d > snap)
            continue;
        mesh.nodes[n] = poly.closest_point(old);
        bool ok = true;
        for (int e : node_elements[n]) {
            const auto &q = mesh.elements[e];
            if (!quad_is_convex({mesh.nodes[q[0]], mesh.nodes[q[1]], mesh.nodes[q[2]], mesh.nodes[q[3]]})) {
                ok = false;
                break;
            }
        }
        if (!ok)
            mesh.nodes[n] = old;
        else
            moved = true;
    }
    if (moved)
        finalize_mesh(mesh);
    return mesh;
}

std::size_t ElementMask::count() const {
    return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](char f) { return f != 0; }));
}

ElementMask make_mask(const Mesh &mesh, std::vector<char> flags) {
    if (flags.size() != mesh.num_elements())
        throw InvalidInput("mask size does not match the mesh");
    ElementMask mask{std::move(flags), 0.0};
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        if (mask.flags[e])
            mask.area += mesh.element_area(e);
    return mask;
}

ElementMask interior_region(const Mesh &mesh, double t) {
    if (!(t >= 0.0))
        throw InvalidInput("erosion depth must be nonnegative");
    std::vector<char> flags(mesh.num_elements(), 0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        flags[e] = mesh.boundary_distance(mesh.centroid(e)) > t;
    return make_mask(mesh, std::move(flags));
}

Inclusion rasterize_inclusion(const Mesh &mesh, std::vector<Polygon> polygons, const AprioriData *apriori) {
    for (const Polygon &p : polygons)
        if (!p.is_simple())
            throw InvalidInput("inclusion polygon is not simple");
    std::vector<char> flags(mesh.num_elements(), 0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Vec2 c = mesh.centroid(e);
        for (const Polygon &p : polygons)
            if (p.contains(c)) {
                flags[e] = 1;
                break;
            }
    }
    Inclusion inc;
    inc.mask = make_mask(mesh, std::move(flags));
    inc.boundary_clearance = std::numeric_limits<double>::infinity();
    for (const Polygon &p : polygons)
        inc.boundary_clearance = std::min(inc.boundary_clearance, polygon_to_polygon_distance(p, mesh));
    if (apriori && !polygons.empty() && inc.boundary_clearance < apriori->d0 * apriori->rho0) {
        std::ostringstream msg;
        msg << "dist(D, boundary) = " << inc.boundary_clearance << " is below d0*rho0 = "
            << apriori->d0 * apriori->rho0;
        inc.warnings.push_back(msg.str());
    }
    inc.polygons = std::move(polygons);
    return inc;
}

FatnessResult fatness_ratio(const Mesh &mesh, const ElementMask &indicator, std::span<const Polygon> polygons,
                            double depth) {
    if (!(depth >= 0.0))
        throw InvalidInput("fatness depth must be nonnegative");
    if (indicator.empty() || indicator.area <= 0.0)
        return {1.0, true};
    double deep = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        if (!indicator[e])
            continue;
        const Vec2 c = mesh.centroid(e);
        double d = std::numeric_limits<double>::infinity();
        for (const Polygon &p : polygons)
            d = std::min(d, p.distance(c));
        if (d > depth || depth == 0.0)
            deep += mesh.element_area(e);
    }
    return {deep / indicator.area, false};
}

std::vector<Polygon> read_polygons(std::istream &in) {
    std::vector<Polygon> polygons;
    std::vector<Vec2> current;
    const auto flush = [&] {
        if (!current.empty()) {
            polygons.emplace_back(std::move(current));
            current.clear();
        }
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const bool commented = hash != std::string::npos;
        if (commented)
            line.erase(hash);
        std::istringstream ls(line);
        double x = 0.0;
        double y = 0.0;
        if (!(ls >> x)) {
            if (!commented && line.find_first_not_of(" \t\r") != std::string::npos)
                throw InvalidInput("polygon file line " + std::to_string(lineno) + ": expected \"x y\"");
            if (!commented)
                flush();
            continue;
        }
        std::string rest;
        if (!(ls >> y) || (ls >> rest))
            throw InvalidInput("polygon file line " + std::to_string(lineno) + ": expected \"x y\"");
        current.emplace_back(x, y);
    }
    flush();
    return polygons;
}

std::vector<Polygon> read_polygons_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open polygon file " + path);
    return read_polygons(in);
}

void write_mask_csv(std::ostream &out, const ElementMask &mask) {
    write_schema_line(out, "element-mask");
    out << "element_id,flag\n";
    for (std::size_t e = 0; e < mask.flags.size(); ++e)
        out << e << ',' << (mask.flags[e] ? 1 : 0) << '\n';
}

} // namespace rmplate
