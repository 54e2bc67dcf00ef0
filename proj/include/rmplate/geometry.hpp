#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rmplate {

using Vec2 = Eigen::Vector2d;

// Simple closed polygon given by its vertex loop (the closing edge is
// implicit). Orientation is whatever the caller supplied until
// make_counterclockwise() is called.
class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {}

    const std::vector<Vec2> &vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const Vec2 &operator[](std::size_t i) const { return vertices_[i]; }

    double signed_area() const;
    double area() const;
    Vec2 centroid() const;
    double diameter() const;
    double perimeter() const;

    // No two non-adjacent edges intersect, no repeated vertices, >= 3 vertices.
    bool is_simple() const;
    // Even-odd rule. Points exactly on an edge may go either way.
    bool contains(const Vec2 &p) const;
    // Exact distance to the edge set.
    double distance(const Vec2 &p) const;
    Vec2 closest_point(const Vec2 &p) const;

    void make_counterclockwise();

private:
    std::vector<Vec2> vertices_;
};

Polygon rectangle(double x0, double y0, double x1, double y1);
Polygon regular_polygon(const Vec2 &center, double radius, int sides);
Polygon ellipse_polygon(const Vec2 &center, double rx, double ry, int sides);

// Distance from p to the segment [a, b].
double segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b);

// A priori constants of the plate domain. rho0 is the length scale all
// other lengths are measured in.
struct AprioriData {
    double rho0 = 1.0;
    double M0 = 1.0;  // Lipschitz constant, user supplied
    double M1 = 10.0; // diam(Omega) <= M1 * rho0
    double s0 = 0.1;  // B_{s0 rho0}(x0) inside Omega
    double d0 = 0.05; // dist(D, boundary) >= d0 rho0
    double h1 = 0.05; // fatness depth factor
    std::optional<Vec2> x0; // defaults to the polygon centroid
};

struct Domain {
    Polygon boundary;
    AprioriData apriori;
};

// Validates the polygon and the a priori data, orients the polygon
// counterclockwise and fills in x0. Throws InvalidInput.
Domain make_domain(Polygon boundary, AprioriData apriori = {});

struct BoundaryDistance {
    double distance = 0.0;
    bool exterior = false;
};

BoundaryDistance distance_to_boundary(const Vec2 &point, const Domain &domain);

struct BoundaryEdge {
    std::array<int, 2> nodes{}; // traversed with the domain on the left
    int element = -1;
    Vec2 normal = Vec2::Zero();  // outward unit normal
    Vec2 tangent = Vec2::Zero(); // unit, counterclockwise
    double length = 0.0;
};

// Conforming bilinear quadrilateral mesh. Elements list their nodes
// counterclockwise. Boundary edges are stored loop by loop; loop k is
// [loop_offsets[k], loop_offsets[k + 1]).
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 4>> elements;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::size_t> loop_offsets;
    double mesh_size = 0.0;

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_elements() const { return elements.size(); }
    std::size_t num_loops() const { return loop_offsets.empty() ? 0 : loop_offsets.size() - 1; }

    Vec2 centroid(std::size_t e) const;
    double element_area(std::size_t e) const;
    double area() const;
    double perimeter() const;
    // Exact distance to the union of boundary edges.
    double boundary_distance(const Vec2 &p) const;
    // Even-odd test against the boundary loops.
    bool contains(const Vec2 &p) const;
    Vec2 area_centroid() const;
};

struct MeshOptions {
    std::size_t max_elements = 250000;
    // Boundary nodes closer than this fraction of the cell size to the
    // polygon are moved onto it.
    double snap_fraction = 0.25;
};

// Overlays a uniform grid aligned with the polygon's bounding box (pitch at
// most target_size), keeps the cells whose centroid is inside, and snaps
// nearby boundary nodes onto the polygon. Axis-aligned rectangles come out
// as exact structured grids.
Mesh generate_mesh(const Domain &domain, double target_size, const MeshOptions &options = {});

// nx by ny structured grid of [x0, x1] x [y0, y1].
Mesh structured_mesh(double x0, double y0, double x1, double y1, int nx, int ny);

// Rebuilds boundary edges, loops and mesh_size from nodes and elements.
void finalize_mesh(Mesh &mesh);

struct ElementMask {
    std::vector<char> flags;
    double area = 0.0;

    bool operator[](std::size_t e) const { return flags[e] != 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
};

ElementMask make_mask(const Mesh &mesh, std::vector<char> flags);

// Elements whose centroid is strictly farther than t from the boundary.
ElementMask interior_region(const Mesh &mesh, double t);

struct Inclusion {
    std::vector<Polygon> polygons;
    ElementMask mask;
    // dist(D, boundary) measured between the polygons and the mesh boundary;
    // +inf when there are no polygons.
    double boundary_clearance = 0.0;
    std::vector<std::string> warnings;
};

Inclusion rasterize_inclusion(const Mesh &mesh, std::vector<Polygon> polygons,
                              const AprioriData *apriori = nullptr);

struct FatnessResult {
    double ratio = 1.0;
    bool empty_indicator = false;
    bool fat() const { return ratio >= 0.5; }
};

// |D_depth| / |D| where D_depth keeps the flagged elements whose centroid
// is farther than depth from the inclusion polygons' boundary.
FatnessResult fatness_ratio(const Mesh &mesh, const ElementMask &indicator,
                            std::span<const Polygon> polygons, double depth);

// "x y" per line, blank lines separate polygons, '#' starts a comment.
std::vector<Polygon> read_polygons(std::istream &in);
std::vector<Polygon> read_polygons_file(const std::string &path);
void write_mask_csv(std::ostream &out, const ElementMask &mask);

} // namespace rmplate
