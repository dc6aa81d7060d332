#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace mixlab {

enum class DomainTag { UnitSquare, LShape, Imported };

// Triangulation with globally oriented edges. Construction is
// single-threaded; once built a Mesh is immutable and can be shared
// read-only across concurrent analysis tasks.
//
// Conventions (fixed, relied upon by the RT0 spaces):
//  - triangles are counter-clockwise;
//  - an edge is the vertex pair (a,b) with a < b; its unit normal is the
//    90-degree clockwise rotation of the unit vector from a to b;
//  - local edge i of a triangle is the edge opposite local vertex i;
//  - tri_edges sign is +1 when the triangle's outward normal on that edge
//    coincides with the global edge normal.
struct Mesh {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<std::array<std::size_t, 2>> edges;

    struct TriEdge {
        std::size_t edge;
        int sign; // +1 / -1
    };
    std::vector<std::array<TriEdge, 3>> tri_edges;

    // plus/minus side triangle of each edge (minus = npos on the boundary
    // when the only triangle is on the plus side, and vice versa)
    std::vector<std::array<std::size_t, 2>> edge_tris;

    std::vector<char> boundary_vertex;
    std::vector<char> boundary_edge;
    DomainTag domain_tag = DomainTag::Imported;

    std::size_t n_vertices() const { return vertices.size(); }
    std::size_t n_triangles() const { return triangles.size(); }
    std::size_t n_edges() const { return edges.size(); }

    double tri_area(std::size_t t) const;
    std::array<double, 2> tri_centroid(std::size_t t) const;
    double edge_length(std::size_t e) const;
    std::array<double, 2> edge_normal(std::size_t e) const; // global convention

    double total_area() const;
    double h_max() const;

    // triangle containing the point (barycentric test with tolerance);
    // ties broken by lowest triangle index. Throws when outside the mesh.
    std::size_t locate(double x, double y) const;

    std::size_t n_interior_vertices() const;
};

Mesh gen_crossed(std::size_t n);
Mesh gen_right(std::size_t n);
Mesh gen_lshape(std::size_t n);

enum class MeshFormat { TrianglePair, InternalJson };
Mesh import_mesh(const std::string& path, MeshFormat fmt);

Mesh uniform_refine(const Mesh& mesh);

// Builds a Mesh from raw vertices/triangles: fixes orientation, derives the
// edge topology and boundary flags, and runs the validation pass.
Mesh make_mesh(std::vector<std::array<double, 2>> vertices,
               std::vector<std::array<std::size_t, 3>> triangles, DomainTag tag);

// Asserts every structural invariant; throws std::runtime_error naming the
// offending entity.
void validate_mesh(const Mesh& mesh);

void write_internal_json(const Mesh& mesh, const std::string& path);

} // namespace mixlab
