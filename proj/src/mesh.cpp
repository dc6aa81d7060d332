#include "mixlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mixlab {

namespace {

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

} // namespace

double Mesh::tri_area(std::size_t t) const {
    const auto& tr = triangles[t];
    return signed_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
}

std::array<double, 2> Mesh::tri_centroid(std::size_t t) const {
    const auto& tr = triangles[t];
    return {(vertices[tr[0]][0] + vertices[tr[1]][0] + vertices[tr[2]][0]) / 3.0,
            (vertices[tr[0]][1] + vertices[tr[1]][1] + vertices[tr[2]][1]) / 3.0};
}

double Mesh::edge_length(std::size_t e) const {
    const auto& a = vertices[edges[e][0]];
    const auto& b = vertices[edges[e][1]];
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}

std::array<double, 2> Mesh::edge_normal(std::size_t e) const {
    const auto& a = vertices[edges[e][0]];
    const auto& b = vertices[edges[e][1]];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    // 90-degree clockwise rotation of the a->b unit vector
    return {(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
}

double Mesh::total_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < n_triangles(); ++t) s += tri_area(t);
    return s;
}

double Mesh::h_max() const {
    double h = 0.0;
    for (std::size_t e = 0; e < n_edges(); ++e) h = std::max(h, edge_length(e));
    return h;
}

std::size_t Mesh::locate(double x, double y) const {
    const double tol = 1e-12 * std::max(1.0, h_max());
    for (std::size_t t = 0; t < n_triangles(); ++t) {
        const auto& tr = triangles[t];
        const double a = tri_area(t);
        const double l0 = signed_area({x, y}, vertices[tr[1]], vertices[tr[2]]) / a;
        const double l1 = signed_area(vertices[tr[0]], {x, y}, vertices[tr[2]]) / a;
        const double l2 = 1.0 - l0 - l1;
        if (l0 >= -tol && l1 >= -tol && l2 >= -tol) return t;
    }
    throw std::runtime_error("locate: point (" + std::to_string(x) + ", " + std::to_string(y) +
                             ") outside the mesh");
}

std::size_t Mesh::n_interior_vertices() const {
    std::size_t n = 0;
    for (char b : boundary_vertex)
        if (!b) ++n;
    return n;
}

// ------------------------------------------------------------ construction

Mesh make_mesh(std::vector<std::array<double, 2>> vertices,
               std::vector<std::array<std::size_t, 3>> triangles, DomainTag tag) {
    Mesh m;
    m.vertices = std::move(vertices);
    m.triangles = std::move(triangles);
    m.domain_tag = tag;

    // orientation fix + degeneracy check
    for (std::size_t t = 0; t < m.n_triangles(); ++t) {
        auto& tr = m.triangles[t];
        for (std::size_t v : tr)
            if (v >= m.n_vertices())
                throw std::runtime_error("vertex index out of range in triangle " + std::to_string(t));
        const double a = m.tri_area(t);
        if (a == 0.0 || std::abs(a) < 1e-300)
            throw std::runtime_error("triangle " + std::to_string(t) + " has zero area");
        if (a < 0.0) std::swap(tr[1], tr[2]);
    }

    // edge table: (a,b) with a<b, ordered by first appearance is replaced by
    // lexicographic order for reproducibility
    std::map<std::array<std::size_t, 2>, std::size_t> edge_id;
    for (const auto& tr : m.triangles) {
        for (int le = 0; le < 3; ++le) {
            std::size_t p = tr[(le + 1) % 3], q = tr[(le + 2) % 3];
            if (p > q) std::swap(p, q);
            edge_id.emplace(std::array<std::size_t, 2>{p, q}, 0);
        }
    }
    m.edges.reserve(edge_id.size());
    for (auto& kv : edge_id) {
        kv.second = m.edges.size();
        m.edges.push_back(kv.first);
    }

    m.tri_edges.assign(m.n_triangles(), {});
    m.edge_tris.assign(m.n_edges(), {Mesh::npos, Mesh::npos});
    for (std::size_t t = 0; t < m.n_triangles(); ++t) {
        const auto& tr = m.triangles[t];
        for (int le = 0; le < 3; ++le) {
            const std::size_t p = tr[(le + 1) % 3], q = tr[(le + 2) % 3]; // CCW traversal p->q
            std::array<std::size_t, 2> key{std::min(p, q), std::max(p, q)};
            const std::size_t e = edge_id[key];
            const int sign = (p < q) ? +1 : -1;
            m.tri_edges[t][le] = {e, sign};
            auto& et = m.edge_tris[e][sign > 0 ? 0 : 1];
            if (et != Mesh::npos)
                throw std::runtime_error("edge " + std::to_string(e) +
                                         " has two triangles with the same orientation");
            et = t;
        }
    }

    m.boundary_edge.assign(m.n_edges(), 0);
    m.boundary_vertex.assign(m.n_vertices(), 0);
    for (std::size_t e = 0; e < m.n_edges(); ++e) {
        const bool bnd = (m.edge_tris[e][0] == Mesh::npos) || (m.edge_tris[e][1] == Mesh::npos);
        m.boundary_edge[e] = bnd;
        if (bnd) {
            m.boundary_vertex[m.edges[e][0]] = 1;
            m.boundary_vertex[m.edges[e][1]] = 1;
        }
    }

    validate_mesh(m);
    return m;
}

void validate_mesh(const Mesh& m) {
    for (std::size_t t = 0; t < m.n_triangles(); ++t)
        if (m.tri_area(t) <= 0.0)
            throw std::runtime_error("mesh invariant violated: triangle " + std::to_string(t) +
                                     " not counter-clockwise");

    std::vector<int> edge_count(m.n_edges(), 0);
    std::vector<int> sign_sum(m.n_edges(), 0);
    for (std::size_t t = 0; t < m.n_triangles(); ++t)
        for (const auto& te : m.tri_edges[t]) {
            ++edge_count[te.edge];
            sign_sum[te.edge] += te.sign;
        }
    for (std::size_t e = 0; e < m.n_edges(); ++e) {
        if (edge_count[e] == 2) {
            if (sign_sum[e] != 0)
                throw std::runtime_error("mesh invariant violated: interior edge " + std::to_string(e) +
                                         " has non-opposite signs");
            if (m.boundary_edge[e])
                throw std::runtime_error("mesh invariant violated: interior edge " + std::to_string(e) +
                                         " flagged boundary");
        } else if (edge_count[e] == 1) {
            if (!m.boundary_edge[e])
                throw std::runtime_error("mesh invariant violated: boundary edge " + std::to_string(e) +
                                         " not flagged");
        } else {
            throw std::runtime_error("mesh invariant violated: edge " + std::to_string(e) + " shared by " +
                                     std::to_string(edge_count[e]) + " triangles");
        }
        const std::size_t a = m.edges[e][0], b = m.edges[e][1];
        if (a >= b) throw std::runtime_error("mesh invariant violated: edge " + std::to_string(e) + " not sorted");
    }

    // Euler relation for simply connected domains
    const long euler = static_cast<long>(m.n_vertices()) - static_cast<long>(m.n_edges()) +
                       static_cast<long>(m.n_triangles());
    if (euler != 1)
        throw std::runtime_error("mesh invariant violated: Euler characteristic " + std::to_string(euler));
}

// ----------------------------------------------------------------- generators

Mesh gen_crossed(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gen_crossed: n must be >= 1");
    std::vector<std::array<double, 2>> verts;
    verts.reserve((n + 1) * (n + 1) + n * n);
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i) verts.push_back({i * h, j * h});
    const std::size_t c0 = verts.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) verts.push_back({(i + 0.5) * h, (j + 0.5) * h});

    auto grid = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    std::vector<std::array<std::size_t, 3>> tris;
    tris.reserve(4 * n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t bl = grid(i, j), br = grid(i + 1, j), tr = grid(i + 1, j + 1), tl = grid(i, j + 1);
            const std::size_t c = c0 + j * n + i;
            tris.push_back({bl, br, c});
            tris.push_back({br, tr, c});
            tris.push_back({tr, tl, c});
            tris.push_back({tl, bl, c});
        }
    return make_mesh(std::move(verts), std::move(tris), DomainTag::UnitSquare);
}

Mesh gen_right(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gen_right: n must be >= 1");
    std::vector<std::array<double, 2>> verts;
    verts.reserve((n + 1) * (n + 1));
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i) verts.push_back({i * h, j * h});
    auto grid = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    std::vector<std::array<std::size_t, 3>> tris;
    tris.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t bl = grid(i, j), br = grid(i + 1, j), tr = grid(i + 1, j + 1), tl = grid(i, j + 1);
            // diagonal fixed lower-left -> upper-right
            tris.push_back({bl, br, tr});
            tris.push_back({bl, tr, tl});
        }
    return make_mesh(std::move(verts), std::move(tris), DomainTag::UnitSquare);
}

Mesh gen_lshape(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gen_lshape: n must be >= 1");
    const std::size_t g = 2 * n; // grid cells per side of (-1,1)^2
    const double h = 1.0 / static_cast<double>(n);
    const std::size_t npos = Mesh::npos;

    std::vector<std::size_t> id((g + 1) * (g + 1), npos);
    std::vector<std::array<double, 2>> verts;
    auto gidx = [g](std::size_t i, std::size_t j) { return j * (g + 1) + i; };
    for (std::size_t j = 0; j <= g; ++j)
        for (std::size_t i = 0; i <= g; ++i) {
            const double x = -1.0 + i * h, y = -1.0 + j * h;
            if (x > 1e-14 && y < -1e-14) continue; // open fourth quadrant removed
            id[gidx(i, j)] = verts.size();
            verts.push_back({x, y});
        }

    std::vector<std::array<std::size_t, 3>> tris;
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t i = 0; i < g; ++i) {
            const double xc = -1.0 + (i + 0.5) * h, yc = -1.0 + (j + 0.5) * h;
            if (xc > 0.0 && yc < 0.0) continue;
            const std::size_t bl = id[gidx(i, j)], br = id[gidx(i + 1, j)];
            const std::size_t tr = id[gidx(i + 1, j + 1)], tl = id[gidx(i, j + 1)];
            tris.push_back({bl, br, tr});
            tris.push_back({bl, tr, tl});
        }
    return make_mesh(std::move(verts), std::move(tris), DomainTag::LShape);
}

// ----------------------------------------------------------------- refine

Mesh uniform_refine(const Mesh& mesh) {
    std::vector<std::array<double, 2>> verts = mesh.vertices;
    verts.reserve(mesh.n_vertices() + mesh.n_edges());
    std::vector<std::size_t> mid(mesh.n_edges());
    for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
        const auto& a = mesh.vertices[mesh.edges[e][0]];
        const auto& b = mesh.vertices[mesh.edges[e][1]];
        mid[e] = verts.size();
        verts.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
    }
    std::vector<std::array<std::size_t, 3>> tris;
    tris.reserve(4 * mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const std::size_t m0 = mid[mesh.tri_edges[t][0].edge]; // opposite v0: midpoint of (v1,v2)
        const std::size_t m1 = mid[mesh.tri_edges[t][1].edge];
        const std::size_t m2 = mid[mesh.tri_edges[t][2].edge];
        tris.push_back({tr[0], m2, m1});
        tris.push_back({tr[1], m0, m2});
        tris.push_back({tr[2], m1, m0});
        tris.push_back({m0, m1, m2});
    }
    return make_mesh(std::move(verts), std::move(tris), mesh.domain_tag);
}

// ----------------------------------------------------------------- import

namespace {

Mesh import_triangle_pair(const std::string& path) {
    std::string base = path;
    if (base.size() > 5 && base.substr(base.size() - 5) == ".node") base = base.substr(0, base.size() - 5);
    if (base.size() > 4 && base.substr(base.size() - 4) == ".ele") base = base.substr(0, base.size() - 4);

    std::ifstream nodef(base + ".node");
    if (!nodef) throw std::runtime_error("import_mesh: cannot open " + base + ".node");
    std::size_t np = 0, dim = 0, nattr = 0, nmark = 0;
    if (!(nodef >> np >> dim >> nattr >> nmark))
        throw std::runtime_error("import_mesh: malformed node header in " + base + ".node");
    if (dim != 2) throw std::runtime_error("import_mesh: expected 2d nodes in " + base + ".node");

    std::vector<std::array<double, 2>> verts(np);
    for (std::size_t i = 0; i < np; ++i) {
        std::size_t idx;
        double x, y;
        if (!(nodef >> idx >> x >> y))
            throw std::runtime_error("import_mesh: malformed node line " + std::to_string(i + 2));
        for (std::size_t a = 0; a < nattr + nmark; ++a) {
            double skip;
            nodef >> skip;
        }
        if (idx < 1 || idx > np)
            throw std::runtime_error("import_mesh: node index " + std::to_string(idx) + " out of range");
        verts[idx - 1] = {x, y};
    }

    std::ifstream elef(base + ".ele");
    if (!elef) throw std::runtime_error("import_mesh: cannot open " + base + ".ele");
    std::size_t nt = 0, npertri = 0, nattr2 = 0;
    if (!(elef >> nt >> npertri >> nattr2))
        throw std::runtime_error("import_mesh: malformed element header in " + base + ".ele");
    if (npertri != 3) throw std::runtime_error("import_mesh: expected 3-node triangles in " + base + ".ele");

    std::vector<std::array<std::size_t, 3>> tris(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        std::size_t idx, v1, v2, v3;
        if (!(elef >> idx >> v1 >> v2 >> v3))
            throw std::runtime_error("import_mesh: malformed element line " + std::to_string(t + 2));
        for (std::size_t a = 0; a < nattr2; ++a) {
            double skip;
            elef >> skip;
        }
        if (v1 < 1 || v2 < 1 || v3 < 1 || v1 > np || v2 > np || v3 > np)
            throw std::runtime_error("vertex index out of range in triangle " + std::to_string(idx));
        tris[t] = {v1 - 1, v2 - 1, v3 - 1};
    }
    return make_mesh(std::move(verts), std::move(tris), DomainTag::Imported);
}

Mesh import_internal_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_mesh: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw std::runtime_error("import_mesh: parse failure in " + path + ": " + ex.what());
    }
    if (!j.contains("vertices") || !j.contains("triangles"))
        throw std::runtime_error("import_mesh: " + path + " missing \"vertices\" or \"triangles\"");

    std::vector<std::array<double, 2>> verts;
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || v.size() != 2)
            throw std::runtime_error("import_mesh: vertex entry is not an [x,y] pair");
        verts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    std::vector<std::array<std::size_t, 3>> tris;
    for (const auto& t : j["triangles"]) {
        if (!t.is_array() || t.size() != 3)
            throw std::runtime_error("import_mesh: triangle entry is not an [i,j,k] triple");
        const long a = t[0].get<long>(), b = t[1].get<long>(), c = t[2].get<long>();
        if (a < 0 || b < 0 || c < 0 || a >= static_cast<long>(verts.size()) ||
            b >= static_cast<long>(verts.size()) || c >= static_cast<long>(verts.size()))
            throw std::runtime_error("vertex index out of range in triangle " + std::to_string(tris.size()));
        tris.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)});
    }
    return make_mesh(std::move(verts), std::move(tris), DomainTag::Imported);
}

} // namespace

Mesh import_mesh(const std::string& path, MeshFormat fmt) {
    switch (fmt) {
        case MeshFormat::TrianglePair:
            return import_triangle_pair(path);
        case MeshFormat::InternalJson:
            return import_internal_json(path);
    }
    throw std::invalid_argument("import_mesh: unknown format");
}

void write_internal_json(const Mesh& mesh, const std::string& path) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : mesh.vertices) j["vertices"].push_back({v[0], v[1]});
    j["triangles"] = nlohmann::json::array();
    for (const auto& t : mesh.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
    nlohmann::json bnd = nlohmann::json::array();
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.boundary_vertex[v]) bnd.push_back(v);
    j["boundary_vertices"] = bnd;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_internal_json: cannot open " + path);
    out << j.dump() << "\n";
}

} // namespace mixlab
