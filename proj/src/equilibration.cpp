#include "mixlab/equilibration.hpp"
#include "mixlab/infsup.hpp"
#include "mixlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixlab {

// ------------------------------------------------------------------ patches

namespace {

int local_index_of(const Mesh& mesh, std::size_t t, std::size_t v) {
    const auto& tr = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
        if (tr[i] == v) return i;
    return -1;
}

std::size_t other_tri(const Mesh& mesh, std::size_t e, std::size_t t) {
    const auto& et = mesh.edge_tris[e];
    if (et[0] == t) return et[1];
    if (et[1] == t) return et[0];
    throw std::runtime_error("other_tri: triangle not adjacent to edge");
}

} // namespace

std::vector<Patch> build_patches(const Mesh& mesh) {
    // incident triangles per vertex
    std::vector<std::vector<std::size_t>> incident(mesh.n_vertices());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t)
        for (std::size_t v : mesh.triangles[t]) incident[v].push_back(t);

    // In a CCW triangle (z, a, b) the CCW sweep around z enters across the
    // edge (z,a) (opposite b) and exits across (z,b) (opposite a).
    auto exit_edge = [&](std::size_t t, std::size_t z) {
        const int iz = local_index_of(mesh, t, z);
        return mesh.tri_edges[t][(iz + 1) % 3].edge;
    };
    auto enter_edge = [&](std::size_t t, std::size_t z) {
        const int iz = local_index_of(mesh, t, z);
        return mesh.tri_edges[t][(iz + 2) % 3].edge;
    };

    std::vector<Patch> patches(mesh.n_vertices());
    for (std::size_t z = 0; z < mesh.n_vertices(); ++z) {
        Patch& p = patches[z];
        p.vertex = z;
        p.interior = !mesh.boundary_vertex[z];
        if (incident[z].empty()) throw std::runtime_error("build_patches: isolated vertex " + std::to_string(z));

        // choose the start: interior -> lowest triangle index; boundary ->
        // the fan end whose clockwise edge (z, prev) lies on the boundary
        std::size_t start = *std::min_element(incident[z].begin(), incident[z].end());
        if (!p.interior) {
            start = Mesh::npos;
            for (std::size_t t : incident[z]) {
                if (mesh.boundary_edge[enter_edge(t, z)]) {
                    start = t;
                    break;
                }
            }
            if (start == Mesh::npos)
                throw std::runtime_error("build_patches: no boundary start around vertex " + std::to_string(z));
        }

        if (!p.interior) p.start_edge = enter_edge(start, z);
        std::size_t t = start;
        for (std::size_t guard = 0; guard <= incident[z].size(); ++guard) {
            p.tris.push_back(t);
            const std::size_t ef = exit_edge(t, z);
            if (mesh.boundary_edge[ef]) {
                p.end_edge = ef; // open chain ends
                break;
            }
            const std::size_t tn = other_tri(mesh, ef, t);
            p.edges.push_back(ef);
            if (tn == start) break; // fan closed
            t = tn;
        }
        if (p.interior) {
            if (p.edges.size() != p.tris.size())
                throw std::runtime_error("build_patches: fan around interior vertex " + std::to_string(z) +
                                         " did not close");
        } else {
            if (p.edges.size() + 1 != p.tris.size())
                throw std::runtime_error("build_patches: open chain around boundary vertex " + std::to_string(z) +
                                         " inconsistent");
        }
        if (p.tris.size() != incident[z].size())
            throw std::runtime_error("build_patches: patch of vertex " + std::to_string(z) +
                                     " missed triangles");
    }
    return patches;
}

// -------------------------------------------------------------- reconstruct

EquilibratedFlux reconstruct(const Mesh& mesh, const std::vector<double>& u_nodal,
                             const std::vector<double>& g0) {
    if (u_nodal.size() != mesh.n_vertices()) throw std::invalid_argument("reconstruct: nodal size mismatch");
    if (g0.size() != mesh.n_triangles()) throw std::invalid_argument("reconstruct: g0 size mismatch");

    FeSpace q(FeKind::P1C0, mesh);

    // membership check: (grad u_h, grad v) = (g0, v) for all v in Q_h
    {
        const Csr k = stiffness_p1(q);
        const Csr c = coupling_p1_p0(q, mesh);
        std::vector<double> uq(q.dof_count());
        for (std::size_t d = 0; d < q.dof_count(); ++d) uq[d] = u_nodal[q.dof_vertex(d)];
        const std::vector<double> ku = k.matvec(uq);
        const std::vector<double> cg = c.matvec(g0);
        double scale = 1e-30, worst = 0.0;
        std::size_t worst_q = 0;
        for (std::size_t i = 0; i < ku.size(); ++i) {
            scale = std::max({scale, std::abs(ku[i]), std::abs(cg[i])});
            const double r = std::abs(ku[i] - cg[i]);
            if (r > worst) {
                worst = r;
                worst_q = i;
            }
        }
        if (worst > 1e-9 * std::max(scale, 1.0))
            throw std::runtime_error("reconstruct: (grad u_h, grad v) != (g0, v); worst residual " +
                                     std::to_string(worst) + " at vertex " +
                                     std::to_string(q.dof_vertex(worst_q)));
    }

    // elementwise gradients and per-(triangle, local edge) outward fluxes
    std::vector<Vec2> grads(mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) grads[t] = p1_gradient(mesh, u_nodal, t);

    std::vector<std::array<double, 3>> flux(mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t)
        for (int le = 0; le < 3; ++le) {
            const auto& te = mesh.tri_edges[t][le];
            const auto n = mesh.edge_normal(te.edge);
            const double len = mesh.edge_length(te.edge);
            flux[t][le] = te.sign * (grads[t][0] * n[0] + grads[t][1] * n[1]) * len;
        }

    const std::vector<Patch> patches = build_patches(mesh);
    double max_closure = 0.0;

    for (const Patch& p : patches) {
        const std::size_t nz = p.tris.size();

        // patch-local helper data
        auto m_of = [&](std::size_t i) {
            const std::size_t t = p.tris[i];
            return -g0[t] * mesh.tri_area(t) / 3.0; // -(g0, phi_z)_T
        };
        auto jump_of = [&](std::size_t i) {
            // jump of grad u_h . n across edges[i], oriented from tris[i] to tris[i+1]
            const std::size_t e = p.edges[i];
            const std::size_t t0 = p.tris[i];
            const std::size_t t1 = p.tris[(i + 1) % nz];
            const auto n = mesh.edge_normal(e);
            // normal pointing out of t0: sign of t0 on e times global normal
            int s = 0;
            for (int le = 0; le < 3; ++le)
                if (mesh.tri_edges[t0][le].edge == e) s = mesh.tri_edges[t0][le].sign;
            const double gn0 = s * (grads[t0][0] * n[0] + grads[t0][1] * n[1]);
            const double gn1 = s * (grads[t1][0] * n[0] + grads[t1][1] * n[1]);
            return gn0 - gn1;
        };
        auto local_edge = [&](std::size_t t, std::size_t e) {
            for (int le = 0; le < 3; ++le)
                if (mesh.tri_edges[t][le].edge == e) return le;
            throw std::runtime_error("reconstruct: edge not in triangle");
        };

        // recursion over the fan: c_in + c_out = m_i, coupled by the jump
        // condition across each connecting edge; seed flux 0 across the
        // starting edge (the closure identity makes the cycle consistent
        // for interior patches)
        double c_in = 0.0;
        std::vector<double> cin(nz), cout(nz);
        for (std::size_t i = 0; i < nz; ++i) {
            cin[i] = c_in;
            cout[i] = m_of(i) - c_in;
            if (i < p.edges.size()) {
                const double len = mesh.edge_length(p.edges[i]);
                c_in = -0.5 * len * jump_of(i) - cout[i];
            }
        }
        if (p.interior) {
            const double len = mesh.edge_length(p.edges[nz - 1]);
            const double back = -0.5 * len * jump_of(nz - 1) - cout[nz - 1];
            max_closure = std::max(max_closure, std::abs(back - cin[0]));
        }

        // scatter into the outward-flux table
        for (std::size_t i = 0; i < nz; ++i) {
            const std::size_t t = p.tris[i];
            if (i > 0) flux[t][static_cast<std::size_t>(local_edge(t, p.edges[i - 1]))] += cin[i];
            // cin[0] is the zero seed: nothing to add on the starting edge
            if (i < p.edges.size()) flux[t][static_cast<std::size_t>(local_edge(t, p.edges[i]))] += cout[i];
        }
        // open chains release the final out-flux through the ending boundary edge
        if (!p.interior)
            flux[p.tris[nz - 1]][static_cast<std::size_t>(local_edge(p.tris[nz - 1], p.end_edge))] += cout[nz - 1];
    }

    // gather the conforming coefficients and the jump residuals
    EquilibratedFlux out;
    out.g0 = g0;
    out.coeffs.assign(mesh.n_edges(), 0.0);
    out.max_jump = 0.0;
    for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
        const auto& et = mesh.edge_tris[e];
        const double len = mesh.edge_length(e);
        double fplus = 0.0, fminus = 0.0;
        bool have_plus = false, have_minus = false;
        if (et[0] != Mesh::npos) {
            const std::size_t t = et[0];
            for (int le = 0; le < 3; ++le)
                if (mesh.tri_edges[t][le].edge == e) fplus = flux[t][le];
            have_plus = true;
        }
        if (et[1] != Mesh::npos) {
            const std::size_t t = et[1];
            for (int le = 0; le < 3; ++le)
                if (mesh.tri_edges[t][le].edge == e) fminus = flux[t][le];
            have_minus = true;
        }
        if (have_plus && have_minus) {
            out.coeffs[e] = 0.5 * (fplus - fminus);
            out.max_jump = std::max(out.max_jump, std::abs(fplus + fminus) / len);
        } else if (have_plus) {
            out.coeffs[e] = fplus;
        } else {
            out.coeffs[e] = -fminus;
        }
    }
    out.max_patch_closure = max_closure;

    // elementwise divergence + the equilibration identity
    out.div_values.resize(mesh.n_triangles());
    out.max_div_err = 0.0;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        out.div_values[t] = rt0c_div(mesh, out.coeffs, t);
        out.max_div_err = std::max(out.max_div_err, std::abs(out.div_values[t] + g0[t]));
    }

    // Fortin orthogonality residual
    {
        const Csr k = stiffness_p1(q);
        FeSpace rt(FeKind::RT0C, mesh);
        const Csr b = coupling_b(rt, q);
        std::vector<double> uq(q.dof_count());
        for (std::size_t d = 0; d < q.dof_count(); ++d) uq[d] = u_nodal[q.dof_vertex(d)];
        const std::vector<double> ku = k.matvec(uq);
        std::vector<double> bs(q.dof_count());
        b.matvec(out.coeffs.data(), bs.data());
        double worst = 0.0;
        for (std::size_t i = 0; i < ku.size(); ++i) worst = std::max(worst, std::abs(ku[i] - bs[i]));
        out.fortin_residual = worst;
    }
    return out;
}

// ------------------------------------------------------------------- Darcy

DarcySolution darcy_solve(const Mesh& mesh, const std::vector<double>& g0, const DarcyOptions& opts) {
    if (g0.size() != mesh.n_triangles()) throw std::invalid_argument("darcy_solve: g0 size mismatch");
    FeSpace rt(FeKind::RT0C, mesh);
    const Csr a_full = mass_rt0(rt);
    const Csr bd_full = div_rt0_p0(rt, mesh);

    // g block: -(g0, chi_T) = -g0_T |T|
    std::vector<double> gb(mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) gb[t] = -g0[t] * mesh.tri_area(t);

    DarcySolution out;

    if (!opts.zero_normal_flux) {
        SaddleSystem sys;
        sys.A = &a_full;
        sys.B = &bd_full;
        sys.f.assign(rt.dof_count(), 0.0);
        sys.g = gb;
        SaddleResult r = solve_saddle(sys, opts.saddle);
        out.sigma = std::move(r.y);
        out.p = std::move(r.x);
        out.res_y = r.res_y;
        out.res_x = r.res_x;
    } else {
        // eliminate boundary-edge DOFs; pressure then lives in the zero-mean
        // quotient: drop one pressure row and restore the gauge afterwards
        double gsum = 0.0, area = 0.0;
        for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
            gsum += g0[t] * mesh.tri_area(t);
            area += mesh.tri_area(t);
        }
        if (std::abs(gsum) > 1e-10 * std::max(1.0, std::abs(area)))
            throw std::runtime_error("darcy_solve: datum not compatible with zero normal flux (mean " +
                                     std::to_string(gsum / area) + ")");

        std::vector<std::size_t> keep;
        for (std::size_t e = 0; e < mesh.n_edges(); ++e)
            if (!mesh.boundary_edge[e]) keep.push_back(e);
        std::vector<std::size_t> emap(mesh.n_edges(), Mesh::npos);
        for (std::size_t i = 0; i < keep.size(); ++i) emap[keep[i]] = i;

        TripletList ta, tb;
        for (std::size_t i = 0; i < a_full.nrows; ++i) {
            if (emap[i] == Mesh::npos) continue;
            for (std::size_t k = a_full.rowptr[i]; k < a_full.rowptr[i + 1]; ++k)
                if (emap[a_full.col[k]] != Mesh::npos) ta.add(emap[i], emap[a_full.col[k]], a_full.val[k]);
        }
        for (std::size_t t = 1; t < mesh.n_triangles(); ++t) // drop row 0
            for (std::size_t k = bd_full.rowptr[t]; k < bd_full.rowptr[t + 1]; ++k)
                if (emap[bd_full.col[k]] != Mesh::npos) tb.add(t - 1, emap[bd_full.col[k]], bd_full.val[k]);
        const Csr a_red = ta.to_csr(keep.size(), keep.size());
        const Csr b_red = tb.to_csr(mesh.n_triangles() - 1, keep.size());

        SaddleSystem sys;
        sys.A = &a_red;
        sys.B = &b_red;
        sys.f.assign(keep.size(), 0.0);
        sys.g.assign(gb.begin() + 1, gb.end());
        SaddleResult r = solve_saddle(sys, opts.saddle);

        out.sigma.assign(mesh.n_edges(), 0.0);
        for (std::size_t i = 0; i < keep.size(); ++i) out.sigma[keep[i]] = r.y[i];
        out.p.assign(mesh.n_triangles(), 0.0);
        for (std::size_t t = 1; t < mesh.n_triangles(); ++t) out.p[t] = r.x[t - 1];
        double mean = 0.0;
        for (std::size_t t = 0; t < mesh.n_triangles(); ++t) mean += out.p[t] * mesh.tri_area(t);
        mean /= area;
        for (double& v : out.p) v -= mean;
        out.res_y = r.res_y;
        out.res_x = r.res_x;
    }

    out.max_div_err = 0.0;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t)
        out.max_div_err = std::max(out.max_div_err, std::abs(rt0c_div(mesh, out.sigma, t) + g0[t]));
    return out;
}

// ------------------------------------------------------------------ Fortin

std::vector<FortinRow> fortin_constant(const std::vector<const Mesh*>& levels,
                                       const std::vector<P0LoadProvider>& loads) {
    if (levels.size() < 3) throw std::invalid_argument("fortin_constant: need at least 3 levels");
    std::vector<FortinRow> rows;
    for (const Mesh* mp : levels) {
        const Mesh& mesh = *mp;
        FeSpace q(FeKind::P1C0, mesh);
        const Csr k = stiffness_p1(q);
        const Csr m1 = mass_p1(q);
        FeSpace rt(FeKind::RT0C, mesh);
        const Csr a_rt = mass_rt0(rt);
        SparseCholesky kchol(k);

        FortinRow row;
        row.h = mesh.h_max();

        for (const auto& provider : loads) {
            const std::vector<double> g0 = provider(mesh);
            std::vector<double> rhs = load_vector(q, Load::p0_coeffs(g0));
            std::vector<double> uq = kchol.solve(rhs);
            const std::vector<double> u_nodal = expand_p1c0(q, uq);
            EquilibratedFlux fl = reconstruct(mesh, u_nodal, g0);

            const std::vector<double> ku = k.matvec(uq);
            const double gradu = std::sqrt(kern::dot(ku.data(), uq.data(), uq.size()));
            const std::vector<double> as = a_rt.matvec(fl.coeffs);
            const double signorm = std::sqrt(kern::dot(as.data(), fl.coeffs.data(), as.size()));
            if (gradu > 0) row.c_pi = std::max(row.c_pi, signorm / gradu);
        }

        GenEigOptions go;
        go.want_vectors = false;
        GenEigResult rho_eig = gen_eig_sparse(k, m1, EigRange::Largest, 1, go);
        row.rho = std::sqrt(rho_eig.values.back());
        row.zeta = p1p0_infsup(mesh).zeta;
        row.h_rho_over_zeta = row.h * row.rho / row.zeta;
        rows.push_back(row);
    }
    return rows;
}

} // namespace mixlab
