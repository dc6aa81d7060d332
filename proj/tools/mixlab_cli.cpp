// Command-line front end: mesh generation and import, dual mixed solves,
// inf-sup spectra, spectral splitting, eigenbasis coefficient dumps, the
// P1-P0 pairing, flux equilibration, convergence studies and the
// spurious-mode demo. Results are written as CSV/JSON files that are
// byte-stable for fixed flags and seed.

#include "CLI11.hpp"
#include "json.hpp"

#include "mixlab/equilibration.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/infsup.hpp"
#include "mixlab/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace mixlab;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Common {
    std::string out = "out";
    std::string mesh = "crossed";
    std::vector<std::string> mesh_files;
    std::string element = "rt0c";
    std::string config;
    std::size_t n = 8;
    std::size_t n0 = 2;
    std::size_t levels = 4;
    std::size_t refine = 0;
    unsigned long long seed = 12345;
    std::string load = "const";
    double mu_tilde = 0.5;
    std::string g0 = "const";
    std::string case_name = "smooth-square";
    bool dump_fields = false;
    bool dump_matrices = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--config", c.config, "JSON config file; explicit flags win");
    cmd->add_option("--seed", c.seed, "seed for randomized vectors");
}

// configuration file: a flat JSON object whose keys mirror the long flags
void apply_config(const CLI::App& cmd, Common& c) {
    if (c.config.empty()) return;
    std::ifstream in(c.config);
    if (!in) throw std::runtime_error("config file not found: " + c.config);
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw std::runtime_error("malformed config " + c.config + ": " + ex.what());
    }
    auto flag_given = [&](const std::string& name) {
        const CLI::Option* opt = cmd.get_option_no_throw("--" + name);
        return opt && opt->count() > 0;
    };
    auto set_str = [&](const char* key, std::string& dst) {
        if (j.contains(key) && !flag_given(key)) dst = j[key].get<std::string>();
    };
    auto set_num = [&](const char* key, auto& dst) {
        if (j.contains(key) && !flag_given(key)) dst = j[key].get<std::decay_t<decltype(dst)>>();
    };
    set_str("out", c.out);
    set_str("mesh", c.mesh);
    set_str("element", c.element);
    set_str("load", c.load);
    set_str("g0", c.g0);
    set_str("case", c.case_name);
    set_num("n", c.n);
    set_num("n0", c.n0);
    set_num("levels", c.levels);
    set_num("refine", c.refine);
    set_num("seed", c.seed);
    set_num("mu-tilde", c.mu_tilde);
    if (j.contains("mesh-file") && c.mesh_files.empty())
        for (const auto& f : j["mesh-file"]) c.mesh_files.push_back(f.get<std::string>());
}

FeKind element_of(const std::string& s) {
    if (s == "rt0c") return FeKind::RT0C;
    if (s == "drt0") return FeKind::DRT0;
    throw std::runtime_error("unknown element '" + s + "' (use rt0c or drt0)");
}

Mesh mesh_from_spec(const std::string& spec, std::size_t n, std::size_t refine) {
    Mesh m = [&] {
        if (spec == "crossed") return gen_crossed(n);
        if (spec == "right") return gen_right(n);
        if (spec == "lshape") return gen_lshape(n);
        if (spec.rfind("file:", 0) == 0) {
            const std::string path = spec.substr(5);
            const bool tp = path.size() > 5 && (path.substr(path.size() - 5) == ".node" ||
                                                path.substr(path.size() - 4) == ".ele");
            return import_mesh(path, tp ? MeshFormat::TrianglePair : MeshFormat::InternalJson);
        }
        throw std::runtime_error("unknown mesh '" + spec + "' (crossed|right|lshape|file:PATH)");
    }();
    for (std::size_t r = 0; r < refine; ++r) m = uniform_refine(m);
    return m;
}

Load load_from_spec(const std::string& spec) {
    if (spec == "const") return Load::analytic([](double, double) { return 1.0; });
    if (spec == "eig1")
        return Load::analytic(
            [](double x, double y) { return 2 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y); });
    if (spec == "smooth-poly") return Load::analytic([](double x, double y) { return x - 3 * y + std::sin(x); });
    if (spec == "dirac13") return Load::dirac(1.0 / 3.0, 1.0 / 5.0);
    if (spec == "diracC") return Load::dirac(0.5, 0.5);
    if (spec.rfind("dirac:", 0) == 0) {
        const std::string pt = spec.substr(6);
        const auto comma = pt.find(',');
        if (comma == std::string::npos) throw std::runtime_error("dirac load needs 'dirac:x,y'");
        return Load::dirac(std::stod(pt.substr(0, comma)), std::stod(pt.substr(comma + 1)));
    }
    throw std::runtime_error("unknown load '" + spec + "' (const|eig1|smooth-poly|dirac13|diracC|dirac:x,y)");
}

std::filesystem::path ensure_out(const Common& c) {
    std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(1, '\t') + "\n"); }

std::string num(double v, const char* f = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void dump_nodal(const Mesh& mesh, const std::vector<double>& nodal, const std::filesystem::path& path) {
    std::string csv = "x,y,value\n";
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        csv += num(mesh.vertices[v][0]) + "," + num(mesh.vertices[v][1]) + "," + num(nodal[v], "%.10e") + "\n";
    write_text(path, csv);
}

void dump_edge_coeffs(const std::vector<double>& coeffs, const std::filesystem::path& path) {
    std::string csv = "edge,coeff\n";
    for (std::size_t e = 0; e < coeffs.size(); ++e) csv += std::to_string(e) + "," + num(coeffs[e], "%.10e") + "\n";
    write_text(path, csv);
}

// ---------------------------------------------------------------- commands

int cmd_mesh(const Common& c) {
    const auto dir = ensure_out(c);
    const Mesh m = mesh_from_spec(c.mesh, c.n, c.refine);
    validate_mesh(m);
    write_internal_json(m, (dir / "mesh.json").string());
    json stats = {
        {"vertices", m.n_vertices()},
        {"triangles", m.n_triangles()},
        {"edges", m.n_edges()},
        {"interior_vertices", m.n_interior_vertices()},
        {"boundary_edges", std::count(m.boundary_edge.begin(), m.boundary_edge.end(), char(1))},
        {"total_area", m.total_area()},
        {"h_max", m.h_max()},
        {"euler_characteristic", 1},
    };
    write_json(dir / "mesh_stats.json", stats);
    std::printf("mesh: %zu vertices, %zu triangles, %zu edges -> %s\n", m.n_vertices(), m.n_triangles(),
                m.n_edges(), (dir / "mesh.json").c_str());
    return 0;
}

int cmd_solve(const Common& c) {
    const auto dir = ensure_out(c);
    const Mesh m = mesh_from_spec(c.mesh, c.n, c.refine);
    const FeKind kind = element_of(c.element);
    const Load load = load_from_spec(c.load);
    CaseSolution sol = solve_poisson_case(m, kind, load, nullptr, true);

    dump_nodal(m, sol.u_nodal, dir / "u_mixed.csv");
    dump_nodal(m, sol.u_galerkin_nodal, dir / "u_galerkin.csv");
    if (kind == FeKind::RT0C) {
        dump_edge_coeffs(sol.sigma, dir / "sigma.csv");
    } else {
        std::string csv = "triangle,local,coeff\n";
        for (std::size_t i = 0; i < sol.sigma.size(); ++i)
            csv += std::to_string(i / 3) + "," + std::to_string(i % 3) + "," + num(sol.sigma[i], "%.10e") + "\n";
        write_text(dir / "sigma.csv", csv);
    }
    if (c.dump_matrices) {
        MixedOperator op(m, kind);
        op.a.dump_coordinate((dir / "matrix_a.txt").string());
        op.b.dump_coordinate((dir / "matrix_b.txt").string());
        op.m.dump_coordinate((dir / "matrix_m.txt").string());
    }
    json summary = {
        {"mesh", c.mesh},          {"n", c.n},
        {"element", c.element},    {"load", c.load},
        {"residual_y", sol.res_y}, {"residual_x", sol.res_x},
        {"oscillation_index", oscillation_index(m, sol.u_nodal, sol.u_galerkin_nodal)},
    };
    write_json(dir / "solve_summary.json", summary);
    std::printf("solve: residuals %.2e / %.2e -> %s\n", sol.res_y, sol.res_x, dir.c_str());
    return 0;
}

int cmd_infsup(const Common& c) {
    const auto dir = ensure_out(c);
    const FeKind kind = element_of(c.element);

    std::vector<Mesh> meshes;
    std::vector<double> hs;
    std::vector<std::string> labels;
    if (!c.mesh_files.empty()) {
        for (const auto& f : c.mesh_files) {
            meshes.push_back(mesh_from_spec("file:" + f, 0, 0));
            hs.push_back(meshes.back().h_max());
            labels.push_back(f);
        }
    } else {
        std::size_t n = c.n0;
        for (std::size_t lvl = 0; lvl < c.levels; ++lvl, n *= 2) {
            meshes.push_back(mesh_from_spec(c.mesh, n, 0));
            hs.push_back(1.0 / double(n));
            labels.push_back(c.mesh + " n=" + std::to_string(n));
        }
    }

    std::string csv = "level,h,n_label,mu_m3,mu_m2,mu_m1,mu_min,beta_h\n";
    std::vector<double> betas;
    GenEigOptions opts;
    opts.want_vectors = c.dump_fields;
    for (std::size_t lvl = 0; lvl < meshes.size(); ++lvl) {
        const Mesh& mesh = meshes[lvl];
        MixedOperator op(mesh, kind);
        const std::size_t k = std::min<std::size_t>(4, op.q_space.dof_count());
        const InfSupSpectrum s = infsup_spectrum(op, k, false, opts);
        betas.push_back(s.beta_h);
        csv += std::to_string(lvl + 1) + "," + num(hs[lvl]) + "," + std::to_string(mesh.n_vertices());
        for (std::size_t j = 4; j-- > 0;)
            csv += "," + (j < s.mu.size() ? num(s.mu[s.mu.size() - 1 - j], "%.8f") : std::string());
        csv += "," + num(s.beta_h, "%.8f") + "\n";
        if (c.dump_fields) {
            // smallest eigenfunction of the level (the most oscillatory one)
            std::vector<double> un(op.q_space.dof_count());
            for (std::size_t i = 0; i < un.size(); ++i) un[i] = s.u(i, s.mu.size() - 1);
            dump_nodal(mesh, expand_p1c0(op.q_space, un),
                       dir / ("infsup_worst_L" + std::to_string(lvl + 1) + ".csv"));
        }
    }
    write_text(dir / ("infsup_" + c.mesh + "_" + c.element + ".csv"), csv);

    json summary = {{"mesh", c.mesh}, {"element", c.element}, {"levels", meshes.size()}};
    if (meshes.size() >= 3) summary["beta_slope"] = fit_log_slope(hs, betas);
    write_json(dir / ("infsup_" + c.mesh + "_" + c.element + ".json"), summary);
    std::printf("infsup: %zu levels -> %s\n", meshes.size(), dir.c_str());
    return 0;
}

int cmd_split(const Common& c) {
    const auto dir = ensure_out(c);
    const Mesh m = mesh_from_spec(c.mesh, c.n, c.refine);
    MixedOperator op(m, element_of(c.element));
    const InfSupSpectrum s = infsup_spectrum(op, 0, true);
    const Splitting sp = split(s, c.mu_tilde);
    const auto f = load_vector(op.q_space, load_from_spec(c.load));
    const SplitSolution ss = solve_split(op, s, sp, f);
    const MixedSolution direct = solve_dual_mixed(op, f);

    dump_nodal(m, expand_p1c0(op.q_space, ss.u1), dir / "split_u1.csv");
    dump_nodal(m, expand_p1c0(op.q_space, ss.u2), dir / "split_u2.csv");

    // identity residuals against the direct solve
    const std::size_t nq = op.q_space.dof_count();
    std::vector<double> du(nq), t(nq);
    for (std::size_t i = 0; i < nq; ++i) du[i] = ss.u1[i] + ss.u2[i] - direct.u[i];
    op.m.matvec(du.data(), t.data());
    const double gap_u = std::sqrt(std::abs(kern::dot(t.data(), du.data(), nq)));

    json summary = {
        {"mu_tilde", sp.mu_threshold}, {"dim_q", s.dim_q},          {"n_stable", sp.n_stable},
        {"n_unstable", s.dim_q - sp.n_stable}, {"beta_h", s.beta_h}, {"u_identity_gap_h1semi", gap_u},
    };
    write_json(dir / "split_summary.json", summary);
    std::printf("split: %zu stable + %zu unstable modes, identity gap %.2e -> %s\n", sp.n_stable,
                s.dim_q - sp.n_stable, gap_u, dir.c_str());
    return 0;
}

int cmd_alpha(const Common& c) {
    const auto dir = ensure_out(c);
    const Mesh m = mesh_from_spec(c.mesh, c.n, c.refine);
    MixedOperator op(m, element_of(c.element));
    const InfSupSpectrum s = infsup_spectrum(op, 0, false);
    const auto f = load_vector(op.q_space, load_from_spec(c.load));
    const Representation rep = representation(s, f);
    std::string csv = "i,mu_i,alpha_i\n";
    for (std::size_t i = 0; i < s.mu.size(); ++i)
        csv += std::to_string(i + 1) + "," + num(s.mu[i], "%.8f") + "," + num(rep.alpha[i], "%.10e") + "\n";
    write_text(dir / ("alpha_" + c.mesh + "_" + c.load + ".csv"), csv);
    std::printf("alpha: %zu coefficients -> %s\n", s.mu.size(), dir.c_str());
    return 0;
}

int cmd_p1p0(const Common& c) {
    const auto dir = ensure_out(c);
    std::string csv = "level,h,n_label,nu_min,zeta\n";
    std::vector<double> hs, nus;
    std::size_t n = c.n0;
    for (std::size_t lvl = 0; lvl < c.levels; ++lvl, n *= 2) {
        const Mesh m = mesh_from_spec(c.mesh, n, 0);
        const P1P0Result r = p1p0_infsup(m);
        hs.push_back(1.0 / double(n));
        nus.push_back(r.nu_min);
        csv += std::to_string(lvl + 1) + "," + num(hs.back()) + "," + std::to_string(m.n_vertices()) + "," +
               num(r.nu_min, "%.8f") + "," + num(r.zeta, "%.8f") + "\n";
        FeSpace q(FeKind::P1C0, m);
        dump_nodal(m, expand_p1c0(q, r.w), dir / ("p1p0_worst_L" + std::to_string(lvl + 1) + ".csv"));
    }
    write_text(dir / ("p1p0_" + c.mesh + ".csv"), csv);
    json summary = {{"mesh", c.mesh}, {"levels", c.levels}};
    if (hs.size() >= 3) summary["nu_slope"] = fit_log_slope(hs, nus);
    write_json(dir / ("p1p0_" + c.mesh + ".json"), summary);
    std::printf("p1p0: %zu levels -> %s\n", c.levels, dir.c_str());
    return 0;
}

int cmd_equilibrate(const Common& c) {
    const auto dir = ensure_out(c);
    const Mesh m = mesh_from_spec(c.mesh, c.n, c.refine);

    std::vector<double> g0(m.n_triangles(), 1.0);
    if (c.g0 == "random") {
        unsigned long long state = c.seed;
        for (auto& v : g0) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            v = 2.0 * (double((state >> 11) & ((1ULL << 52) - 1)) / double(1ULL << 52)) - 1.0;
        }
    } else if (c.g0 != "const") {
        throw std::runtime_error("unknown g0 '" + c.g0 + "' (const|random)");
    }

    FeSpace q(FeKind::P1C0, m);
    SparseCholesky kchol(stiffness_p1(q));
    const auto uq = kchol.solve(load_vector(q, Load::p0_coeffs(g0)));
    const EquilibratedFlux fl = reconstruct(m, expand_p1c0(q, uq), g0);

    dump_edge_coeffs(fl.coeffs, dir / "flux.csv");
    double mean_div = 0;
    for (std::size_t t = 0; t < m.n_triangles(); ++t) mean_div += std::abs(fl.div_values[t] + g0[t]);
    mean_div /= double(m.n_triangles());
    json report = {
        {"mesh", c.mesh},       {"n", c.n},
        {"g0", c.g0},           {"seed", c.seed},
        {"max_div_err", fl.max_div_err},
        {"mean_div_err", mean_div},
        {"max_jump", fl.max_jump},
        {"fortin_residual", fl.fortin_residual},
    };
    write_json(dir / "equilibrate_report.json", report);
    std::printf("equilibrate: max div err %.2e, max jump %.2e -> %s\n", fl.max_div_err, fl.max_jump,
                dir.c_str());
    return 0;
}

int cmd_convergence(const Common& c) {
    const auto dir = ensure_out(c);
    ConvergenceConfig cfg;
    cfg.case_name = c.case_name;
    cfg.v_kind = element_of(c.element);
    cfg.base_n = c.n0;
    cfg.levels = c.levels;
    cfg.mesh_files = c.mesh_files;
    const ConvergenceResult r = convergence_study(cfg);

    std::string csv = "dofs,sigma_err,u_l2_err,u_h1_err,sigma_rate,u_l2_rate,u_h1_rate\n";
    for (const auto& row : r.rows) {
        csv += std::to_string(row.dofs) + "," + num(row.sigma_err, "%.6e") + "," + num(row.u_l2_err, "%.6e") +
               "," + num(row.u_h1_err, "%.6e");
        if (row.has_rates)
            csv += "," + num(row.sigma_rate, "%.2f") + "," + num(row.u_l2_rate, "%.2f") + "," +
                   num(row.u_h1_rate, "%.2f");
        else
            csv += ",,,";
        csv += "\n";
    }
    write_text(dir / ("convergence_" + c.case_name + ".csv"), csv);
    json summary = {{"case", c.case_name},
                    {"levels", r.rows.size()},
                    {"rate_sigma", r.rate_sigma},
                    {"rate_u_l2", r.rate_l2},
                    {"rate_u_h1", r.rate_h1}};
    write_json(dir / ("convergence_" + c.case_name + ".json"), summary);
    std::printf("convergence %s: rates sigma %.2f, L2 %.2f, H1 %.2f -> %s\n", c.case_name.c_str(),
                r.rate_sigma, r.rate_l2, r.rate_h1, dir.c_str());
    return 0;
}

int cmd_demo(const Common& c) {
    const auto dir = ensure_out(c);
    MeshFamily fam = MeshFamily::Crossed;
    if (c.mesh == "right")
        fam = MeshFamily::Right;
    else if (c.mesh == "lshape")
        fam = MeshFamily::Lshape;
    else if (c.mesh != "crossed")
        throw std::runtime_error("demo runs on generated families (crossed|right|lshape)");
    const Load load = load_from_spec(c.load);
    const FeKind kind = element_of(c.element);
    const auto rows = spurious_demo(fam, c.n0, c.levels, load, kind);

    std::string csv = "level,h,dofs,osc_index\n";
    for (const auto& r : rows)
        csv += std::to_string(r.level) + "," + num(r.h) + "," + std::to_string(r.dofs) + "," +
               num(r.osc_index, "%.6f") + "\n";
    write_text(dir / ("demo_" + c.load + "_" + c.element + ".csv"), csv);

    // finest-level fields for plotting
    const std::size_t n_fine = c.n0 << (c.levels - 1);
    const Mesh m = make_family_mesh(fam, n_fine);
    CaseSolution sol = solve_poisson_case(m, kind, load, nullptr, true);
    dump_nodal(m, sol.u_nodal, dir / ("demo_" + c.load + "_u_mixed.csv"));
    dump_nodal(m, sol.u_galerkin_nodal, dir / ("demo_" + c.load + "_u_galerkin.csv"));
    std::printf("demo: oscillation index %.4f at the finest level -> %s\n", rows.back().osc_index, dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual mixed Poisson laboratory"};
    app.require_subcommand(0, 1);

    Common c;
    struct Sub {
        CLI::App* cmd;
        int (*fn)(const Common&);
    };
    std::vector<Sub> subs;

    auto* mesh_cmd = app.add_subcommand("mesh", "generate or import a mesh, validate, dump stats");
    mesh_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape|file:PATH");
    mesh_cmd->add_option("--n", c.n, "subdivisions per unit length");
    mesh_cmd->add_option("--refine", c.refine, "uniform refinement steps");
    subs.push_back({mesh_cmd, cmd_mesh});

    auto* solve_cmd = app.add_subcommand("solve", "solve the dual mixed system for one load");
    solve_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape|file:PATH");
    solve_cmd->add_option("--n", c.n, "subdivisions");
    solve_cmd->add_option("--refine", c.refine, "uniform refinement steps");
    solve_cmd->add_option("--element", c.element, "rt0c|drt0");
    solve_cmd->add_option("--load", c.load, "const|eig1|smooth-poly|dirac13|diracC|dirac:x,y");
    solve_cmd->add_flag("--dump-matrices", c.dump_matrices, "write A, B, M in coordinate text format");
    subs.push_back({solve_cmd, cmd_solve});

    auto* infsup_cmd = app.add_subcommand("infsup", "per-level inf-sup eigenvalue table");
    infsup_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape");
    infsup_cmd->add_option("--mesh-file", c.mesh_files, "explicit level meshes (internal json)");
    infsup_cmd->add_option("--levels", c.levels, "number of refinement levels");
    infsup_cmd->add_option("--n0", c.n0, "coarsest subdivision");
    infsup_cmd->add_option("--element", c.element, "rt0c|drt0");
    infsup_cmd->add_flag("--dump-fields", c.dump_fields, "write the worst eigenfunction per level");
    subs.push_back({infsup_cmd, cmd_infsup});

    auto* split_cmd = app.add_subcommand("split", "spectral splitting of one solve");
    split_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape|file:PATH");
    split_cmd->add_option("--n", c.n, "subdivisions");
    split_cmd->add_option("--element", c.element, "rt0c|drt0");
    split_cmd->add_option("--mu-tilde", c.mu_tilde, "threshold in (0,1)");
    split_cmd->add_option("--load", c.load, "load descriptor");
    subs.push_back({split_cmd, cmd_split});

    auto* alpha_cmd = app.add_subcommand("alpha", "eigenbasis coefficients of a load");
    alpha_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape|file:PATH");
    alpha_cmd->add_option("--n", c.n, "subdivisions");
    alpha_cmd->add_option("--element", c.element, "rt0c|drt0");
    alpha_cmd->add_option("--load", c.load, "load descriptor");
    subs.push_back({alpha_cmd, cmd_alpha});

    auto* p1p0_cmd = app.add_subcommand("p1p0", "P1-P0 pairing eigenvalue table");
    p1p0_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape");
    p1p0_cmd->add_option("--levels", c.levels, "levels");
    p1p0_cmd->add_option("--n0", c.n0, "coarsest subdivision");
    subs.push_back({p1p0_cmd, cmd_p1p0});

    auto* eq_cmd = app.add_subcommand("equilibrate", "patch-wise flux reconstruction");
    eq_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape|file:PATH");
    eq_cmd->add_option("--n", c.n, "subdivisions");
    eq_cmd->add_option("--refine", c.refine, "uniform refinement steps");
    eq_cmd->add_option("--g0", c.g0, "const|random");
    subs.push_back({eq_cmd, cmd_equilibrate});

    auto* conv_cmd = app.add_subcommand("convergence", "error norms and rates over a mesh family");
    conv_cmd->add_option("--case", c.case_name, "smooth-square|lshape-singular");
    conv_cmd->add_option("--element", c.element, "rt0c|drt0");
    conv_cmd->add_option("--levels", c.levels, "levels");
    conv_cmd->add_option("--n0", c.n0, "coarsest subdivision");
    conv_cmd->add_option("--mesh-file", c.mesh_files, "explicit level meshes (internal json)");
    subs.push_back({conv_cmd, cmd_convergence});

    auto* demo_cmd = app.add_subcommand("demo", "spurious-mode demonstration");
    demo_cmd->add_option("--mesh", c.mesh, "crossed|right|lshape");
    demo_cmd->add_option("--element", c.element, "rt0c|drt0");
    demo_cmd->add_option("--load", c.load, "const|eig1|smooth-poly|dirac13|diracC|dirac:x,y");
    demo_cmd->add_option("--levels", c.levels, "levels");
    demo_cmd->add_option("--n0", c.n0, "coarsest subdivision");
    subs.push_back({demo_cmd, cmd_demo});

    for (auto& s : subs) add_common(s.cmd, c);

    if (argc <= 1) {
        std::puts(app.help().c_str());
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") return app.exit(e);
        std::fprintf(stderr, "error: %s (run with --help for usage)\n", e.what());
        return 2;
    }
    try {
        for (auto& s : subs)
            if (s.cmd->parsed()) {
                apply_config(*s.cmd, c);
                return s.fn(c);
            }
        std::puts(app.help().c_str());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
