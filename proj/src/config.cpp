#include "segrelab/config.hpp"
#include "segrelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace segrelab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw PreconditionError("config " + key + ": not a number: " + v);
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw PreconditionError("config " + key + ": not an integer: " + v);
    }
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
    return out;
}

// Trace from "c", "left,right" (1D) or "x0,x1,y0,y1" (2D sides; corners follow the y sides).
Trace parse_trace(const Grid& g, const std::string& key, const std::string& text) {
    const auto vals = to_doubles(key, text);
    const auto nodes = g.boundary_nodes();
    Trace tr(nodes.size());
    if (vals.size() == 1) {
        std::fill(tr.begin(), tr.end(), vals[0]);
        return tr;
    }
    if (g.dim() == 1 && vals.size() == 2) return {vals[0], vals[1]};
    if (g.dim() == 2 && vals.size() == 4) {
        for (std::size_t b = 0; b < nodes.size(); ++b) {
            const int i = static_cast<int>(nodes[b] % g.nx()), j = static_cast<int>(nodes[b] / g.nx());
            if (j == 0) tr[b] = vals[2];
            else if (j == g.ny() - 1) tr[b] = vals[3];
            else if (i == 0) tr[b] = vals[0];
            else tr[b] = vals[1];
        }
        return tr;
    }
    throw PreconditionError("config " + key + ": expected 1 value, 2 (1D) or 4 (2D): " + text);
}

std::vector<std::vector<std::string>> species_lists(const std::string& key, const std::string& text) {
    const auto parts = split(text, '|');
    if (parts.size() != 2) throw PreconditionError("config " + key + ": expected '<u list> | <v list>'");
    std::vector<std::vector<std::string>> out;
    for (const auto& p : parts) out.push_back(p.empty() ? std::vector<std::string>{} : split(p, ','));
    return out;
}

std::pair<std::vector<Bump>, std::vector<Bump>> parse_bumps(const RunConfig& cfg) {
    const auto c = species_lists("init.centers", cfg.centers);
    const auto r = species_lists("init.radii", cfg.radii);
    const auto a = species_lists("init.amplitudes", cfg.amplitudes);
    std::vector<Bump> out[2];
    for (int s = 0; s < 2; ++s) {
        if (r[s].size() != c[s].size() || a[s].size() != c[s].size())
            throw PreconditionError("config init.*: centers, radii and amplitudes must have matching lengths");
        for (std::size_t i = 0; i < c[s].size(); ++i) {
            Bump b;
            const auto xy = split(c[s][i], ':');
            if (static_cast<int>(xy.size()) != cfg.dim) throw PreconditionError("config init.centers: wrong coordinate count");
            b.center[0] = to_double("init.centers", xy[0]);
            if (cfg.dim == 2) b.center[1] = to_double("init.centers", xy[1]);
            b.radius = to_double("init.radii", r[s][i]);
            b.amplitude = to_double("init.amplitudes", a[s][i]);
            out[s].push_back(b);
        }
    }
    return {out[0], out[1]};
}

std::string resolve(const RunConfig& cfg, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    return (std::filesystem::path(cfg.base_dir) / path).string();
}

} // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "grid.dim") {
        c.dim = static_cast<int>(to_long(key, v));
        if (c.dim != 1 && c.dim != 2) throw PreconditionError("config grid.dim must be 1 or 2");
    } else if (key == "grid.n") {
        const auto x = to_doubles(key, v);
        c.n = {static_cast<int>(x.at(0)), x.size() > 1 ? static_cast<int>(x[1]) : static_cast<int>(x[0])};
    } else if (key == "grid.L") {
        const auto x = to_doubles(key, v);
        c.L = {x.at(0), x.size() > 1 ? x[1] : x[0]};
    } else if (key == "reaction.kind") c.kind = parse_reaction_kind(v);
    else if (key == "boundary.mode") c.mode = parse_boundary_mode(v);
    else if (key == "boundary.gamma") c.gamma = to_double(key, v);
    else if (key == "boundary.psi_inf") c.psi_inf = v;
    else if (key == "boundary.zeta_inf") c.zeta_inf = v;
    else if (key == "boundary.rho") c.rho = v;
    else if (key == "boundary.rho_zeta") c.rho_zeta = v;
    else if (key == "init.type") {
        static const std::set<std::string> kinds{"bumps", "random", "file", "harmonic", "constant"};
        if (!kinds.count(v)) throw PreconditionError("config init.type: unknown kind " + v);
        c.init_type = v;
    } else if (key == "init.centers") c.centers = v;
    else if (key == "init.radii") c.radii = v;
    else if (key == "init.amplitudes") c.amplitudes = v;
    else if (key == "init.seed") c.seed = static_cast<std::uint64_t>(to_long(key, v));
    else if (key == "init.u_file") c.u_file = v;
    else if (key == "init.v_file") c.v_file = v;
    else if (key == "init.u_value") c.u_value = to_double(key, v);
    else if (key == "init.v_value") c.v_value = to_double(key, v);
    else if (key == "run.kappa") c.kappa = to_double(key, v);
    else if (key == "run.dt") c.dt = to_double(key, v);
    else if (key == "run.horizon") c.horizon = to_double(key, v);
    else if (key == "run.max_steps") c.max_steps = to_long(key, v);
    else if (key == "run.threshold") c.threshold = to_double(key, v);
    else if (key == "run.window") c.window = static_cast<int>(to_long(key, v));
    else if (key == "run.sample_stride") c.sample_stride = to_long(key, v);
    else if (key == "run.state_stride") c.state_stride = to_long(key, v);
    else if (key == "run.invariant_tol") c.invariant_tol = to_double(key, v);
    else if (key == "steady.tol") c.steady_tol = to_double(key, v);
    else if (key == "sweep.kappa_list") c.kappa_list = to_doubles(key, v);
    else if (key == "sweep.workers") c.workers = static_cast<int>(to_long(key, v));
    else if (key == "output.dir") c.output_dir = v;
    else throw PreconditionError("config: unknown key " + key);
}

RunConfig parse_config(std::istream& is, const std::string& base_dir) {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw PreconditionError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw PreconditionError("config: repeated key " + key);
        set_config_value(cfg, key, value);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read config: " + path);
    const auto parent = std::filesystem::path(path).parent_path();
    return parse_config(is, parent.empty() ? "." : parent.string());
}

Setup build_setup(const RunConfig& cfg) {
    Setup s;
    s.grid = cfg.dim == 1 ? Grid::line(cfg.L[0], cfg.n[0]) : Grid::rect(cfg.L[0], cfg.L[1], cfg.n[0], cfg.n[1]);
    const Grid& g = s.grid;
    const bool psi_from_init = cfg.psi_inf == "init", zeta_from_init = cfg.zeta_inf == "init";

    InitialData init;
    Trace psi, zeta;
    if (!psi_from_init) psi = parse_trace(g, "boundary.psi_inf", cfg.psi_inf);
    if (!zeta_from_init) zeta = parse_trace(g, "boundary.zeta_inf", cfg.zeta_inf);

    if (cfg.init_type == "bumps") {
        auto [ub, vb] = parse_bumps(cfg);
        init = make_segregated_bumps(g, ub, vb, psi_from_init ? nullptr : &psi, zeta_from_init ? nullptr : &zeta);
    } else if (cfg.init_type == "file") {
        if (cfg.u_file.empty() || cfg.v_file.empty()) throw PreconditionError("config: init.type=file needs init.u_file and init.v_file");
        init.u0 = read_snapshot(resolve(cfg, cfg.u_file));
        init.v0 = read_snapshot(resolve(cfg, cfg.v_file));
        if (init.u0.grid != g || init.v0.grid != g) throw PreconditionError("config: snapshot grid differs from grid.*");
        if (!psi_from_init) set_trace(init.u0, psi);
        if (!zeta_from_init) set_trace(init.v0, zeta);
    } else {
        if (psi_from_init || zeta_from_init) {
            if (cfg.init_type != "constant")
                throw PreconditionError("config: boundary.*=init needs init.type bumps, file or constant");
        }
        if (psi_from_init) psi = Trace(g.boundary_nodes().size(), cfg.u_value);
        if (zeta_from_init) zeta = Trace(g.boundary_nodes().size(), cfg.v_value);
        if (cfg.init_type == "random") {
            init = make_random_data(g, cfg.seed, psi, zeta);
        } else if (cfg.init_type == "harmonic") {
            init.u0 = harmonic_extension(psi, g);
            init.v0 = harmonic_extension(zeta, g);
        } else {   // constant
            init.u0 = Field(g, cfg.u_value);
            init.v0 = Field(g, cfg.v_value);
            set_trace(init.u0, psi);
            set_trace(init.v0, zeta);
        }
    }
    if (psi_from_init) psi = trace_of(init.u0);
    if (zeta_from_init) zeta = trace_of(init.v0);

    s.problem.f = ReactionModel(cfg.kind);
    s.problem.g = ReactionModel(cfg.kind);
    s.problem.kappa = cfg.kappa;
    if (cfg.mode == BoundaryMode::stationary) {
        s.problem.psi = BoundarySchedule(psi);
        s.problem.zeta = BoundarySchedule(zeta);
    } else {
        s.problem.psi = BoundarySchedule(psi, parse_trace(g, "boundary.rho", cfg.rho), cfg.gamma);
        s.problem.zeta = BoundarySchedule(zeta, parse_trace(g, "boundary.rho_zeta", cfg.rho_zeta), cfg.gamma);
    }
    if (!init.segregated) {
        bool seg = true;
        for (std::size_t k = 0; k < g.size(); ++k) seg = seg && init.u0[k] * init.v0[k] == 0.0;
        init.segregated = seg;
    }
    validate_initial_data(init, s.problem.psi, s.problem.zeta);
    s.init = std::move(init);
    return s;
}

StepperConfig stepper_config(const RunConfig& cfg) {
    StepperConfig sc;
    sc.dt = cfg.dt;
    sc.max_steps = cfg.max_steps;
    sc.invariant_tolerance = cfg.invariant_tol;
    sc.horizon = cfg.horizon;
    sc.threshold = cfg.threshold;
    sc.window = cfg.window;
    sc.sample_stride = cfg.sample_stride;
    sc.state_stride = cfg.state_stride;
    return sc;
}

int effective_workers(const RunConfig& cfg) {
    int w = cfg.workers;
    if (const char* env = std::getenv("SEGRELAB_WORKERS")) {
        try {
            w = std::stoi(env);
        } catch (const std::exception&) {
            throw PreconditionError(std::string("SEGRELAB_WORKERS is not an integer: ") + env);
        }
    }
    if (w < 1) throw PreconditionError("worker count must be at least 1");
    return w;
}

} // namespace segrelab
