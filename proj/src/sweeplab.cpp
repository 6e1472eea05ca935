#include "segrelab/sweeplab.hpp"
#include "segrelab/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace segrelab {

namespace {

double mu_horizon(const BoundarySchedule& a, const BoundarySchedule& b, const Grid& g) {
    double rho = 0;
    double gamma = 1.0;
    for (const auto* s : {&a, &b}) {
        if (s->mode() != BoundaryMode::decaying) continue;
        gamma = s->gamma();
        for (double r : s->rho()) rho = std::max(rho, std::abs(r));
    }
    if (rho == 0) return 1.0;
    const double scale = rho * std::sqrt(g.measure());
    double H = 40.0 / gamma;
    while (BoundarySchedule::transient(H, gamma) * scale > 1e-11) H += 10.0 / gamma;
    return H;
}

double max_product(const Field& u, const Field& v) {
    double m = 0;
    for (std::size_t k = 0; k < u.size(); ++k) m = std::max(m, u[k] * v[k]);
    return m;
}

double pair_l2(const Field& a, const Field& b, const Field& c, const Field& d) {
    return std::hypot(l2_norm(a - c), l2_norm(b - d));
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error("unwritable output path: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("unwritable output path: " + path);
    os << text;
    if (!os) throw Error("error writing " + path);
}

std::string state_name(std::size_t i, char species) {
    std::ostringstream os;
    os << "states/s" << std::setw(5) << std::setfill('0') << i << "_" << species << ".field";
    return os.str();
}

void write_run(const RunResult& r, const std::string& dir) {
    ensure_dir(dir);
    ensure_dir(dir + "/states");
    {
        std::ofstream os(dir + "/timeseries.csv");
        if (!os) throw Error("unwritable output path: " + dir);
        write_timeseries_csv(os, r.traj);
    }
    json states = json::array();
    for (std::size_t i = 0; i < r.traj.states.size(); ++i) {
        const SimState& s = r.traj.states[i];
        write_snapshot(dir + "/" + state_name(i, 'u'), s.u, s.t);
        write_snapshot(dir + "/" + state_name(i, 'v'), s.v, s.t);
        states.push_back({{"step", s.step_index}, {"t", s.t}, {"u", state_name(i, 'u')}, {"v", state_name(i, 'v')}});
    }
    const SimState& fin = r.traj.final_state;
    write_snapshot(dir + "/u_final.field", fin.u, fin.t);
    write_snapshot(dir + "/v_final.field", fin.v, fin.t);
    write_snapshot(dir + "/u_hat.field", r.pair.u_hat, fin.t);
    write_snapshot(dir + "/v_hat.field", r.pair.v_hat, fin.t);
    write_text(dir + "/certificate.jsonl", certificate_json(r.cert) + "\n");
    json j;
    j["kappa"] = r.kappa;
    j["status"] = to_string(r.traj.status);
    j["steps"] = fin.step_index;
    j["t_final"] = fin.t;
    j["max_h"] = r.max_h;
    j["min_energy"] = r.min_energy;
    j["max_energy"] = r.max_energy;
    j["mu"] = r.mu;
    j["derivative_integral"] = r.traj.derivative_integral;
    j["morrey_final"] = std::isfinite(r.morrey_final) ? json(r.morrey_final) : json(nullptr);
    j["u_hat"] = "u_hat.field";
    j["v_hat"] = "v_hat.field";
    j["states"] = states;
    write_text(dir + "/run.json", j.dump(2) + "\n");
}

} // namespace

RunResult run_single(const RunConfig& cfg0, double kappa, const std::string& out_dir) {
    RunConfig cfg = cfg0;
    cfg.kappa = kappa;
    Setup s = build_setup(cfg);
    EnergyTracker tracker(s.problem, s.grid);
    RunResult r;
    r.kappa = kappa;
    r.traj = run_until(initial_state(s.init), s.problem, stepper_config(cfg), &tracker);

    r.min_energy = std::numeric_limits<double>::infinity();
    r.max_energy = -std::numeric_limits<double>::infinity();
    for (const SampleRow& row : r.traj.samples) {
        r.max_h = std::max(r.max_h, std::hypot(row.u_h1, row.v_h1));
        r.min_energy = std::min(r.min_energy, row.energy);
        r.max_energy = std::max(r.max_energy, row.energy);
    }
    r.mu = mu_quantity(s.init, s.problem.psi, s.problem.zeta, mu_horizon(s.problem.psi, s.problem.zeta, s.grid));

    const SimState& fin = r.traj.final_state;
    r.pair = solve_stationary(s.problem.f, s.problem.g, kappa, s.problem.psi.psi_inf(), s.problem.zeta.psi_inf(), fin.u,
                              fin.v, cfg.steady_tol);
    r.cert = certify_limit(r.pair, s.problem.f, s.problem.g, kappa);
    r.morrey_final = s.grid.dim() == 1 ? std::max(morrey_check(fin.u), morrey_check(fin.v))
                                       : std::numeric_limits<double>::quiet_NaN();
    if (!out_dir.empty()) {
        write_run(r, out_dir);
        r.dir = out_dir;
    }
    return r;
}

namespace {

SweepCheck make_check(const std::string& name, bool ok, double value, double limit, const std::string& detail = "") {
    return SweepCheck{name, ok, value, limit, detail};
}

double log_slope(const std::vector<double>& k, const std::vector<double>& y, bool& vacuous, bool& defined) {
    vacuous = std::all_of(y.begin(), y.end(), [](double x) { return x == 0.0; });
    defined = std::all_of(y.begin(), y.end(), [](double x) { return x > 0.0; });
    if (!defined) return vacuous ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < k.size(); ++i) {
        lx.push_back(std::log(k[i]));
        ly.push_back(std::log(y[i]));
    }
    return least_squares(lx, ly).slope;
}

std::string kappa_dir_name(std::size_t i, double kappa) {
    std::ostringstream os;
    os << "kappa_" << std::setw(2) << std::setfill('0') << i << "_" << format_double(kappa);
    return os.str();
}

} // namespace

SweepReport run_sweep(const RunConfig& cfg, bool write) {
    const auto& ks = cfg.kappa_list;
    if (ks.size() < 3) throw PreconditionError("sweep needs at least 3 kappa values");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!(ks[i] > 0)) throw PreconditionError("sweep kappa values must be positive");
        if (i > 0 && !(ks[i] > ks[i - 1])) throw PreconditionError("sweep kappa_list must be ascending");
    }
    if (ks.back() / ks.front() < 100.0 * (1 - 1e-12)) throw PreconditionError("sweep kappa_list must span at least 2 decades");
    const int workers = effective_workers(cfg);
    if (write) ensure_dir(cfg.output_dir);

    SweepReport rep;
    rep.runs.resize(ks.size());
    std::vector<std::exception_ptr> errors(ks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < ks.size(); i = next++) {
            try {
                const std::string dir = write ? cfg.output_dir + "/" + kappa_dir_name(i, ks[i]) : std::string();
                rep.runs[i] = run_single(cfg, ks[i], dir);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nthreads = std::min<int>(workers, static_cast<int>(ks.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const Setup setup = build_setup(cfg);
    std::vector<double> overlap, koverlap;
    std::vector<AuditRow> audit_rows;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const RunResult& r = rep.runs[i];
        KappaRecord rec;
        rec.kappa = r.kappa;
        rec.dir = write ? kappa_dir_name(i, ks[i]) : "";
        rec.status = to_string(r.traj.status);
        rec.steps = r.traj.final_state.step_index;
        rec.t_final = r.traj.final_state.t;
        rec.overlap = r.cert.overlap;
        rec.kappa_overlap = r.cert.kappa_overlap;
        rec.h_norm = pair_h_norm(r.pair.u_hat, r.pair.v_hat);
        rec.l2_norm = std::hypot(l2_norm(r.pair.u_hat), l2_norm(r.pair.v_hat));
        rec.max_product = max_product(r.pair.u_hat, r.pair.v_hat);
        rec.min_energy = r.min_energy;
        rec.max_energy = r.max_energy;
        rec.max_h = r.max_h;
        rec.mu = r.mu;
        rec.morrey_final = r.morrey_final;
        rec.cert = r.cert;
        rep.records.push_back(rec);
        overlap.push_back(rec.overlap);
        koverlap.push_back(rec.kappa_overlap);
        audit_rows.push_back({r.kappa, r.max_h, r.min_energy, r.max_energy, r.mu});
        if (i > 0) {
            const RunResult& p = rep.runs[i - 1];
            rep.cauchy_l2.push_back(pair_l2(r.pair.u_hat, r.pair.v_hat, p.pair.u_hat, p.pair.v_hat));
        }
    }

    bool vac1, def1, vac2, def2;
    rep.overlap_slope = log_slope(ks, overlap, vac1, def1);
    rep.kappa_overlap_slope = log_slope(ks, koverlap, vac2, def2);
    rep.finest_max_product = rep.records.back().max_product;
    rep.audit = h_bound_audit(audit_rows);

    // (a) kappa * overlap shows no increasing trend.
    rep.checks.push_back(make_check("kappa_overlap_trend", vac2 || (def2 && rep.kappa_overlap_slope <= 0.1),
                                    rep.kappa_overlap_slope, 0.1, vac2 ? "all overlaps zero" : ""));
    // Overlap chain, 5% slack.
    {
        bool ok = true;
        std::string where;
        for (std::size_t i = 1; i < overlap.size(); ++i)
            if (overlap[i] > 1.05 * overlap[i - 1]) ok = false, where += " kappa=" + format_double(ks[i]);
        rep.checks.push_back(make_check("overlap_nonincreasing", ok, overlap.back(), overlap.front(),
                                        ok ? "" : "increase at" + where));
    }
    // (b) max nodal product decreases along the sweep.
    {
        bool ok = rep.records.back().max_product <= rep.records.front().max_product;
        for (std::size_t i = 1; i < rep.records.size(); ++i)
            ok = ok && rep.records[i].max_product <= 1.05 * rep.records[i - 1].max_product;
        rep.checks.push_back(make_check("max_product_chain", ok, rep.finest_max_product,
                                        rep.records.front().max_product));
    }
    // (c) variational inequalities of the candidate limit.
    const LimitCertificate& lim = rep.records.back().cert;
    const double vi = std::max(lim.vi_u, lim.vi_v);
    rep.checks.push_back(make_check("limit_vi", vi <= 1e-6, vi, 1e-6));
    {
        const RunResult& fin = rep.runs.back();
        const bool ok = trace_of(fin.pair.u_hat) == setup.problem.psi.psi_inf() &&
                        trace_of(fin.pair.v_hat) == setup.problem.zeta.psi_inf();
        rep.checks.push_back(make_check("limit_traces", ok, ok ? 0.0 : 1.0, 0.0));
    }
    rep.checks.push_back(make_check("h_bound_audit", rep.audit.passed, rep.audit.slope, 1e-3,
                                    rep.audit.mu_zero ? "mu = 0" : "mu > 0, violations " + std::to_string(rep.audit.violations)));
    if (setup.grid.dim() == 1) {
        double worst = 0;
        for (const auto& r : rep.records) worst = std::max({worst, r.morrey_final, r.cert.holder_ratio});
        rep.checks.push_back(make_check("morrey", worst <= 1.0 + 1e-6, worst, 1.0 + 1e-6));
    }
    rep.passed = std::all_of(rep.checks.begin(), rep.checks.end(), [](const SweepCheck& c) { return c.passed; });

    if (write) {
        write_text(cfg.output_dir + "/report.json", report_json(rep) + "\n");
        std::ostringstream audit, certs;
        write_energy_audit_csv(audit, rep.audit);
        for (const auto& r : rep.records) certs << certificate_json(r.cert) << "\n";
        write_text(cfg.output_dir + "/energy_audit.csv", audit.str());
        write_text(cfg.output_dir + "/certificates.jsonl", certs.str());
    }
    return rep;
}

std::string report_json(const SweepReport& rep) {
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json j;
    json recs = json::array();
    for (const auto& r : rep.records) {
        recs.push_back({{"kappa", r.kappa},
                        {"dir", r.dir},
                        {"status", r.status},
                        {"steps", r.steps},
                        {"t_final", r.t_final},
                        {"overlap", r.overlap},
                        {"kappa_overlap", r.kappa_overlap},
                        {"h_norm", r.h_norm},
                        {"l2_norm", r.l2_norm},
                        {"max_product", r.max_product},
                        {"min_energy", r.min_energy},
                        {"max_energy", r.max_energy},
                        {"max_h", r.max_h},
                        {"mu", r.mu},
                        {"morrey_final", num(r.morrey_final)},
                        {"certificate", json::parse(certificate_json(r.cert))}});
    }
    j["records"] = recs;
    j["cauchy_l2"] = rep.cauchy_l2;
    j["overlap_slope"] = num(rep.overlap_slope);
    j["kappa_overlap_slope"] = num(rep.kappa_overlap_slope);
    j["finest_max_product"] = rep.finest_max_product;
    j["audit"] = {{"slope", rep.audit.slope},
                  {"slope_ci", num(rep.audit.slope_ci)},
                  {"energy_slope", rep.audit.energy_slope},
                  {"fitted_R", rep.audit.fitted_R},
                  {"mu_zero", rep.audit.mu_zero},
                  {"violations", rep.audit.violations},
                  {"passed", rep.audit.passed}};
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", num(c.value)}, {"limit", c.limit},
                          {"detail", c.detail}});
    j["checks"] = checks;
    j["passed"] = rep.passed;
    return j.dump(2);
}

} // namespace segrelab
