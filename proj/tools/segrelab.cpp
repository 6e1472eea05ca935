// segrelab command-line driver.

#include "segrelab/error.hpp"
#include "segrelab/mesh.hpp"
#include "segrelab/steady.hpp"
#include "segrelab/sweeplab.hpp"
#include "segrelab/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace segrelab;

namespace {

int cmd_run(const std::string& path) {
    const RunConfig cfg = load_config(path);
    const RunResult r = run_single(cfg, cfg.kappa, cfg.output_dir);
    std::cout << "status " << to_string(r.traj.status) << " steps " << r.traj.final_state.step_index << " t "
              << format_double(r.traj.final_state.t) << "\n";
    std::cout << certificate_json(r.cert) << "\n";
    std::cout << "wrote " << cfg.output_dir << "\n";
    return 0;
}

int cmd_sweep(const std::string& path) {
    const RunConfig cfg = load_config(path);
    const SweepReport rep = run_sweep(cfg, true);
    for (const auto& r : rep.records)
        std::cout << "kappa " << format_double(r.kappa) << " " << r.status << " overlap " << format_double(r.overlap)
                  << " kappa_overlap " << format_double(r.kappa_overlap) << " max_product "
                  << format_double(r.max_product) << "\n";
    std::cout << "overlap_slope " << format_double(rep.overlap_slope) << " kappa_overlap_slope "
              << format_double(rep.kappa_overlap_slope) << "\n";
    for (const auto& c : rep.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
                  << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
    std::cout << "wrote " << cfg.output_dir << "\n";
    return rep.passed ? 0 : 1;
}

int cmd_steady(const std::string& path, double kappa) {
    RunConfig cfg = load_config(path);
    cfg.kappa = kappa;
    const Setup s = build_setup(cfg);
    const StationaryPair p = solve_stationary(s.problem.f, s.problem.g, kappa, s.problem.psi.psi_inf(),
                                              s.problem.zeta.psi_inf(), s.init.u0, s.init.v0, cfg.steady_tol);
    const LimitCertificate c = certify_limit(p, s.problem.f, s.problem.g, kappa);
    std::filesystem::create_directories(cfg.output_dir);
    write_snapshot(cfg.output_dir + "/u_hat.field", p.u_hat, 0.0);
    write_snapshot(cfg.output_dir + "/v_hat.field", p.v_hat, 0.0);
    std::ofstream(cfg.output_dir + "/certificate.jsonl") << certificate_json(c) << "\n";
    std::cout << certificate_json(c) << "\n";
    return 0;
}

int cmd_verify(const std::string& suite, const std::string& fault) {
    if (!fault.empty()) {
        if (fault != "stencil_sign") throw PreconditionError("unknown fault: " + fault);
        set_stencil_fault(true);
    }
    const VerifyResult r = run_verify(suite);
    write_verify_jsonl(std::cout, r);
    return r.passed() ? 0 : 1;
}

int cmd_extract(const std::string& dir, int depth) {
    const ExtractionResult r = diagonal_extraction(load_extraction_inputs(dir), depth);
    const std::string text = extraction_json(r);
    std::ofstream(dir + "/extraction.json") << text << "\n";
    for (const auto& t : r.terms)
        std::cout << "m " << t.m << " kappa " << format_double(t.kappa) << " t " << format_double(t.t) << " l2 "
                  << format_double(t.combined_l2) << " < " << format_double(1.0 / t.m) << " linf "
                  << format_double(t.linf) << "\n";
    std::cout << "depth " << r.achieved << " of " << r.requested << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
    return r.complete ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"segrelab: two-species competition-diffusion laboratory"};
    app.require_subcommand(1);

    std::string config, suite, fault, report;
    double kappa = 0;
    int depth = 5;

    auto* run = app.add_subcommand("run", "single run from a config file");
    run->add_option("--config", config, "config file")->required();
    auto* sweep = app.add_subcommand("sweep", "kappa sweep from a config file");
    sweep->add_option("--config", config, "config file")->required();
    auto* steady = app.add_subcommand("steady", "solve the stationary system");
    steady->add_option("--config", config, "config file")->required();
    steady->add_option("--kappa", kappa, "coupling strength")->required();
    auto* verify = app.add_subcommand("verify", "run invariant suites");
    verify->add_option("--suite", suite, "suite name (mesh, model, evolve, energy, steady, heatkernel)");
    verify->add_option("--inject-fault", fault, "test hook: stencil_sign")->group("");
    auto* extract = app.add_subcommand("extract", "diagonal extraction from a sweep directory");
    extract->add_option("--report", report, "sweep output directory")->required();
    extract->add_option("--depth", depth, "number of terms")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config);
        if (*sweep) return cmd_sweep(config);
        if (*steady) return cmd_steady(config, kappa);
        if (*verify) return cmd_verify(suite, fault);
        if (*extract) return cmd_extract(report, depth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
