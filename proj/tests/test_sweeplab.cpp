#include <doctest.h>

#include "segrelab/error.hpp"
#include "segrelab/sweeplab.hpp"
#include "segrelab/verify.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace segrelab;
namespace fs = std::filesystem;

namespace {

const char* small_sweep = R"(
grid.dim = 1
grid.n = 63
grid.L = 16
reaction.kind = zero
boundary.mode = stationary
boundary.psi_inf = init
boundary.zeta_inf = init
init.type = bumps
init.centers = 0 | 16
init.radii = 6.4 | 6.4
init.amplitudes = 1 | 1
run.dt = 0.05
run.threshold = 1e-8
run.sample_stride = 10
run.state_stride = 10
sweep.kappa_list = 1, 10, 100
)";

RunConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("segrelab_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config parsing") {
    const RunConfig c = parse("grid.n = 31\n# comment\nrun.kappa = 5\nsweep.kappa_list = 1, 10, 100\n");
    CHECK(c.n[0] == 31);
    CHECK(c.kappa == 5);
    CHECK(c.kappa_list == std::vector<double>{1, 10, 100});
    CHECK_THROWS_AS(parse("grid.nn = 3\n"), PreconditionError);
    CHECK_THROWS_AS(parse("run.dt = 1\nrun.dt = 2\n"), PreconditionError);
    CHECK_THROWS_AS(parse("run.dt = fast\n"), PreconditionError);
    CHECK_THROWS_AS(parse("just words\n"), PreconditionError);
    RunConfig d;
    CHECK_THROWS_AS(set_config_value(d, "output.path", "x"), PreconditionError);
}

TEST_CASE("setup from config") {
    const RunConfig c = parse(small_sweep);
    const Setup s = build_setup(c);
    CHECK(s.grid == Grid::line(16, 63));
    CHECK(s.init.segregated);
    CHECK(s.problem.psi.psi_inf() == trace_of(s.init.u0));
    CHECK(stepper_config(c).dt == 0.05);

    RunConfig two = parse("grid.dim = 2\ngrid.n = 7, 5\ninit.type = random\nboundary.psi_inf = 0.1, 0.2, 0.3, 0.4\n");
    const Setup s2 = build_setup(two);
    CHECK(s2.grid.count(1) == 5);
    CHECK(s2.problem.psi.psi_inf().size() == s2.grid.boundary_nodes().size());
}

TEST_CASE("worker count honours the environment") {
    RunConfig c;
    c.workers = 3;
    unsetenv("SEGRELAB_WORKERS");
    CHECK(effective_workers(c) == 3);
    setenv("SEGRELAB_WORKERS", "2", 1);
    CHECK(effective_workers(c) == 2);
    setenv("SEGRELAB_WORKERS", "many", 1);
    CHECK_THROWS_AS(effective_workers(c), PreconditionError);
    unsetenv("SEGRELAB_WORKERS");
}

TEST_CASE("sweep preconditions") {
    RunConfig c = parse(small_sweep);
    c.kappa_list = {1, 100};
    CHECK_THROWS_AS(run_sweep(c, false), PreconditionError);
    c.kappa_list = {1, 2, 5};
    CHECK_THROWS_AS(run_sweep(c, false), PreconditionError);
    c.kappa_list = {1, 100, 10};
    CHECK_THROWS_AS(run_sweep(c, false), PreconditionError);
}

TEST_CASE("zero sweep passes vacuously") {
    RunConfig c = parse("grid.n = 31\ninit.type = constant\ninit.u_value = 0\ninit.v_value = 0\n"
                        "sweep.kappa_list = 1, 10, 100\nrun.dt = 0.01\n");
    const SweepReport rep = run_sweep(c, false);
    for (const auto& r : rep.records) {
        CHECK(r.overlap == 0);
        CHECK(r.cert.residual_u == 0);
        CHECK(r.cert.residual_v == 0);
        CHECK(r.status == "stabilized");
    }
    CHECK(rep.passed);
    for (const auto& ch : rep.checks) CHECK_MESSAGE(ch.passed, ch.name);
}

TEST_CASE("single run artifacts are deterministic") {
    RunConfig c = parse(small_sweep);
    const fs::path a = scratch("run_a"), b = scratch("run_b");
    const RunResult ra = run_single(c, 100.0, a.string());
    run_single(c, 100.0, b.string());
    CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
    CHECK(slurp(a / "u_hat.field") == slurp(b / "u_hat.field"));
    CHECK(fs::exists(a / "certificate.jsonl"));
    CHECK(fs::exists(a / "run.json"));
    CHECK(fs::exists(a / "states" / "s00000_u.field"));

    // Overlap starts at zero, grows, and ends below max u0 * max v0.
    CHECK(ra.traj.samples.front().overlap_l2sq == 0);
    double peak = 0;
    for (const auto& row : ra.traj.samples) peak = std::max(peak, row.overlap_l2sq);
    CHECK(peak > 0);
    CHECK(ra.traj.samples.back().overlap_l2sq < 1.0);
    CHECK(ra.traj.samples.back().overlap_l2sq > 0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("sweep report, worker independence and extraction") {
    unsetenv("SEGRELAB_WORKERS");
    RunConfig c = parse(small_sweep);
    const fs::path out = scratch("sweep");
    c.output_dir = out.string();
    c.workers = 1;
    const SweepReport one = run_sweep(c, true);
    c.workers = 2;
    const SweepReport two = run_sweep(c, false);
    REQUIRE(one.records.size() == 3);
    REQUIRE(two.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(one.records[i].kappa == two.records[i].kappa);
        CHECK(one.records[i].overlap == two.records[i].overlap);
        CHECK(one.records[i].steps == two.records[i].steps);
        CHECK(one.records[i].max_h == two.records[i].max_h);
        CHECK(one.records[i].kappa_overlap == one.records[i].kappa * one.records[i].overlap);
        CHECK(fs::exists(out / one.records[i].dir / "run.json"));
    }
    CHECK(one.records[1].overlap < one.records[0].overlap);
    CHECK(one.records[2].overlap < one.records[1].overlap);
    CHECK(one.finest_max_product <= one.records.front().max_product);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "energy_audit.csv"));
    CHECK(fs::exists(out / "certificates.jsonl"));

    const ExtractionResult mem = diagonal_extraction(extraction_inputs(one), 4);
    const ExtractionResult disk = diagonal_extraction(load_extraction_inputs(out.string()), 4);
    REQUIRE(mem.terms.size() == disk.terms.size());
    for (std::size_t i = 0; i < mem.terms.size(); ++i) {
        CHECK(mem.terms[i].combined_l2 == disk.terms[i].combined_l2);
        CHECK(mem.terms[i].combined_l2 < 1.0 / mem.terms[i].m);
        CHECK(mem.terms[i].m == static_cast<int>(i) + 1);
        if (i > 0) CHECK(mem.terms[i].kappa >= mem.terms[i - 1].kappa);
    }
    CHECK(extraction_json(mem).find("\"terms\"") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("extraction edge cases") {
    const Grid g = Grid::line(1.0, 15);
    auto pair_state = [&](double a) {
        SimState s;
        s.u = Field(g, a);
        s.v = Field(g, 0.0);
        return s;
    };
    // Runs that start at their own pair: every t_m is the first sample.
    std::vector<ExtractionInput> at_pair;
    for (double k : {1.0, 10.0, 100.0}) {
        ExtractionInput in{k, Field(g, 0.5), Field(g, 0.0), {}};
        SimState s0 = pair_state(0.5), s1 = pair_state(0.5);
        s1.t = 1.0;
        in.states = {s0, s1};
        at_pair.push_back(in);
    }
    const ExtractionResult r = diagonal_extraction(at_pair, 6);
    CHECK(r.complete);
    for (const auto& t : r.terms) CHECK(t.t == 0.0);

    // Limit floor above the tolerance: partial sequence with a note.
    ExtractionInput coarse{1.0, Field(g, 0.2), Field(g, 0.0), {pair_state(0.2)}};
    ExtractionInput fine{10.0, Field(g, 0.5), Field(g, 0.0), {pair_state(0.9)}};
    const ExtractionResult p = diagonal_extraction({coarse, fine}, 3);
    CHECK_FALSE(p.complete);
    CHECK(p.achieved == 1);
    CHECK_FALSE(p.note.empty());
    CHECK_THROWS_AS(diagonal_extraction({}, 2), PreconditionError);
}

TEST_CASE("verify suites") {
    CHECK(run_verify().passed());
    const VerifyResult hk = run_verify("heatkernel");
    CHECK(hk.passed());
    for (const auto& c : hk.checks) CHECK(c.suite == "heatkernel");
    set_stencil_fault(true);
    const VerifyResult bad = run_verify("mesh");
    set_stencil_fault(false);
    CHECK_FALSE(bad.passed());
    CHECK_THROWS_AS(run_verify("nope"), PreconditionError);
    std::ostringstream os;
    write_verify_jsonl(os, hk);
    CHECK(os.str().find("\"suite\":\"heatkernel\"") != std::string::npos);
}
