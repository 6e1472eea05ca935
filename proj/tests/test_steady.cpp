#include <doctest.h>

#include "segrelab/error.hpp"
#include "segrelab/steady.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace segrelab;

namespace {

const double pi = std::acos(-1.0);

Field interior_fill(const Grid& g, double x, const Trace& tr) {
    Field f(g, x);
    set_trace(f, tr);
    return f;
}

} // namespace

TEST_CASE("jacobian agrees with central differences") {
    const Grid g = Grid::line(1.0, 7);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    Field u(g), v(g);
    for (std::size_t k = 0; k < g.size(); ++k) u[k] = U(rng), v[k] = U(rng);
    const ReactionModel f(ReactionKind::logistic), gg(ReactionKind::smooth_logistic);
    const double kappa = 3.0;
    const Eigen::MatrixXd J = Eigen::MatrixXd(stationary_jacobian(f, gg, kappa, u, v));
    const auto in = g.interior_nodes();
    const std::size_t n = in.size();
    REQUIRE(J.rows() == static_cast<long>(2 * n));
    const double h = 1e-6;
    for (std::size_t c = 0; c < 2 * n; ++c) {
        Field up = u, um = u, vp = v, vm = v;
        if (c < n) up[in[c]] += h, um[in[c]] -= h;
        else vp[in[c - n]] += h, vm[in[c - n]] -= h;
        const auto rp = stationary_residual(f, gg, kappa, up, vp);
        const auto rm = stationary_residual(f, gg, kappa, um, vm);
        for (std::size_t r = 0; r < 2 * n; ++r) {
            const double fd = r < n ? (rp.first[in[r]] - rm.first[in[r]]) / (2 * h)
                                    : (rp.second[in[r - n]] - rm.second[in[r - n]]) / (2 * h);
            const double scale = std::max(1.0, std::abs(J(r, c)));
            CHECK(std::abs(J(r, c) - fd) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("linear problem is solved by the harmonic extension") {
    const Grid g = Grid::rect(1.0, 1.0, 9, 9);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0, 1);
    Trace psi(g.boundary_nodes().size()), zeta(psi.size());
    for (auto& x : psi) x = U(rng);
    for (auto& x : zeta) x = U(rng);
    const ReactionModel z(ReactionKind::zero);
    const StationaryPair p = solve_stationary(z, z, 0.0, psi, zeta, interior_fill(g, 0.5, psi), interior_fill(g, 0.5, zeta));
    const Field H = harmonic_extension(psi, g);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(p.u_hat[k] == doctest::Approx(H[k]).epsilon(1e-10).scale(1));
    CHECK(p.iterations <= 2);
    CHECK(trace_of(p.u_hat) == psi);
    CHECK(trace_of(p.v_hat) == zeta);
}

TEST_CASE("extinction branch: Newton and pseudo-time agree") {
    const Grid g = Grid::line(1.0, 31);
    const Trace z{0, 0};
    const ReactionModel lg(ReactionKind::logistic);
    const Field guess = interior_fill(g, 0.05, z);
    const StationaryPair nw = solve_stationary(lg, lg, 0.0, z, z, guess, guess);
    CHECK(linf_norm(nw.u_hat) < 1e-9);

    NewtonOptions pt;
    pt.max_iterations = 0;   // go straight to the pseudo-time fallback
    const StationaryPair ps = solve_stationary(lg, lg, 0.0, z, z, guess, guess, 1e-9, pt);
    CHECK(ps.method == "pseudo_time");
    CHECK(l2_norm(ps.u_hat - nw.u_hat) < 1e-6);
}

TEST_CASE("large coupling: Newton matches the stabilized flow") {
    const Grid g = Grid::line(1.0, 127);
    const InitialData d = make_segregated_bumps(g, {Bump{{0.0, 0}, 0.5, 1}}, {Bump{{1.0, 0}, 0.5, 1}});
    const Trace psi = trace_of(d.u0), zeta = trace_of(d.v0);
    const Problem p{ReactionModel(ReactionKind::zero), ReactionModel(ReactionKind::zero), BoundarySchedule(psi),
                    BoundarySchedule(zeta), 1e4};
    StepperConfig cfg;
    cfg.dt = 2e-3;
    cfg.threshold = 1e-10;
    const Trajectory tr = run_until(initial_state(d), p, cfg);
    REQUIRE(tr.status == RunStatus::stabilized);
    const StationaryPair sp = solve_stationary(p.f, p.g, p.kappa, psi, zeta, d.u0, d.v0);
    const StabilizationReport rep = stabilization_detect(tr, sp, 1e-6);
    CHECK(rep.l2 < 1e-6);
    CHECK(rep.success);

    const StationaryPair again = solve_stationary(p.f, p.g, p.kappa, psi, zeta, sp.u_hat, sp.v_hat);
    CHECK(again.iterations <= 1);

    // A run started at the pair stays there.
    SimState s0;
    s0.u = sp.u_hat;
    s0.v = sp.v_hat;
    const Trajectory still = run_until(s0, p, cfg);
    CHECK(stabilization_detect(still, sp, 1e-8).h_distance < 1e-8);

    StepperConfig short_cfg;
    short_cfg.dt = 2e-3;
    short_cfg.max_steps = 3;
    CHECK_THROWS_AS(stabilization_detect(run_until(initial_state(d), p, short_cfg), sp, 1e-6), PreconditionError);
}

TEST_CASE("Newton residuals shrink quadratically at the end") {
    const Grid g = Grid::line(3.0, 63);
    const Trace one{1.0, 0.0}, other{0.0, 1.0};
    const ReactionModel lg(ReactionKind::logistic);
    const StationaryPair p = solve_stationary(lg, lg, 20.0, one, other, interior_fill(g, 0.5, one), interior_fill(g, 0.5, other));
    const auto& r = p.residual_history;
    REQUIRE(r.size() >= 3);
    const std::size_t n = r.size();
    if (r[n - 2] > 1e-13 && r[n - 3] > 1e-13) CHECK(r[n - 2] <= 10 * r[n - 3] * r[n - 3] + 1e-12);
    CHECK(p.residual_u <= 1e-9);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(p.u_hat[k] >= -1e-8);
        CHECK(p.u_hat[k] <= 1 + 1e-8);
    }
    // Rearranged identity: (-Delta u - f(u))_+ <= kappa u v^2 + tol.
    const Field Lu = laplacian_apply(p.u_hat);
    for (auto k : g.interior_nodes()) {
        const double vi = std::max(0.0, Lu[k] - lg.value(p.u_hat[k]));
        CHECK(vi <= 20.0 * p.u_hat[k] * p.v_hat[k] * p.v_hat[k] + 1e-8);
    }
}

TEST_CASE("variational inequality residual") {
    const Grid g = Grid::line(1.0, 31);
    const ReactionModel lg(ReactionKind::logistic);
    CHECK(variational_inequality_residual(Field(g), lg) == 0);

    // Scalar steady state on a long interval, where a positive branch exists.
    const Grid gl = Grid::line(10.0, 127);
    const Trace z{0, 0};
    const ReactionModel zk(ReactionKind::zero);
    const StationaryPair s = solve_stationary(lg, zk, 0.0, z, z, interior_fill(gl, 0.5, z), Field(gl));
    CHECK(linf_norm(s.u_hat) > 0.5);
    CHECK(variational_inequality_residual(s.u_hat, lg) <= 1e-8);

    // Scaled first mode with lambda_1 u > f(u) is flagged.
    const Field m = 0.5 * eigensystem(g).mode(0);
    CHECK(variational_inequality_residual(m, lg) > 1.0);
}

TEST_CASE("morrey ratio") {
    const Grid g = Grid::line(1.0, 63);
    CHECK(morrey_check(Field(g, 0.3)) == 0);
    Field x(g);
    for (std::size_t k = 0; k < g.size(); ++k) x[k] = g.coord(k, 0);
    CHECK(morrey_check(x) == doctest::Approx(0.25).epsilon(1e-12));
    Field s(g);
    for (std::size_t k = 0; k < g.size(); ++k) s[k] = std::sin(3 * pi * g.coord(k, 0)) * 0.5 + 0.5;
    CHECK(morrey_check(s) <= 1 + 1e-6);
    CHECK_THROWS_AS(morrey_check(Field(Grid::rect(1, 1, 3, 3))), PreconditionError);
}

TEST_CASE("certificate json field order") {
    const Grid g = Grid::line(1.0, 15);
    const Trace a{1, 0}, b{0, 1};
    const ReactionModel z(ReactionKind::zero);
    const StationaryPair p = solve_stationary(z, z, 100.0, a, b, interior_fill(g, 0.5, a), interior_fill(g, 0.5, b));
    const LimitCertificate c = certify_limit(p, z, z, 100.0);
    CHECK(c.kappa_overlap == 100.0 * c.overlap);
    CHECK(c.vi_u >= 0);
    const std::string js = certificate_json(c);
    const char* keys[] = {"\"kappa\"", "\"residual_u\"", "\"residual_v\"", "\"overlap\"", "\"kappa_overlap\"",
                          "\"vi_u\"", "\"vi_v\"", "\"holder_ratio\"", "\"method\"", "\"iterations\""};
    std::size_t pos = 0;
    for (const char* k : keys) {
        const auto at = js.find(k, pos);
        CHECK(at != std::string::npos);
        pos = at;
    }
    CHECK(js.find('\n') == std::string::npos);

    const Grid g2 = Grid::rect(1, 1, 5, 5);
    const Trace z2(g2.boundary_nodes().size(), 0.0);
    const StationaryPair p2 = solve_stationary(z, z, 1.0, z2, z2, Field(g2), Field(g2));
    CHECK(certificate_json(certify_limit(p2, z, z, 1.0)).find("\"holder_ratio\":null") != std::string::npos);
}
