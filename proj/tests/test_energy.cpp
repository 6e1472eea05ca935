#include <doctest.h>

#include "segrelab/energy.hpp"
#include "segrelab/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace segrelab;

namespace {

Problem frozen(const Grid& g, ReactionKind kind, double kappa, const Trace& psi, const Trace& zeta) {
    return {ReactionModel(kind), ReactionModel(kind), BoundarySchedule(psi), BoundarySchedule(zeta), kappa};
}

SimState state(const Field& u, const Field& v) {
    SimState s;
    s.u = u;
    s.v = v;
    return s;
}

// Max |r| over a fixed horizon for the kappa=0 eigenmode problem.
double eigenmode_residual(double dt) {
    const Grid g = Grid::line(1.0, 15);
    const Trace z{0, 0};
    const Problem p = frozen(g, ReactionKind::zero, 0.0, z, z);
    EnergyTracker tr(p, g);
    StepperConfig cfg;
    cfg.dt = dt;
    SimState s = state(0.5 * eigensystem(g).mode(0), Field(g));
    tr.on_start(s);
    double worst = 0;
    const int steps = static_cast<int>(std::lround(0.1 / dt));
    for (int n = 0; n < steps; ++n) {
        const double L0 = tr.energy();
        const SimState next = step(s, p, cfg);
        tr.on_step(s, next);
        const auto d = tr.last_homogenized_rates();
        worst = std::max(worst, std::abs(dissipation_residual(L0, tr.energy(), dt, d.du, d.dv, 0.0)));
        s = next;
    }
    return worst;
}

} // namespace

TEST_CASE("natural energy by hand on three nodes") {
    const Grid g = Grid::line(1.0, 3);
    const Trace z{0, 0};
    const Field U = harmonic_extension(z, g);
    for (double kappa : {0.0, 7.0, 1e4}) {
        const Problem p = frozen(g, ReactionKind::logistic, kappa, z, z);
        CHECK(energy_stationary(state(Field(g), Field(g)), p, U, U) == 0);
        Field u(g);
        for (auto k : g.interior_nodes()) u[k] = 1;
        // Gradient lives in the two boundary gaps: 1/2 * 2 * (1/h)^2 * h = 1/h = 4.
        const double expect = 4.0 - (1.0 / 6) * 0.75;
        CHECK(energy_stationary(state(u, Field(g)), p, U, U) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("coupling vanishes on segregated states") {
    const Grid g = Grid::line(1.0, 31);
    const InitialData d = make_segregated_bumps(g, {Bump{{0.25, 0}, 0.2, 1}}, {Bump{{0.75, 0}, 0.2, 1}});
    const Trace z{0, 0};
    EnergyTracker tr(frozen(g, ReactionKind::logistic, 1e6, z, z), g);
    tr.on_start(initial_state(d));
    CHECK(tr.breakdown().coupling == 0);
    CHECK(mu_quantity(d, BoundarySchedule(z), BoundarySchedule(z), 100.0) == 0);
}

TEST_CASE("stationary tracker is the natural energy plus cross terms") {
    const Grid g = Grid::line(2.0, 31);
    const Trace psi{0.4, 0.0}, zeta{0.0, 0.6};
    const InitialData d = make_random_data(g, 3, psi, zeta);
    const Problem p = frozen(g, ReactionKind::logistic, 25.0, psi, zeta);
    EnergyTracker tr(p, g);
    StepperConfig cfg;
    cfg.dt = 0.01;
    SimState s = initial_state(d);
    tr.on_start(s);
    const Field U = harmonic_extension(psi, g), V = harmonic_extension(zeta, g);
    for (int i = 0; i < 10; ++i) {
        const SimState next = step(s, p, cfg);
        tr.on_step(s, next);
        s = next;
        const auto& b = tr.breakdown();
        CHECK(b.acc_work_u == 0);
        CHECK(b.acc_flux_u == 0);
        CHECK(b.acc_diss_u == 0);
        CHECK(b.coupling >= 0);
        CHECK(b.total() == doctest::Approx(energy_stationary(s, p, U, V) + b.cross_u + b.cross_v).epsilon(1e-12));
        CHECK(energy_auxiliary(b, s) == b.total());
    }
    SimState stale = s;
    stale.step_index += 1;
    CHECK_THROWS_AS(energy_auxiliary(tr.breakdown(), stale), PreconditionError);
    CHECK_THROWS_AS(energy_stationary(s, Problem{p.f, p.g, BoundarySchedule(psi, Trace{0.1, 0}, 1.0), p.zeta, 1.0}, U, V),
                    PreconditionError);
}

TEST_CASE("decaying tracker first step") {
    const Grid g = Grid::line(1.0, 15);
    const Trace psi{0.3, 0.3}, rho{0.2, -0.1};
    const BoundarySchedule su(psi, rho, 2.0), sv(Trace{0, 0});
    const Problem p{ReactionModel(ReactionKind::logistic), ReactionModel(ReactionKind::logistic), su, sv, 1.0};
    const InitialData d = make_random_data(g, 8, psi, Trace{0, 0});
    EnergyTracker tr(p, g);
    CHECK(tr.breakdown().epsilon == 0.5);
    StepperConfig cfg;
    cfg.dt = 0.01;
    const SimState s0 = initial_state(d);
    tr.on_start(s0);
    const SimState s1 = step(s0, p, cfg);
    tr.on_step(s0, s1);
    const LinearHeatReference ref(harmonic_extension(psi, g), su);
    const Field ut = s1.u - ref.at(s1.t);
    const double flux1 = boundary_pairing(g, normal_derivative(ut), su.rate(s1.t));
    CHECK(tr.breakdown().acc_flux_u == doctest::Approx(-0.5 * cfg.dt * flux1).epsilon(1e-12));
    const Field ut0 = s0.u - ref.at(0.0);
    const double rate = l2_norm(ut - ut0) / cfg.dt;
    CHECK(tr.breakdown().acc_diss_u == doctest::Approx(0.5 * cfg.dt * rate * rate).epsilon(1e-12));
    CHECK(tr.breakdown().acc_work_u ==
          doctest::Approx(cfg.dt * (grad_inner(ut0, ref.rate(0.0)) + grad_inner(ut, ref.rate(s1.t)))).epsilon(1e-12));
}

TEST_CASE("dissipation residual") {
    CHECK(dissipation_residual(2.0, 2.0, 0.1, 0, 0, 0) == 0);
    const double r1 = eigenmode_residual(4e-3), r2 = eigenmode_residual(2e-3), r3 = eigenmode_residual(1e-3);
    const double slope = (std::log(r1) - std::log(r3)) / (std::log(4e-3) - std::log(1e-3));
    CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
    CHECK(r2 < r1);
    CHECK(r3 < r2);
}

TEST_CASE("stationary energy is nonincreasing along a segregated run") {
    const Grid g = Grid::line(1.0, 63);
    const Trace z{0, 0};
    const InitialData d = make_segregated_bumps(g, {Bump{{0.25, 0}, 0.2, 1}}, {Bump{{0.75, 0}, 0.2, 1}});
    const Problem p = frozen(g, ReactionKind::logistic, 100.0, z, z);
    EnergyTracker tr(p, g);
    tr.record_steps(true);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.max_steps = 500;
    run_until(initial_state(d), p, cfg, &tr);
    const auto& e = tr.step_energies();
    REQUIRE(e.size() == 501);
    const double tol = 10 * cfg.dt * cfg.dt * std::max(1.0, std::abs(e.front()));
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] <= e[i - 1] + tol);
}

TEST_CASE("gronwall bound") {
    CHECK(gronwall_bound(1.5, 2.0, std::vector<double>(100, 0.0), 0.1) == 3.0);
    const double dt = 1e-4;
    std::vector<double> g;
    for (int i = 0; i < 400000; ++i) g.push_back(std::exp(-(i + 0.5) * dt));
    CHECK(gronwall_bound(1, 1, g, dt) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK_THROWS_AS(gronwall_bound(0, 1, g, dt), PreconditionError);

    // Saturating equality ODE: sqrt(Y) = sqrt(c1) + c2/2 * int g.
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> U(0.05, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double c1 = U(rng), c2 = U(rng), a = U(rng), b = U(rng);
        const double h = 0.01;
        std::vector<double> gs;
        double integral = 0, ymax = 0;
        for (int i = 0; i < 2000; ++i) {
            const double t = i * h;
            const double gv = a * std::exp(-b * t) * (1 + std::sin(3 * t) * std::sin(3 * t));
            gs.push_back(gv);
            const double y = std::pow(std::sqrt(c1) + 0.5 * c2 * integral, 2);
            ymax = std::max(ymax, y);
            integral += gv * h;
        }
        ymax = std::max(ymax, std::pow(std::sqrt(c1) + 0.5 * c2 * integral, 2));
        CHECK(ymax <= gronwall_bound(c1, c2, gs, h));
    }
}

TEST_CASE("mu quantity") {
    const Grid g = Grid::line(1.0, 31);
    InitialData half;
    half.u0 = Field(g, 0.0);
    half.v0 = Field(g, 0.0);
    for (auto k : g.interior_nodes()) half.u0[k] = half.v0[k] = 0.5;
    const Trace z{0, 0};
    CHECK(mu_quantity(half, BoundarySchedule(z), BoundarySchedule(z), 10.0) == doctest::Approx(g.measure() / 16));

    // Integral of |s'| is 2 s(2/gamma) = 8 / (e^2 gamma^2).
    const double gamma = 1.5;
    const Trace psi{0.2, 0.4}, rho{0.3, 0.1};
    const BoundarySchedule su(psi, rho, gamma);
    InitialData seg;
    seg.u0 = harmonic_extension(psi, g);
    seg.v0 = Field(g);
    const double expect = 8.0 / (std::exp(2.0) * gamma * gamma) * l2_norm(harmonic_extension(rho, g));
    CHECK(mu_quantity(seg, su, BoundarySchedule(z), 40.0) == doctest::Approx(expect).epsilon(1e-10));
    CHECK_THROWS_AS(mu_quantity(seg, su, BoundarySchedule(z), 5.0), PreconditionError);
}

TEST_CASE("uniform bound audit") {
    CHECK_THROWS_AS(h_bound_audit({{1, 2, 0, 0, 0}}), PreconditionError);
    const std::vector<AuditRow> flat{{1, 2.0, -1, 3, 0}, {10, 2.0, -1, 3, 0}, {100, 2.0, -1, 3, 0}};
    const AuditReport ok = h_bound_audit(flat);
    CHECK(ok.passed);
    CHECK(ok.slope == 0);
    CHECK(ok.mu_zero);
    const std::vector<AuditRow> growing{{1, 1.0, -1, 3, 0}, {10, 2.0, -1, 3, 0}, {100, 20.0, -1, 3, 0}};
    const AuditReport bad = h_bound_audit(growing);
    CHECK_FALSE(bad.passed);
    CHECK(bad.slope > 0);

    // With mu > 0 the bound R + kappa mu is enforced instead of the slope.
    const std::vector<AuditRow> withmu{{1, 1.1, 0, 0, 0.1}, {10, 1.5, 0, 0, 0.1}, {100, 3.0, 0, 0, 0.1}};
    const AuditReport m = h_bound_audit(withmu);
    CHECK(m.fitted_R == doctest::Approx(1.0));
    CHECK(m.violations == 0);
    CHECK(m.passed);

    std::ostringstream os;
    write_energy_audit_csv(os, ok);
    CHECK(os.str().rfind("kappa,max_h1,min_energy,max_energy,mu,fitted_R,slope,slope_ci\n", 0) == 0);
}

TEST_CASE("least squares recovers a line") {
    const LinearFit f = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.slope_se == doctest::Approx(0).scale(1));
}
