#include "segrelab/verify.hpp"
#include "segrelab/energy.hpp"
#include "segrelab/error.hpp"
#include "segrelab/evolve.hpp"
#include "segrelab/heatkernel.hpp"
#include "segrelab/steady.hpp"

#include <Eigen/SparseCore>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <random>

namespace segrelab {

bool VerifyResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"mesh", "model", "evolve", "energy", "steady", "heatkernel"};
    return names;
}

namespace {

using Checks = std::vector<CheckResult>;

void add(Checks& out, const std::string& suite, const std::string& name, bool ok, double value,
         const std::string& detail = "") {
    out.push_back({suite, name, ok, value, detail});
}

Field random_field(const Grid& g, std::mt19937_64& rng, bool zero_boundary = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = (zero_boundary && g.is_boundary(k)) ? 0.0 : u(rng);
    return f;
}

// -Delta_h as an explicit matrix on all nodes (boundary rows empty).
Eigen::SparseMatrix<double> explicit_laplacian(const Grid& g) {
    std::vector<Eigen::Triplet<double>> t;
    const double hx = g.spacing(0), hy = g.dim() == 2 ? g.spacing(1) : 0.0;
    for (std::size_t k : g.interior_nodes()) {
        const int i = static_cast<int>(k % g.nx()), j = static_cast<int>(k / g.nx());
        const int r = static_cast<int>(k);
        t.emplace_back(r, r, 2.0 / (hx * hx) + (g.dim() == 2 ? 2.0 / (hy * hy) : 0.0));
        t.emplace_back(r, static_cast<int>(g.index(i - 1, j)), -1.0 / (hx * hx));
        t.emplace_back(r, static_cast<int>(g.index(i + 1, j)), -1.0 / (hx * hx));
        if (g.dim() == 2) {
            t.emplace_back(r, static_cast<int>(g.index(i, j - 1)), -1.0 / (hy * hy));
            t.emplace_back(r, static_cast<int>(g.index(i, j + 1)), -1.0 / (hy * hy));
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(g.size()), static_cast<int>(g.size()));
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

void mesh_suite(Checks& out) {
    const std::string S = "mesh";
    std::mt19937_64 rng(11);
    {
        double worst = 0;
        for (const Grid& g : {Grid::line(1.0, 17), Grid::rect(1.0, 2.0, 7, 5)}) {
            const Field f = random_field(g, rng);
            const Eigen::Map<const Eigen::VectorXd> fv(f.values.data(), f.size());
            const Eigen::VectorXd ref = explicit_laplacian(g) * fv;
            const Field got = laplacian_apply(f);
            const double scale = ref.cwiseAbs().maxCoeff();
            for (std::size_t k = 0; k < f.size(); ++k) worst = std::max(worst, std::abs(got[k] - ref[k]) / scale);
        }
        add(out, S, "laplacian_matches_matrix", worst <= 1e-13, worst);
    }
    {
        double worst = 0;
        for (const Grid& g : {Grid::line(1.0, 31), Grid::rect(1.0, 1.5, 9, 11)}) {
            const EigenSystem es = eigensystem(g);
            for (std::size_t m = 0; m < 3; ++m) {
                const Field phi = es.mode(m);
                const Field lap = laplacian_apply(phi);
                double err = 0;
                for (std::size_t k = 0; k < phi.size(); ++k) err = std::max(err, std::abs(lap[k] - es.eigenvalues[m] * phi[k]));
                worst = std::max(worst, err / es.eigenvalues[m]);
            }
        }
        add(out, S, "eigen_identity", worst <= 1e-10, worst);
    }
    {
        const Grid g = Grid::rect(1.0, 1.0, 9, 9);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Trace tr(g.boundary_nodes().size());
        for (double& x : tr) x = u(rng);
        const Field H = harmonic_extension(tr, g);
        double lo = 1e300, hi = -1e300;
        for (std::size_t b = 0; b < tr.size(); ++b)
            if (!g.is_corner(g.boundary_nodes()[b])) lo = std::min(lo, tr[b]), hi = std::max(hi, tr[b]);
        bool ok = true;
        for (std::size_t k : g.interior_nodes()) ok = ok && H[k] >= lo - 1e-12 && H[k] <= hi + 1e-12;
        add(out, S, "harmonic_max_principle", ok, hi - lo);
    }
    {
        const Grid g = Grid::rect(1.0, 1.0, 7, 7);
        Field xy(g);
        for (std::size_t k = 0; k < g.size(); ++k) xy[k] = g.coord(k, 0) * g.coord(k, 1);
        const Field H = harmonic_extension(trace_of(xy), g);
        double err = 0;
        for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(H[k] - xy[k]));
        add(out, S, "bilinear_harmonic", err <= 1e-10, err);
    }
    {
        const Grid g = Grid::line(1.0, 15);
        const double a1 = poincare_constant(g);
        bool ok = true;
        double worst = 0;
        for (int r = 0; r < 100; ++r) {
            const Field W = random_field(g, rng, true);
            const double lhs = h1_semi_norm(W), rhs = l2_norm(laplacian_apply(W)) / std::sqrt(a1);
            worst = std::max(worst, lhs / rhs);
            ok = ok && lhs <= rhs * (1 + 1e-12);
        }
        add(out, S, "poincare_inequality", ok, worst);
    }
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
    const double c = 0.5 * (a + b);
    const double whole = (b - a) / 6 * (f(a) + 4 * f(c) + f(b));
    const double left = (c - a) / 6 * (f(a) + 4 * f(0.5 * (a + c)) + f(c));
    const double right = (b - c) / 6 * (f(c) + 4 * f(0.5 * (c + b)) + f(b));
    if (depth > 40 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return simpson(f, a, c, tol / 2, depth + 1) + simpson(f, c, b, tol / 2, depth + 1);
}

void model_suite(Checks& out) {
    const std::string S = "model";
    std::mt19937_64 rng(12);
    for (ReactionKind kind : {ReactionKind::logistic, ReactionKind::smooth_logistic}) {
        const ReactionModel m(kind);
        const std::string tag = to_string(kind);
        bool ok = m.value(1.0) == 0.0;
        for (int i = 0; i <= 500; ++i) {
            const double s = -2.0 + 5.0 * i / 500;
            if (s <= 0) ok = ok && m.value(s) == 0.0;
            if (s > 1) ok = ok && m.value(s) < 0.0;
        }
        add(out, S, "reaction_sign_" + tag, ok, 0);

        std::uniform_real_distribution<double> u2(0.0, 2.0);
        double worst = 0;
        for (int i = 0; i < 50; ++i) {
            const double s = u2(rng);
            const double q = simpson([&](double x) { return m.value(x); }, 0.0, s, 1e-13);
            worst = std::max(worst, std::abs(q - m.antiderivative(s)));
        }
        add(out, S, "antiderivative_quadrature_" + tag, worst <= 1e-10, worst);

        std::uniform_real_distribution<double> u1(0.0, 1.0);
        bool lip = true;
        for (int i = 0; i < 1000; ++i) {
            const double a = u1(rng), b = u1(rng);
            lip = lip && std::abs(m.value(a) - m.value(b)) <= m.lipschitz_bound() * std::abs(a - b) + 1e-15;
        }
        add(out, S, "lipschitz_bound_" + tag, lip, m.lipschitz_bound());
    }
    {
        const BoundarySchedule s({0.5, 0.2}, {0.1, 0.3}, 1.3);
        double worst = 0;
        const double d = 1e-4;
        for (double t : {0.3, 1.0, 2.5, 7.0}) {
            const auto p = s.at(t + d), m = s.at(t - d), r = s.rate(t), c = s.at(t), a = s.accel(t);
            for (std::size_t b = 0; b < 2; ++b) {
                worst = std::max(worst, std::abs((p[b] - m[b]) / (2 * d) - r[b]));
                worst = std::max(worst, std::abs((p[b] - 2 * c[b] + m[b]) / (d * d) - a[b]) * 1e-2);
            }
        }
        add(out, S, "boundary_derivatives_fd", worst <= 1e-6, worst);
    }
}

void evolve_suite(Checks& out) {
    const std::string S = "evolve";
    {
        bool ok = true;
        std::string detail;
        for (const Grid& g : {Grid::line(1.0, 31), Grid::rect(1.0, 1.0, 7, 7)})
            for (double kappa : {0.0, 1.0, 1e2, 1e4}) {
                std::mt19937_64 rng(static_cast<std::uint64_t>(kappa) + 3);
                std::uniform_real_distribution<double> u(0.0, 1.0);
                Trace psi(g.boundary_nodes().size()), zeta(psi.size());
                for (std::size_t b = 0; b < psi.size(); ++b) psi[b] = u(rng), zeta[b] = u(rng);
                const InitialData d = make_random_data(g, 7, psi, zeta);
                Problem p{ReactionModel(), ReactionModel(), BoundarySchedule(psi), BoundarySchedule(zeta), kappa};
                StepperConfig cfg;
                cfg.dt = 0.01;
                cfg.max_steps = 200;
                try {
                    run_until(initial_state(d), p, cfg);
                } catch (const InvariantViolation& e) {
                    ok = false;
                    detail = e.what();
                }
            }
        add(out, S, "invariant_region", ok, 0, detail);
    }
    {
        const Grid g = Grid::line(1.0, 31);
        const EigenSystem es = eigensystem(g);
        const Field phi = 0.5 * es.mode(0);
        Problem p{ReactionModel(ReactionKind::zero), ReactionModel(ReactionKind::zero), BoundarySchedule({0, 0}),
                  BoundarySchedule({0, 0}), 0.0};
        StepperConfig cfg;
        cfg.dt = 0.01;
        SimState s;
        s.u = phi;
        s.v = Field(g, 0.0);
        for (int n = 0; n < 50; ++n) s = step(s, p, cfg);
        const double f = std::pow(1.0 + es.eigenvalues[0] * cfg.dt, -50);
        const double err = linf_norm(s.u - f * phi);
        add(out, S, "eigenmode_recursion", err <= 1e-10, err);
    }
    {
        const Grid g = Grid::line(1.0, 31);
        const InitialData d = make_random_data(g, 5, {0.2, 0.9}, {0.7, 0.1});
        Problem p{ReactionModel(ReactionKind::logistic), ReactionModel(ReactionKind::smooth_logistic),
                  BoundarySchedule({0.2, 0.9}), BoundarySchedule({0.7, 0.1}), 50.0};
        Problem q{p.g, p.f, p.zeta, p.psi, p.kappa};
        StepperConfig cfg;
        cfg.dt = 0.01;
        SimState a = initial_state(d), b;
        b.u = d.v0;
        b.v = d.u0;
        for (int n = 0; n < 40; ++n) a = step(a, p, cfg), b = step(b, q, cfg);
        const bool ok = a.u.values == b.v.values && a.v.values == b.u.values;
        add(out, S, "swap_symmetry", ok, 0);
    }
    {
        const Grid g = Grid::line(1.0, 31);
        const BoundarySchedule sched({0.3, 0.6}, {0.5, -0.4}, 1.0);
        const Field U0 = harmonic_extension(sched.at(0), g);
        const LinearHeatReference ref(U0, sched);
        Problem p{ReactionModel(ReactionKind::zero), ReactionModel(ReactionKind::zero), sched, sched, 0.0};
        double errs[2];
        int idx = 0;
        for (double dt : {0.02, 0.01}) {
            StepperConfig cfg;
            cfg.dt = dt;
            SimState s;
            s.u = U0;
            s.v = U0;
            const int steps = static_cast<int>(std::lround(2.0 / dt));
            for (int n = 0; n < steps; ++n) s = step(s, p, cfg);
            errs[idx++] = l2_norm(s.u - ref.at(s.t));
        }
        const double ratio = errs[0] / errs[1];
        add(out, S, "linear_reference_first_order", ratio > 1.6 && ratio < 2.4, ratio);
    }
}

void energy_suite(Checks& out) {
    const std::string S = "energy";
    {
        const Grid g = Grid::line(16.0, 63);
        const InitialData d = make_segregated_bumps(g, {Bump{{0.0, 0.0}, 6.4, 1.0}}, {Bump{{16.0, 0.0}, 6.4, 1.0}});
        Problem p{ReactionModel(ReactionKind::zero), ReactionModel(ReactionKind::zero),
                  BoundarySchedule(trace_of(d.u0)), BoundarySchedule(trace_of(d.v0)), 100.0};
        EnergyTracker tr(p, g);
        tr.record_steps(true);
        StepperConfig cfg;
        cfg.dt = 0.01;
        cfg.max_steps = 100;
        run_until(initial_state(d), p, cfg, &tr);
        const auto& E = tr.step_energies();
        const double tol = 10 * cfg.dt * cfg.dt * std::max(1.0, std::abs(E.front()));
        double worst = -1e300;
        for (std::size_t n = 1; n < E.size(); ++n) worst = std::max(worst, E[n] - E[n - 1]);
        add(out, S, "energy_nonincreasing", worst <= tol, worst);
        add(out, S, "mu_zero_segregated", mu_quantity(d, p.psi, p.zeta, 1.0) == 0.0,
            mu_quantity(d, p.psi, p.zeta, 1.0));
    }
    {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> u(0.1, 3.0);
        bool ok = true;
        double worst = 0;
        for (int inst = 0; inst < 100; ++inst) {
            const double c1 = u(rng), c2 = u(rng), a = u(rng), b = u(rng);
            const double dt = 1e-3;
            std::vector<double> g;
            for (double t = 0; t < 20.0; t += dt) g.push_back(a * std::exp(-b * t));
            // sqrt(Y) = sqrt(c1) + c2/2 * int g: exact for the sampled sum.
            double root = std::sqrt(c1), ymax = c1;
            for (double x : g) {
                root += 0.5 * c2 * x * dt;
                ymax = std::max(ymax, root * root);
            }
            const double bound = gronwall_bound(c1, c2, g, dt);
            worst = std::max(worst, ymax / bound);
            ok = ok && ymax <= bound;
        }
        add(out, S, "gronwall_bound", ok, worst);
    }
}

void steady_suite(Checks& out) {
    const std::string S = "steady";
    {
        std::mt19937_64 rng(14);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        const Grid g = Grid::line(1.0, 7);
        Field a(g), b(g);
        for (std::size_t k = 0; k < g.size(); ++k) a[k] = u(rng), b[k] = u(rng);
        const ReactionModel f(ReactionKind::logistic), gg(ReactionKind::smooth_logistic);
        const double kappa = 30.0;
        const Eigen::MatrixXd J = Eigen::MatrixXd(stationary_jacobian(f, gg, kappa, a, b));
        const auto interior = g.interior_nodes();
        const std::size_t M = interior.size();
        double worst = 0;
        const double h = 1e-6;
        for (std::size_t c = 0; c < 2 * M; ++c) {
            Field ap = a, am = a, bp = b, bm = b;
            if (c < M) ap[interior[c]] += h, am[interior[c]] -= h;
            else bp[interior[c - M]] += h, bm[interior[c - M]] -= h;
            auto [rup, rvp] = stationary_residual(f, gg, kappa, ap, bp);
            auto [rum, rvm] = stationary_residual(f, gg, kappa, am, bm);
            for (std::size_t r = 0; r < M; ++r) {
                const double fu = (rup[interior[r]] - rum[interior[r]]) / (2 * h);
                const double fv = (rvp[interior[r]] - rvm[interior[r]]) / (2 * h);
                worst = std::max(worst, std::abs(fu - J(r, c)) / J.cwiseAbs().maxCoeff());
                worst = std::max(worst, std::abs(fv - J(M + r, c)) / J.cwiseAbs().maxCoeff());
            }
        }
        add(out, S, "jacobian_fd", worst <= 1e-6, worst);
    }
    {
        const Grid g = Grid::line(1.0, 31);
        const Field phi = 0.5 * eigensystem(g).mode(0);
        const double vi = variational_inequality_residual(phi, ReactionModel(ReactionKind::zero));
        add(out, S, "vi_detector", vi > 0, vi);
        add(out, S, "vi_zero_state", variational_inequality_residual(Field(g, 0.0), ReactionModel()) == 0.0, 0);
    }
    {
        const Grid g = Grid::line(1.0, 63);
        Field x(g);
        for (std::size_t k = 0; k < g.size(); ++k) x[k] = g.coord(k, 0);
        const double r = morrey_check(x);
        add(out, S, "morrey_linear", std::abs(r - 0.25) <= 1e-12, r);
    }
    {
        const Grid g = Grid::rect(1.0, 1.0, 7, 7);
        Field xy(g);
        for (std::size_t k = 0; k < g.size(); ++k) xy[k] = 0.5 * g.coord(k, 0) * g.coord(k, 1);
        const Trace tr = trace_of(xy);
        const ReactionModel z(ReactionKind::zero);
        const StationaryPair p = solve_stationary(z, z, 0.0, tr, tr, Field(g, 0.0), Field(g, 0.0), 1e-9);
        double err = 0;
        for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(p.u_hat[k] - xy[k]));
        add(out, S, "newton_linear_harmonic", err <= 1e-10 && p.iterations == 1, err);
    }
}

void heatkernel_suite(Checks& out) {
    const std::string S = "heatkernel";
    const EigenSystem es = eigensystem(Grid::line(1.0, 63));
    const auto tg = log_spaced(1e-6, 10.0, 200);
    for (double alpha : {0.3, 0.5, 0.9}) {
        const DecayCertificate c = certify_decay(es, alpha, es.lambda_min() / 2, tg);
        const bool ok = c.max_violation <= 0 && std::isfinite(decay_integral(c));
        add(out, S, "decay_certificate_alpha_" + format_double(alpha), ok, c.max_violation);
    }
}

} // namespace

VerifyResult run_verify(const std::string& suite) {
    static const std::map<std::string, std::function<void(Checks&)>> table{
        {"mesh", mesh_suite},     {"model", model_suite},   {"evolve", evolve_suite},
        {"energy", energy_suite}, {"steady", steady_suite}, {"heatkernel", heatkernel_suite}};
    VerifyResult r;
    if (!suite.empty() && !table.count(suite)) throw PreconditionError("unknown verify suite: " + suite);
    for (const auto& name : verify_suites()) {
        if (!suite.empty() && name != suite) continue;
        try {
            table.at(name)(r.checks);
        } catch (const std::exception& e) {
            r.checks.push_back({name, "suite_error", false, 0, e.what()});
        }
    }
    return r;
}

void write_verify_jsonl(std::ostream& os, const VerifyResult& r) {
    int passed = 0, failed = 0;
    for (const auto& c : r.checks) {
        nlohmann::ordered_json j;
        j["suite"] = c.suite;
        j["check"] = c.check;
        j["passed"] = c.passed;
        j["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(nullptr);
        if (!c.detail.empty()) j["detail"] = c.detail;
        os << j.dump() << '\n';
        (c.passed ? passed : failed)++;
    }
    std::vector<std::string> failures;
    for (const auto& c : r.checks)
        if (!c.passed) failures.push_back(c.suite + "." + c.check);
    nlohmann::ordered_json s;
    s["summary"] = true;
    s["passed"] = passed;
    s["failed"] = failed;
    s["failures"] = failures;
    os << s.dump() << '\n';
}

} // namespace segrelab
