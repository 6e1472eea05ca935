#include "segrelab/steady.hpp"
#include "segrelab/error.hpp"

#include <Eigen/SparseLU>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace segrelab {

std::pair<Field, Field> stationary_residual(const ReactionModel& f, const ReactionModel& g, double kappa,
                                            const Field& u, const Field& v) {
    Field ru(u.grid, 0.0), rv(u.grid, 0.0);
    apply_neg_laplacian(u.grid, u.values.data(), ru.values.data());
    apply_neg_laplacian(u.grid, v.values.data(), rv.values.data());
    for (std::size_t k : u.grid.interior_nodes()) {
        ru[k] += -f.value(u[k]) + kappa * u[k] * v[k] * v[k];
        rv[k] += -g.value(v[k]) + kappa * v[k] * u[k] * u[k];
    }
    return {std::move(ru), std::move(rv)};
}

Eigen::SparseMatrix<double> stationary_jacobian(const ReactionModel& f, const ReactionModel& g, double kappa,
                                                const Field& u, const Field& v) {
    const Grid& gr = u.grid;
    const auto interior = gr.interior_nodes();
    const int M = static_cast<int>(interior.size());
    std::vector<int> pos(gr.size(), -1);
    for (int m = 0; m < M; ++m) pos[interior[m]] = m;
    const double ihx = 1.0 / (gr.spacing(0) * gr.spacing(0));
    const double ihy = gr.dim() == 2 ? 1.0 / (gr.spacing(1) * gr.spacing(1)) : 0.0;
    const long nx = gr.nx();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(M) * 12);
    for (int m = 0; m < M; ++m) {
        const std::size_t k = interior[m];
        const double uk = u[k], vk = v[k];
        const double diag = 2.0 * ihx + 2.0 * ihy;
        trip.emplace_back(m, m, diag + kappa * vk * vk - f.derivative(uk));
        trip.emplace_back(M + m, M + m, diag + kappa * uk * uk - g.derivative(vk));
        trip.emplace_back(m, M + m, 2.0 * kappa * uk * vk);
        trip.emplace_back(M + m, m, 2.0 * kappa * uk * vk);
        auto couple = [&](long nb, double w) {
            const int q = pos[static_cast<std::size_t>(nb)];
            if (q < 0) return;
            trip.emplace_back(m, q, -w);
            trip.emplace_back(M + m, M + q, -w);
        };
        couple(static_cast<long>(k) - 1, ihx);
        couple(static_cast<long>(k) + 1, ihx);
        if (gr.dim() == 2) {
            couple(static_cast<long>(k) - nx, ihy);
            couple(static_cast<long>(k) + nx, ihy);
        }
    }
    Eigen::SparseMatrix<double> J(2 * M, 2 * M);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

namespace {
struct ResidualInfo {
    double linf_u = 0, linf_v = 0, l2 = 0;
    double linf() const { return std::max(linf_u, linf_v); }
};

ResidualInfo measure(const ReactionModel& f, const ReactionModel& g, double kappa, const Field& u, const Field& v,
                     Field* ru_out = nullptr, Field* rv_out = nullptr) {
    auto [ru, rv] = stationary_residual(f, g, kappa, u, v);
    ResidualInfo r;
    double s = 0;
    for (std::size_t k : u.grid.interior_nodes()) {
        r.linf_u = std::max(r.linf_u, std::abs(ru[k]));
        r.linf_v = std::max(r.linf_v, std::abs(rv[k]));
        s += ru[k] * ru[k] + rv[k] * rv[k];
    }
    r.l2 = std::sqrt(s);
    if (!std::isfinite(r.l2)) r.linf_u = r.linf_v = r.l2 = std::numeric_limits<double>::infinity();
    if (ru_out) *ru_out = std::move(ru);
    if (rv_out) *rv_out = std::move(rv);
    return r;
}

// Returns true when tol was reached; false on stagnation or iteration cap.
bool newton(const ReactionModel& f, const ReactionModel& g, double kappa, Field& u, Field& v, double tol,
            const NewtonOptions& opt, StationaryPair& out) {
    const auto interior = u.grid.interior_nodes();
    const std::size_t M = interior.size();
    Field ru, rv;
    ResidualInfo r = measure(f, g, kappa, u, v, &ru, &rv);
    out.residual_history.push_back(r.linf());
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (r.linf() <= tol) return true;
        Eigen::SparseMatrix<double> J = stationary_jacobian(f, g, kappa, u, v);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) return false;
        Eigen::VectorXd rhs(2 * M);
        for (std::size_t m = 0; m < M; ++m) {
            rhs[m] = -ru[interior[m]];
            rhs[M + m] = -rv[interior[m]];
        }
        Eigen::VectorXd d = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !d.allFinite()) return false;
        ++out.iterations;
        double lambda = 1.0;
        bool accepted = false;
        for (int hv = 0; hv <= opt.max_halvings; ++hv, lambda *= 0.5) {
            Field ut = u, vt = v;
            for (std::size_t m = 0; m < M; ++m) {
                ut[interior[m]] += lambda * d[m];
                vt[interior[m]] += lambda * d[M + m];
            }
            Field rut, rvt;
            ResidualInfo rt = measure(f, g, kappa, ut, vt, &rut, &rvt);
            if (rt.l2 < r.l2 || rt.linf() <= tol) {
                u = std::move(ut);
                v = std::move(vt);
                ru = std::move(rut);
                rv = std::move(rvt);
                r = rt;
                accepted = true;
                break;
            }
        }
        out.residual_history.push_back(r.linf());
        if (!accepted) return false;
    }
    return r.linf() <= tol;
}

void clamp_unit(Field& f) {
    for (double& x : f.values) x = std::clamp(x, 0.0, 1.0);
}
} // namespace

StationaryPair solve_stationary(const ReactionModel& f, const ReactionModel& g, double kappa, const Trace& psi,
                                const Trace& zeta, const Field& u_guess, const Field& v_guess, double tol,
                                const NewtonOptions& opt) {
    if (!(tol > 0)) throw PreconditionError("solve_stationary: tol must be positive");
    if (!(kappa >= 0)) throw PreconditionError("solve_stationary: kappa must be nonnegative");
    if (u_guess.grid != v_guess.grid) throw PreconditionError("solve_stationary: guesses on different grids");
    StationaryPair out;
    Field u = u_guess, v = v_guess;
    set_trace(u, psi);
    set_trace(v, zeta);

    bool ok = newton(f, g, kappa, u, v, tol, opt, out);
    if (!ok) {
        // Pseudo-time fallback along the parabolic flow from the (clamped) guess.
        out.method = "pseudo_time";
        u = u_guess;
        v = v_guess;
        set_trace(u, psi);
        set_trace(v, zeta);
        clamp_unit(u);
        clamp_unit(v);
        Problem p{f, g, BoundarySchedule(psi), BoundarySchedule(zeta), kappa};
        StepperConfig cfg;
        cfg.dt = std::min(opt.pseudo_dt, 1.0 / std::max({f.lipschitz_bound(), g.lipschitz_bound(), 1e-300}));
        SimState s;
        s.u = u;
        s.v = v;
        ResidualInfo r = measure(f, g, kappa, s.u, s.v);
        long steps = 0;
        while (steps < opt.pseudo_max_steps) {
            for (int k = 0; k < 50; ++k) s = step(s, p, cfg);
            steps += 50;
            r = measure(f, g, kappa, s.u, s.v);
            if (r.linf() <= tol) break;
            if (r.linf() <= opt.handoff) {
                Field pu = s.u, pv = s.v;
                StationaryPair polish;
                if (newton(f, g, kappa, pu, pv, tol, opt, polish)) {
                    s.u = std::move(pu);
                    s.v = std::move(pv);
                    out.residual_history.insert(out.residual_history.end(), polish.residual_history.begin(),
                                                polish.residual_history.end());
                    out.iterations += polish.iterations;
                    r = measure(f, g, kappa, s.u, s.v);
                    break;
                }
            }
        }
        out.iterations += static_cast<int>(steps);
        u = std::move(s.u);
        v = std::move(s.v);
        if (r.linf() > tol) throw SolveError("solve_stationary: Newton and pseudo-time both missed tol", r.linf());
    }
    ResidualInfo r = measure(f, g, kappa, u, v);
    out.residual_u = r.linf_u;
    out.residual_v = r.linf_v;
    out.u_hat = std::move(u);
    out.v_hat = std::move(v);
    return out;
}

StabilizationReport stabilization_detect(const Trajectory& traj, const StationaryPair& pair, double tol) {
    if (traj.status != RunStatus::stabilized) throw PreconditionError("stabilization_detect: trajectory not stabilized");
    const Field du = traj.final_state.u - pair.u_hat, dv = traj.final_state.v - pair.v_hat;
    StabilizationReport rep;
    rep.h_distance = pair_h_norm(du, dv);
    rep.l2 = std::hypot(l2_norm(du), l2_norm(dv));
    const double a = lp_norm(du, 4), b = lp_norm(dv, 4);
    rep.l4 = std::pow(std::pow(a, 4) + std::pow(b, 4), 0.25);
    rep.linf = std::max(linf_norm(du), linf_norm(dv));
    rep.success = rep.h_distance <= tol;
    return rep;
}

double variational_inequality_residual(const Field& u, const ReactionModel& f) {
    Field lap(u.grid, 0.0);
    apply_neg_laplacian(u.grid, u.values.data(), lap.values.data());
    double m = 0;
    for (std::size_t k : u.grid.interior_nodes()) m = std::max(m, lap[k] - f.value(u[k]));
    return m;
}

double morrey_check(const Field& u) {
    if (u.grid.dim() != 1) throw PreconditionError("morrey_check: 1D fields only");
    const double grad = h1_semi_norm(u);
    if (grad == 0) return 0.0;
    const double h = u.grid.spacing(0);
    const std::size_t N = u.size();
    double best = 0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
            const double r = std::abs(u[i] - u[j]) / std::sqrt((j - i) * h);
            best = std::max(best, r);
        }
    return best / (4.0 * grad);
}

LimitCertificate certify_limit(const StationaryPair& pair, const ReactionModel& f, const ReactionModel& g, double kappa) {
    LimitCertificate c;
    c.kappa = kappa;
    c.residual_u = pair.residual_u;
    c.residual_v = pair.residual_v;
    c.overlap = overlap_l2sq(pair.u_hat, pair.v_hat);
    c.kappa_overlap = kappa * c.overlap;
    c.vi_u = variational_inequality_residual(pair.u_hat, f);
    c.vi_v = variational_inequality_residual(pair.v_hat, g);
    c.holder_ratio = pair.u_hat.grid.dim() == 1 ? std::max(morrey_check(pair.u_hat), morrey_check(pair.v_hat))
                                                : std::numeric_limits<double>::quiet_NaN();
    c.method = pair.method;
    c.iterations = pair.iterations;
    return c;
}

std::string certificate_json(const LimitCertificate& c) {
    nlohmann::ordered_json j;
    j["kappa"] = c.kappa;
    j["residual_u"] = c.residual_u;
    j["residual_v"] = c.residual_v;
    j["overlap"] = c.overlap;
    j["kappa_overlap"] = c.kappa_overlap;
    j["vi_u"] = c.vi_u;
    j["vi_v"] = c.vi_v;
    if (std::isfinite(c.holder_ratio)) j["holder_ratio"] = c.holder_ratio;
    else j["holder_ratio"] = nullptr;
    j["method"] = c.method;
    j["iterations"] = c.iterations;
    return j.dump();
}

} // namespace segrelab
