#include "segrelab/evolve.hpp"
#include "segrelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace segrelab {

SimState initial_state(const InitialData& d) {
    SimState s;
    s.u = d.u0;
    s.v = d.v0;
    return s;
}

void StepperConfig::validate(double lipschitz) const {
    if (!(dt > 0) || !std::isfinite(dt)) throw PreconditionError("dt must be positive");
    if (dt * lipschitz > 1.0) throw PreconditionError("dt * L must not exceed 1");
    if (max_steps < 0) throw PreconditionError("max_steps must be nonnegative");
    if (!(invariant_tolerance >= 0)) throw PreconditionError("invariant tolerance must be nonnegative");
    if (!(threshold >= 0)) throw PreconditionError("threshold must be nonnegative");
    if (window < 1) throw PreconditionError("window must be at least 1");
    if (sample_stride < 1) throw PreconditionError("sample_stride must be at least 1");
    if (state_stride < 0) throw PreconditionError("state_stride must be nonnegative");
    if (!(horizon > 0)) throw PreconditionError("horizon must be positive");
}

namespace {
void check_invariant(const Field& f, double tol, const char* name, double t) {
    for (double x : f.values) {
        if (!std::isfinite(x)) throw Error(std::string("divergence: non-finite ") + name + " at t=" + format_double(t));
        if (x < -tol || x > 1.0 + tol)
            throw InvariantViolation(std::string(name) + " left the invariant region: value " + format_double(x) +
                                     " at t=" + format_double(t));
    }
}

void implicit_update(const Field& w, const Field& other, const ReactionModel& r, double kappa, double dt,
                     double tol, Field& out) {
    const Grid& g = w.grid;
    const std::size_t N = g.size();
    std::vector<double> shift(N, 0.0), rhs(N, 0.0);
    const double idt = 1.0 / dt;
    for (std::size_t k = 0; k < N; ++k) {
        shift[k] = idt + kappa * other[k] * other[k];
        rhs[k] = w[k] * idt + r.value(w[k]);
    }
    solve_shifted(g, shift, rhs, out.values, tol);
}
} // namespace

SimState step(const SimState& s, const Problem& p, const StepperConfig& cfg) {
    if (!(p.kappa >= 0)) throw PreconditionError("kappa must be nonnegative");
    SimState n;
    n.t = s.t + cfg.dt;
    n.step_index = s.step_index + 1;
    n.dt_last = cfg.dt;
    n.u = s.u;
    n.v = s.v;
    set_trace(n.u, p.psi.at(n.t));
    set_trace(n.v, p.zeta.at(n.t));
    implicit_update(s.u, s.v, p.f, p.kappa, cfg.dt, cfg.solve_tolerance, n.u);
    implicit_update(s.v, s.u, p.g, p.kappa, cfg.dt, cfg.solve_tolerance, n.v);
    const double tol = cfg.check_invariant ? cfg.invariant_tolerance : std::numeric_limits<double>::infinity();
    check_invariant(n.u, tol, "u", n.t);
    check_invariant(n.v, tol, "v", n.t);
    return n;
}

DerivativeNorms time_derivative_estimate(const SimState& prev, const SimState& next) {
    const double dt = next.t - prev.t;
    if (!(dt > 0)) throw PreconditionError("time_derivative_estimate: zero or negative dt");
    return {l2_norm(next.u - prev.u) / dt, l2_norm(next.v - prev.v) / dt};
}

std::pair<Field, Field> homogenize(const SimState& s, const Field& U, const Field& V) {
    Field a = s.u - U, b = s.v - V;
    for (std::size_t k : a.grid.boundary_nodes())
        if (std::abs(a[k]) > 1e-12 || std::abs(b[k]) > 1e-12)
            throw PreconditionError("homogenize: boundary mismatch above 1e-12");
    return {std::move(a), std::move(b)};
}

std::string to_string(RunStatus s) {
    switch (s) {
    case RunStatus::stabilized: return "stabilized";
    case RunStatus::horizon_reached: return "horizon_reached";
    case RunStatus::budget_exhausted: return "budget_exhausted";
    }
    return "?";
}

double overlap_l2sq(const Field& u, const Field& v) {
    double s = 0;
    for (std::size_t k : u.grid.interior_nodes()) {
        const double w = u[k] * v[k];
        s += w * w;
    }
    return s * u.grid.weight();
}

double pair_h_norm(const Field& u, const Field& v) {
    const double a = h1_norm(u), b = h1_norm(v);
    return std::sqrt(a * a + b * b);
}

namespace {
SampleRow make_row(const SimState& s, const DerivativeNorms& d, double kappa, const StepObserver* obs) {
    SampleRow r;
    r.step = s.step_index;
    r.t = s.t;
    r.energy = obs ? obs->energy() : std::numeric_limits<double>::quiet_NaN();
    r.overlap_l2sq = overlap_l2sq(s.u, s.v);
    r.ku2v2 = kappa * r.overlap_l2sq;
    r.du_norm = d.du;
    r.dv_norm = d.dv;
    r.u_h1 = h1_norm(s.u);
    r.v_h1 = h1_norm(s.v);
    auto [umin, umax] = std::minmax_element(s.u.values.begin(), s.u.values.end());
    auto [vmin, vmax] = std::minmax_element(s.v.values.begin(), s.v.values.end());
    r.u_min = *umin;
    r.u_max = *umax;
    r.v_min = *vmin;
    r.v_max = *vmax;
    return r;
}
} // namespace

Trajectory run_until(const SimState& s0, const Problem& p, const StepperConfig& cfg, StepObserver* obs) {
    cfg.validate(std::max(p.f.lipschitz_bound(), p.g.lipschitz_bound()));
    Trajectory traj;
    traj.kappa = p.kappa;
    if (obs) obs->on_start(s0);
    traj.samples.push_back(make_row(s0, {}, p.kappa, obs));
    traj.states.push_back(s0);

    SimState cur = s0;
    DerivativeIntegral integral;
    int below = 0;
    long steps = 0;
    const double t_end = cfg.horizon - 1e-9 * cfg.dt;
    while (true) {
        if (steps >= cfg.max_steps) {
            traj.status = RunStatus::budget_exhausted;
            break;
        }
        SimState next = step(cur, p, cfg);
        ++steps;
        const DerivativeNorms d = time_derivative_estimate(cur, next);
        integral.add(d, cfg.dt);
        if (obs) obs->on_step(cur, next);
        cur = std::move(next);

        bool stop = false;
        RunStatus status = RunStatus::budget_exhausted;
        const bool sampled = steps % cfg.sample_stride == 0;
        if (sampled && cfg.threshold > 0) {
            below = (d.du < cfg.threshold && d.dv < cfg.threshold) ? below + 1 : 0;
            if (below >= cfg.window) stop = true, status = RunStatus::stabilized;
        }
        if (!stop && cur.t >= t_end) stop = true, status = RunStatus::horizon_reached;
        if (!stop && steps >= cfg.max_steps) stop = true, status = RunStatus::budget_exhausted;

        if (sampled || stop) traj.samples.push_back(make_row(cur, d, p.kappa, obs));
        if ((cfg.state_stride > 0 && steps % cfg.state_stride == 0) || stop) {
            if (traj.states.back().step_index != cur.step_index) traj.states.push_back(cur);
        }
        if (stop) {
            traj.status = status;
            break;
        }
    }
    traj.final_state = cur;
    traj.derivative_integral = integral.value();
    return traj;
}

void write_timeseries_csv(std::ostream& os, const Trajectory& traj) {
    os << "step,t,energy,overlap_l2sq,ku2v2,du_norm,dv_norm,u_h1,v_h1,u_min,u_max,v_min,v_max\n";
    for (const SampleRow& r : traj.samples) {
        os << r.step;
        for (double x : {r.t, r.energy, r.overlap_l2sq, r.ku2v2, r.du_norm, r.dv_norm, r.u_h1, r.v_h1, r.u_min,
                         r.u_max, r.v_min, r.v_max})
            os << ',' << format_double(x);
        os << '\n';
    }
}

std::vector<std::pair<double, double>> quasi_periodicity(const Trajectory& traj, int taus) {
    std::vector<std::pair<double, double>> out;
    const auto& st = traj.states;
    for (std::size_t i = 0; i < st.size(); ++i) {
        double sup = 0;
        for (std::size_t j = i + 1; j < st.size() && j <= i + static_cast<std::size_t>(taus); ++j)
            sup = std::max(sup, pair_h_norm(st[j].u - st[i].u, st[j].v - st[i].v));
        out.push_back({st[i].t, sup});
    }
    return out;
}

} // namespace segrelab
