#include "segrelab/energy.hpp"
#include "segrelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace segrelab {

double EnergyBreakdown::total() const {
    return grad_u + grad_v + pot_u + pot_v + coupling + cross_u + cross_v + acc_work_u + acc_work_v + acc_flux_u +
           acc_flux_v + acc_diss_u + acc_diss_v;
}

namespace {
double potential(const Field& u, const ReactionModel& r) {
    double s = 0;
    for (std::size_t k : u.grid.interior_nodes()) s += r.antiderivative(u[k]);
    return -s * u.grid.weight();
}
} // namespace

double energy_stationary(const SimState& s, const Problem& p, const Field& U_inf, const Field& V_inf) {
    if (p.psi.mode() != BoundaryMode::stationary || p.zeta.mode() != BoundaryMode::stationary)
        throw PreconditionError("energy_stationary needs frozen boundary data");
    const Field ut = s.u - U_inf, vt = s.v - V_inf;
    return 0.5 * grad_inner(ut, ut) + 0.5 * grad_inner(vt, vt) + potential(s.u, p.f) + potential(s.v, p.g) +
           0.5 * p.kappa * overlap_l2sq(s.u, s.v);
}

double energy_auxiliary(const EnergyBreakdown& b, const SimState& s) {
    if (b.step != s.step_index) throw PreconditionError("stale energy accumulators: step counter mismatch");
    return b.total();
}

double default_epsilon(BoundaryMode mode) { return mode == BoundaryMode::decaying ? 0.5 : 0.0; }

EnergyTracker::EnergyTracker(const Problem& p, const Grid& g)
    : EnergyTracker(p, g, default_epsilon(p.psi.mode() == BoundaryMode::decaying || p.zeta.mode() == BoundaryMode::decaying
                                              ? BoundaryMode::decaying
                                              : BoundaryMode::stationary)) {}

EnergyTracker::EnergyTracker(const Problem& p, const Grid& g, double epsilon)
    : problem_(p), grid_(g), epsilon_(epsilon) {
    if (!(epsilon >= 0 && epsilon < 1)) throw PreconditionError("epsilon must lie in [0,1)");
    frozen_ = p.psi.mode() == BoundaryMode::stationary && p.zeta.mode() == BoundaryMode::stationary;
    U_inf_ = harmonic_extension(p.psi.psi_inf(), g);
    V_inf_ = harmonic_extension(p.zeta.psi_inf(), g);
    if (!frozen_) {
        ref_u_ = std::make_unique<LinearHeatReference>(harmonic_extension(p.psi.at(0.0), g), p.psi);
        ref_v_ = std::make_unique<LinearHeatReference>(harmonic_extension(p.zeta.at(0.0), g), p.zeta);
    }
    current_.epsilon = epsilon;
}

EnergyTracker::Local EnergyTracker::evaluate(const SimState& s, EnergyBreakdown& b) const {
    Local loc;
    Field U = frozen_ ? U_inf_ : ref_u_->at(s.t);
    Field V = frozen_ ? V_inf_ : ref_v_->at(s.t);
    loc.ut = s.u - U;
    loc.vt = s.v - V;
    b.grad_u = 0.5 * grad_inner(loc.ut, loc.ut);
    b.grad_v = 0.5 * grad_inner(loc.vt, loc.vt);
    b.pot_u = potential(s.u, problem_.f);
    b.pot_v = potential(s.v, problem_.g);
    b.coupling = 0.5 * problem_.kappa * overlap_l2sq(s.u, s.v);
    b.cross_u = -grad_inner(U, loc.ut);
    b.cross_v = -grad_inner(V, loc.vt);
    if (!frozen_) {
        const Field Ut = ref_u_->rate(s.t), Vt = ref_v_->rate(s.t);
        loc.work_u = grad_inner(loc.ut, Ut);
        loc.work_v = grad_inner(loc.vt, Vt);
        loc.flux_u = boundary_pairing(grid_, normal_derivative(loc.ut), problem_.psi.rate(s.t));
        loc.flux_v = boundary_pairing(grid_, normal_derivative(loc.vt), problem_.zeta.rate(s.t));
    }
    return loc;
}

void EnergyTracker::on_start(const SimState& s0) {
    current_ = EnergyBreakdown{};
    current_.epsilon = epsilon_;
    current_.step = s0.step_index;
    local_ = evaluate(s0, current_);
    last_rates_ = {};
    energies_.clear();
    rates_.clear();
    if (record_) energies_.push_back(current_.total());
}

void EnergyTracker::on_step(const SimState& prev, const SimState& next) {
    if (prev.step_index != current_.step) throw PreconditionError("stale energy accumulators: step counter mismatch");
    const double dt = next.t - prev.t;
    EnergyBreakdown b = current_;
    Local loc = evaluate(next, b);
    last_rates_ = {l2_norm(loc.ut - local_.ut) / dt, l2_norm(loc.vt - local_.vt) / dt};
    b.acc_work_u += dt * (local_.work_u + loc.work_u);
    b.acc_work_v += dt * (local_.work_v + loc.work_v);
    b.acc_flux_u -= 0.5 * dt * (local_.flux_u + loc.flux_u);
    b.acc_flux_v -= 0.5 * dt * (local_.flux_v + loc.flux_v);
    b.acc_diss_u += epsilon_ * dt * last_rates_.du * last_rates_.du;
    b.acc_diss_v += epsilon_ * dt * last_rates_.dv * last_rates_.dv;
    b.step = next.step_index;
    current_ = b;
    local_ = std::move(loc);
    if (record_) {
        energies_.push_back(current_.total());
        rates_.push_back(last_rates_);
    }
}

double dissipation_residual(double L0, double L1, double dt, double du, double dv, double epsilon) {
    return (L1 - L0) / dt + (1.0 - epsilon) * (du * du + dv * dv);
}

double gronwall_bound(double c1, double c2, const std::vector<double>& g, double dt) {
    if (!(c1 > 0) || !(c2 > 0) || !(dt > 0)) throw PreconditionError("gronwall_bound: c1, c2, dt must be positive");
    double s = 0;
    for (double x : g) {
        if (!(x >= 0)) throw PreconditionError("gronwall_bound: negative sample");
        s += x * dt;
    }
    return 2.0 * c1 + c2 * c2 * s * s;
}

namespace {
// Integral of |s'| over [a,b] by composite 5-point Gauss-Legendre.
double integrate_abs_rate(double a, double b, double gamma, int panels) {
    static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    const double h = (b - a) / panels;
    double s = 0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int q = 0; q < 5; ++q) s += w[q] * std::abs(BoundarySchedule::transient_rate(mid + 0.5 * h * x[q], gamma));
    }
    return 0.5 * h * s;
}

double velocity_l1(const BoundarySchedule& sched, const Grid& g, double horizon) {
    if (sched.mode() == BoundaryMode::stationary) return 0.0;
    const double norm = l2_norm(harmonic_extension(sched.rho(), g));
    if (norm == 0) return 0.0;
    const double gamma = sched.gamma();
    const double peak = 2.0 / gamma;   // s' changes sign here
    if (horizon <= peak) throw PreconditionError("mu_quantity: horizon shorter than the transient peak");
    // For t past the peak s decreases, so the neglected tail is exactly s(horizon).
    const double tail = BoundarySchedule::transient(horizon, gamma) * norm;
    if (tail > 1e-10) throw PreconditionError("mu_quantity: horizon insufficient, tail " + format_double(tail));
    return norm * (integrate_abs_rate(0.0, peak, gamma, 400) + integrate_abs_rate(peak, horizon, gamma, 2000));
}
} // namespace

double mu_quantity(const InitialData& init, const BoundarySchedule& su, const BoundarySchedule& sv, double horizon) {
    const Grid& g = init.u0.grid;
    return overlap_l2sq(init.u0, init.v0) + velocity_l1(su, g, horizon) + velocity_l1(sv, g, horizon);
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw PreconditionError("least_squares: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double sse = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            sse += r * r;
        }
        f.slope_se = std::sqrt(sse / (n - 2) / sxx);
    }
    return f;
}

namespace {
double t_quantile_975(std::size_t dof) {
    static const double table[] = {0, 12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
    if (dof == 0) return std::numeric_limits<double>::infinity();
    return dof <= 10 ? table[dof] : 1.96;
}
} // namespace

AuditReport h_bound_audit(const std::vector<AuditRow>& rows, double tol) {
    if (rows.size() < 3) throw PreconditionError("h_bound_audit: insufficient kappa samples (need 3)");
    AuditReport rep;
    rep.rows = rows;
    std::sort(rep.rows.begin(), rep.rows.end(), [](const AuditRow& a, const AuditRow& b) { return a.kappa < b.kappa; });
    std::vector<double> k, h, e;
    for (const AuditRow& r : rep.rows) {
        if (!std::isfinite(r.max_h1) || !(r.mu >= 0)) throw PreconditionError("h_bound_audit: inconsistent trajectory metadata");
        k.push_back(r.kappa);
        h.push_back(r.max_h1);
        e.push_back(r.min_energy);
        if (r.mu > 0) rep.mu_zero = false;
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / v.size();
    };
    const LinearFit fh = least_squares(k, h);
    const double mh = mean(h);
    rep.slope = mh != 0 ? fh.slope / mh : fh.slope;
    rep.slope_ci = t_quantile_975(k.size() - 2) * (mh != 0 ? fh.slope_se / std::abs(mh) : fh.slope_se);
    const LinearFit fe = least_squares(k, e);
    const double me = mean(e);
    rep.energy_slope = me != 0 ? fe.slope / std::abs(me) : fe.slope;

    const AuditRow& base = rep.rows.front();
    rep.fitted_R = base.max_h1 - base.kappa * base.mu;
    for (const AuditRow& r : rep.rows)
        if (r.max_h1 > rep.fitted_R + r.kappa * r.mu + 1e-12 * std::abs(rep.fitted_R)) ++rep.violations;
    if (rep.mu_zero)
        rep.passed = std::abs(rep.slope) <= tol && std::abs(rep.energy_slope) <= tol;
    else
        rep.passed = rep.violations == 0;
    return rep;
}

void write_energy_audit_csv(std::ostream& os, const AuditReport& rep) {
    os << "kappa,max_h1,min_energy,max_energy,mu,fitted_R,slope,slope_ci\n";
    for (const AuditRow& r : rep.rows)
        os << format_double(r.kappa) << ',' << format_double(r.max_h1) << ',' << format_double(r.min_energy) << ','
           << format_double(r.max_energy) << ',' << format_double(r.mu) << ',' << format_double(rep.fitted_R) << ','
           << format_double(rep.slope) << ',' << format_double(rep.slope_ci) << '\n';
}

} // namespace segrelab
