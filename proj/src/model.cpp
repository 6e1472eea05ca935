#include "segrelab/model.hpp"
#include "segrelab/error.hpp"

#include <cmath>
#include <random>

namespace segrelab {

ReactionKind parse_reaction_kind(const std::string& s) {
    if (s == "logistic") return ReactionKind::logistic;
    if (s == "smooth_logistic") return ReactionKind::smooth_logistic;
    if (s == "zero") return ReactionKind::zero;
    throw PreconditionError("unknown reaction kind: " + s);
}

std::string to_string(ReactionKind k) {
    switch (k) {
    case ReactionKind::logistic: return "logistic";
    case ReactionKind::smooth_logistic: return "smooth_logistic";
    case ReactionKind::zero: return "zero";
    }
    return "?";
}

double ReactionModel::value(double s) const {
    if (s <= 0) return 0.0;
    switch (kind_) {
    case ReactionKind::logistic: return s * (1.0 - s);
    case ReactionKind::smooth_logistic: return s * s * (1.0 - s);
    case ReactionKind::zero: return 0.0;
    }
    return 0.0;
}

double ReactionModel::derivative(double s) const {
    if (s <= 0) return 0.0;
    switch (kind_) {
    case ReactionKind::logistic: return 1.0 - 2.0 * s;
    case ReactionKind::smooth_logistic: return 2.0 * s - 3.0 * s * s;
    case ReactionKind::zero: return 0.0;
    }
    return 0.0;
}

double ReactionModel::antiderivative(double s) const {
    if (s <= 0) return 0.0;
    switch (kind_) {
    case ReactionKind::logistic: return s * s / 2.0 - s * s * s / 3.0;
    case ReactionKind::smooth_logistic: return s * s * s / 3.0 - s * s * s * s / 4.0;
    case ReactionKind::zero: return 0.0;
    }
    return 0.0;
}

double ReactionModel::lipschitz_bound() const {
    // logistic: |1-2s| <= 1; smooth: 2s-3s^2 ranges over [-1, 1/3] on [0,1].
    return kind_ == ReactionKind::zero ? 0.0 : 1.0;
}

BoundaryMode parse_boundary_mode(const std::string& s) {
    if (s == "stationary") return BoundaryMode::stationary;
    if (s == "decaying") return BoundaryMode::decaying;
    throw PreconditionError("unknown boundary mode: " + s);
}

std::string to_string(BoundaryMode m) { return m == BoundaryMode::stationary ? "stationary" : "decaying"; }

BoundarySchedule::BoundarySchedule(Trace psi_inf) : mode_(BoundaryMode::stationary), psi_inf_(std::move(psi_inf)) {
    for (double p : psi_inf_)
        if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("boundary values must lie in [0,1]");
    rho_.assign(psi_inf_.size(), 0.0);
}

BoundarySchedule::BoundarySchedule(Trace psi_inf, Trace rho, double gamma)
    : mode_(BoundaryMode::decaying), psi_inf_(std::move(psi_inf)), rho_(std::move(rho)), gamma_(gamma) {
    if (!(gamma_ > 0) || !std::isfinite(gamma_)) throw PreconditionError("decay rate gamma must be positive");
    if (rho_.size() != psi_inf_.size()) throw PreconditionError("rho and psi_inf lengths differ");
    // psi is affine in s(t) in [0, smax], so the endpoints decide.
    const double smax = transient(2.0 / gamma_, gamma_);
    for (std::size_t b = 0; b < rho_.size(); ++b) {
        const double lo = psi_inf_[b], hi = psi_inf_[b] + rho_[b] * smax;
        if (!(lo >= 0 && lo <= 1 && hi >= 0 && hi <= 1))
            throw PreconditionError("decaying boundary schedule leaves [0,1]");
    }
}

double BoundarySchedule::transient(double t, double gamma) { return t * t * std::exp(-gamma * t); }
double BoundarySchedule::transient_rate(double t, double gamma) {
    return (2.0 * t - gamma * t * t) * std::exp(-gamma * t);
}
double BoundarySchedule::transient_accel(double t, double gamma) {
    return (2.0 - 4.0 * gamma * t + gamma * gamma * t * t) * std::exp(-gamma * t);
}

Trace BoundarySchedule::at(double t) const {
    if (t < 0) throw PreconditionError("boundary_at: negative time");
    if (mode_ == BoundaryMode::stationary) return psi_inf_;
    const double s = transient(t, gamma_);
    Trace out(psi_inf_.size());
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = psi_inf_[b] + rho_[b] * s;
    return out;
}

Trace BoundarySchedule::rate(double t) const {
    Trace out(psi_inf_.size(), 0.0);
    if (mode_ == BoundaryMode::stationary) return out;
    const double s = transient_rate(t, gamma_);
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = rho_[b] * s;
    return out;
}

Trace BoundarySchedule::accel(double t) const {
    Trace out(psi_inf_.size(), 0.0);
    if (mode_ == BoundaryMode::stationary) return out;
    const double s = transient_accel(t, gamma_);
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = rho_[b] * s;
    return out;
}

void validate_initial_data(const InitialData& d, const BoundarySchedule& psi, const BoundarySchedule& zeta) {
    if (d.u0.grid != d.v0.grid) throw PreconditionError("initial fields live on different grids");
    for (std::size_t k = 0; k < d.u0.size(); ++k) {
        if (!(d.u0[k] >= 0 && d.u0[k] <= 1 && d.v0[k] >= 0 && d.v0[k] <= 1))
            throw PreconditionError("initial data must lie in [0,1]");
        if (d.segregated && d.u0[k] * d.v0[k] != 0.0) throw PreconditionError("initial data claimed segregated but overlap");
    }
    if (trace_of(d.u0) != psi.at(0.0)) throw PreconditionError("u0 trace does not match psi(.,0)");
    if (trace_of(d.v0) != zeta.at(0.0)) throw PreconditionError("v0 trace does not match zeta(.,0)");
}

double Bump::operator()(double x, double y) const {
    const double dx = x - center[0], dy = y - center[1];
    const double r2 = (dx * dx + dy * dy) / (radius * radius);
    if (r2 >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
}

Field bump_field(const Grid& g, const std::vector<Bump>& bumps) {
    Field f(g, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.coord(k, 0), y = g.dim() == 2 ? g.coord(k, 1) : 0.0;
        double s = 0;
        for (const Bump& b : bumps) s += b(x, g.dim() == 2 ? y : b.center[1]);
        f[k] = s;
    }
    return f;
}

namespace {
void check_bumps(const std::vector<Bump>& bumps) {
    for (const Bump& b : bumps) {
        if (!(b.amplitude > 0 && b.amplitude <= 1)) throw PreconditionError("bump amplitude must be in (0,1]");
        if (!(b.radius > 0)) throw PreconditionError("bump radius must be positive");
    }
    for (std::size_t a = 0; a < bumps.size(); ++a)
        for (std::size_t b = a + 1; b < bumps.size(); ++b) {
            const double d = std::hypot(bumps[a].center[0] - bumps[b].center[0], bumps[a].center[1] - bumps[b].center[1]);
            if (d < bumps[a].radius + bumps[b].radius)
                throw PreconditionError("bumps of one species must have disjoint supports");
        }
}

void apply_trace(Field& f, const Trace* tr, const char* name) {
    if (!tr) return;
    const auto nodes = f.grid.boundary_nodes();
    if (tr->size() != nodes.size()) throw PreconditionError(std::string(name) + " trace length does not match boundary");
    for (std::size_t b = 0; b < nodes.size(); ++b) {
        if (f[nodes[b]] > 0 && f[nodes[b]] != (*tr)[b])
            throw PreconditionError(std::string(name) + " bump support touches the boundary where the trace is nonzero");
        f[nodes[b]] = (*tr)[b];
    }
}
} // namespace

InitialData make_segregated_bumps(const Grid& g, const std::vector<Bump>& u_bumps, const std::vector<Bump>& v_bumps,
                                  const Trace* psi, const Trace* zeta) {
    check_bumps(u_bumps);
    check_bumps(v_bumps);
    for (const Bump& a : u_bumps)
        for (const Bump& b : v_bumps) {
            const double d = std::hypot(a.center[0] - b.center[0], g.dim() == 2 ? a.center[1] - b.center[1] : 0.0);
            if (d < a.radius + b.radius) throw PreconditionError("u and v bump supports overlap");
        }
    InitialData d;
    d.u0 = bump_field(g, u_bumps);
    d.v0 = bump_field(g, v_bumps);
    apply_trace(d.u0, psi, "u");
    apply_trace(d.v0, zeta, "v");
    for (std::size_t k = 0; k < g.size(); ++k)
        if (d.u0[k] * d.v0[k] != 0.0) throw PreconditionError("traces overlap: data cannot be segregated");
    d.segregated = true;
    return d;
}

InitialData make_random_data(const Grid& g, std::uint64_t seed, const Trace& psi, const Trace& zeta) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    InitialData d{Field(g, 0.0), Field(g, 0.0), false};
    for (std::size_t k : g.interior_nodes()) {
        d.u0[k] = unif(rng);
        d.v0[k] = unif(rng);
    }
    set_trace(d.u0, psi);
    set_trace(d.v0, zeta);
    return d;
}

} // namespace segrelab
