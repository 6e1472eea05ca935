#include "segrelab/error.hpp"
#include "segrelab/evolve.hpp"

#include <cmath>

namespace segrelab {

namespace {
// e^{-lambda t} * integral_0^t s^m e^{a s} ds via its power series; used when
// |a| t is small and the closed forms cancel.
double series_moment(int m, double a, double lambda, double t) {
    double term = std::pow(t, m + 1);   // a^j t^{j+m+1} / j!
    double sum = term / (m + 1);
    for (int j = 1; j < 60; ++j) {
        term *= a * t / j;
        const double add = term / (j + m + 1);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return std::exp(-lambda * t) * sum;
}
} // namespace

double transient_duhamel(double lambda, double gamma, double t) {
    if (t <= 0) return 0.0;
    const double a = lambda - gamma;
    double j1, j2;
    if (std::abs(a) * t <= 2.0) {
        j1 = series_moment(1, a, lambda, t);
        j2 = series_moment(2, a, lambda, t);
    } else {
        const double eg = std::exp(-gamma * t), el = std::exp(-lambda * t);
        j1 = eg * (t / a - 1.0 / (a * a)) + el / (a * a);
        j2 = eg * (t * t / a - 2.0 * t / (a * a) + 2.0 / (a * a * a)) - 2.0 * el / (a * a * a);
    }
    return 2.0 * j1 - gamma * j2;
}

LinearHeatReference::LinearHeatReference(const Field& U0, const BoundarySchedule& sched)
    : grid_(U0.grid), sched_(sched), transform_(U0.grid) {
    const Trace tr0 = trace_of(U0);
    const Trace expect = sched.at(0.0);
    for (std::size_t b = 0; b < tr0.size(); ++b)
        if (std::abs(tr0[b] - expect[b]) > 1e-12) throw PreconditionError("U0 trace does not match the schedule at t=0");
    h_psi_ = harmonic_extension(sched.psi_inf(), grid_);
    h_rho_ = harmonic_extension(sched.rho(), grid_);
    c0_ = transform_.analyze(U0 - h_psi_);
    b_ = transform_.analyze(h_rho_);
}

std::vector<double> LinearHeatReference::duhamel(double t) const {
    std::vector<double> I(transform_.mode_count(), 0.0);
    if (sched_.mode() == BoundaryMode::stationary) return I;
    for (std::size_t c = 0; c < I.size(); ++c) I[c] = transient_duhamel(transform_.eigenvalue(c), sched_.gamma(), t);
    return I;
}

Field LinearHeatReference::at(double t) const {
    if (t < 0) throw PreconditionError("linear_heat_reference: negative time");
    const auto I = duhamel(t);
    std::vector<double> c(c0_.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        c[k] = c0_[k] * std::exp(-transform_.eigenvalue(k) * t) - b_[k] * I[k];
    Field out = transform_.synthesize(c);
    const double s = sched_.mode() == BoundaryMode::decaying ? BoundarySchedule::transient(t, sched_.gamma()) : 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += h_psi_[k] + s * h_rho_[k];
    return out;
}

Field LinearHeatReference::rate(double t) const {
    if (t < 0) throw PreconditionError("linear_heat_reference: negative time");
    const auto I = duhamel(t);
    const double sp =
        sched_.mode() == BoundaryMode::decaying ? BoundarySchedule::transient_rate(t, sched_.gamma()) : 0.0;
    std::vector<double> c(c0_.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double lam = transform_.eigenvalue(k);
        c[k] = -lam * c0_[k] * std::exp(-lam * t) - b_[k] * (sp - lam * I[k]);
    }
    Field out = transform_.synthesize(c);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += sp * h_rho_[k];
    return out;
}

Field linear_heat_reference(const Field& U0, const BoundarySchedule& sched, double t) {
    return LinearHeatReference(U0, sched).at(t);
}

} // namespace segrelab
