#include "segrelab/heatkernel.hpp"
#include "segrelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace segrelab {

double semigroup_norm(const EigenSystem& eig, double alpha, double t) {
    if (!(t > 0)) throw PreconditionError("semigroup_norm: t must be positive");
    if (!(alpha > 0)) throw PreconditionError("semigroup_norm: alpha must be positive");
    double m = 0;
    for (double lam : eig.eigenvalues) m = std::max(m, std::pow(lam, alpha) * std::exp(-lam * t));
    return m;
}

std::vector<double> log_spaced(double t0, double t1, int count) {
    if (!(t0 > 0) || !(t1 > t0) || count < 2) throw PreconditionError("log_spaced: need 0 < t0 < t1 and count >= 2");
    std::vector<double> out(count);
    const double a = std::log(t0), b = std::log(t1);
    for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
    return out;
}

namespace {
double scaled(const EigenSystem& eig, double alpha, double omega, double t) {
    return semigroup_norm(eig, alpha, t) * std::exp(omega * t) * std::pow(t, alpha);
}
} // namespace

DecayCertificate certify_decay(const EigenSystem& eig, double alpha, double omega, const std::vector<double>& t_grid) {
    if (eig.eigenvalues.empty()) throw PreconditionError("certify_decay: empty spectrum");
    const double l1 = eig.lambda_min();
    if (!(omega > 0) || !(omega < l1)) throw PreconditionError("certify_decay: omega must lie in (0, lambda_1)");
    if (!(alpha > 0)) throw PreconditionError("certify_decay: alpha must be positive");
    if (t_grid.size() < 2) throw PreconditionError("certify_decay: t_grid needs at least two samples");
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (!(t_grid[i] > 0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
            throw PreconditionError("certify_decay: t_grid must be positive and increasing");

    DecayCertificate c;
    c.alpha = alpha;
    c.omega = omega;
    c.t_samples = t_grid;
    c.lambda_min = l1;
    c.lambda_max = eig.lambda_max();
    c.grid_id = eig.grid.id();

    // Each curve lambda^a t^a e^{-(lambda-omega)t} peaks at t = a/(lambda-omega).
    double C = 0;
    for (double lam : eig.eigenvalues)
        C = std::max(C, std::pow(lam * alpha / (std::exp(1.0) * (lam - omega)), alpha));
    for (double t : t_grid) C = std::max(C, scaled(eig, alpha, omega, t));
    c.C_alpha = C * (1.0 + 1e-12);

    const auto fine = log_spaced(t_grid.front(), t_grid.back(), static_cast<int>(10 * (t_grid.size() - 1) + 1));
    double worst = -std::numeric_limits<double>::infinity();
    for (double t : fine) {
        const double bound = c.C_alpha * std::exp(-omega * t) * std::pow(t, -alpha);
        worst = std::max(worst, (semigroup_norm(eig, alpha, t) - bound) / bound);
    }
    c.max_violation = worst;
    return c;
}

double decay_integral(const DecayCertificate& c) {
    if (c.alpha >= 1.0) return std::numeric_limits<double>::infinity();
    return c.C_alpha * std::tgamma(1.0 - c.alpha) / std::pow(c.omega, 1.0 - c.alpha);
}

void write_decay_csv(std::ostream& os, const std::vector<DecayCertificate>& certs) {
    os << "alpha,omega,C_alpha,max_violation,lambda_min,lambda_max,grid_id\n";
    for (const auto& c : certs)
        os << format_double(c.alpha) << ',' << format_double(c.omega) << ',' << format_double(c.C_alpha) << ','
           << format_double(c.max_violation) << ',' << format_double(c.lambda_min) << ','
           << format_double(c.lambda_max) << ',' << c.grid_id << '\n';
}

} // namespace segrelab
