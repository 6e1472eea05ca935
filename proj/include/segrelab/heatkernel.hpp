#pragma once

#include "segrelab/mesh.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace segrelab {

/// max over the spectrum of lambda^alpha e^{-lambda t}.
double semigroup_norm(const EigenSystem& eig, double alpha, double t);

struct DecayCertificate {
    double alpha = 0, omega = 0, C_alpha = 0;
    std::vector<double> t_samples;
    /// Worst relative excess (norm - bound)/bound over the refined grid.
    double max_violation = 0;
    double lambda_min = 0, lambda_max = 0;
    std::string grid_id;
};

std::vector<double> log_spaced(double t0, double t1, int count);

/// Constant C with semigroup_norm(t) <= C e^{-omega t} t^{-alpha}. C is the
/// largest of the per-eigenvalue suprema (closed form) and the scan over
/// t_grid, then checked on a grid ten times finer over the same range.
DecayCertificate certify_decay(const EigenSystem& eig, double alpha, double omega, const std::vector<double>& t_grid);

/// integral_0^inf C e^{-omega s} s^{-alpha} ds = C Gamma(1-alpha) / omega^{1-alpha};
/// +infinity for alpha >= 1.
double decay_integral(const DecayCertificate& c);

void write_decay_csv(std::ostream& os, const std::vector<DecayCertificate>& certs);

} // namespace segrelab
