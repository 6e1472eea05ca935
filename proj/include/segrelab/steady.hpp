#pragma once

#include "segrelab/evolve.hpp"
#include "segrelab/mesh.hpp"
#include "segrelab/model.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <utility>
#include <vector>

namespace segrelab {

struct StationaryPair {
    Field u_hat, v_hat;
    double residual_u = 0, residual_v = 0;   // l-infinity
    std::string method = "newton";           // or "pseudo_time"
    int iterations = 0;
    /// Newton residuals (max of both components) per iteration, last included.
    std::vector<double> residual_history;
};

struct NewtonOptions {
    int max_iterations = 60;
    int max_halvings = 20;
    double pseudo_dt = 0.5;
    long pseudo_max_steps = 400000;
    /// Pseudo-time stepping hands back to Newton once the residual is below this.
    double handoff = 1e-6;
};

/// Interior residuals of -Delta_h u - f(u) + kappa u v^2 and the v analogue.
std::pair<Field, Field> stationary_residual(const ReactionModel& f, const ReactionModel& g, double kappa,
                                            const Field& u, const Field& v);

/// Jacobian of the stacked interior residual (u unknowns first, interior nodes in index order).
Eigen::SparseMatrix<double> stationary_jacobian(const ReactionModel& f, const ReactionModel& g, double kappa,
                                                const Field& u, const Field& v);

/// Damped Newton on the coupled discrete system with traces injected from
/// psi and zeta; falls back to pseudo-time stepping when the line search
/// stalls. Throws SolveError if both phases miss tol (l-infinity).
StationaryPair solve_stationary(const ReactionModel& f, const ReactionModel& g, double kappa, const Trace& psi,
                                const Trace& zeta, const Field& u_guess, const Field& v_guess, double tol = 1e-9,
                                const NewtonOptions& opt = {});

struct StabilizationReport {
    double h_distance = 0;
    double l2 = 0, l4 = 0, linf = 0;
    bool success = false;
};

/// Distances between the final state of a stabilized trajectory and a pair.
StabilizationReport stabilization_detect(const Trajectory& traj, const StationaryPair& pair, double tol);

/// max over interior nodes of (-Delta_h u - f(u))_+.
double variational_inequality_residual(const Field& u, const ReactionModel& f);

/// max over node pairs of |u(x)-u(y)| / (4 |grad_h u|_2 sqrt|x-y|); 1D only.
double morrey_check(const Field& u);

struct LimitCertificate {
    double kappa = 0;
    double residual_u = 0, residual_v = 0;
    double overlap = 0, kappa_overlap = 0;
    double vi_u = 0, vi_v = 0;
    double holder_ratio = 0;   // NaN on 2D grids
    std::string method;
    int iterations = 0;
};

LimitCertificate certify_limit(const StationaryPair& pair, const ReactionModel& f, const ReactionModel& g, double kappa);

/// One JSON object on one line.
std::string certificate_json(const LimitCertificate& c);

} // namespace segrelab
