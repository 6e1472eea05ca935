#pragma once

#include "segrelab/evolve.hpp"
#include "segrelab/mesh.hpp"
#include "segrelab/model.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace segrelab {

/// Terms of the auxiliary Lyapunov functional at one state.
struct EnergyBreakdown {
    double grad_u = 0, grad_v = 0;           // 1/2 |grad u~|^2
    double pot_u = 0, pot_v = 0;             // -int F(u), -int G(v)
    double coupling = 0;                     // kappa/2 int u^2 v^2
    double cross_u = 0, cross_v = 0;         // -int grad U . grad u~
    double acc_work_u = 0, acc_work_v = 0;   // 2 int_0^t int grad u~ . grad U_t
    double acc_flux_u = 0, acc_flux_v = 0;   // -int_0^t <d_nu u~, psi_t>
    double acc_diss_u = 0, acc_diss_v = 0;   // eps int_0^t |u~_t|^2
    double epsilon = 0;
    long step = 0;

    double total() const;
};

/// Natural functional with U, V the harmonic extensions of the frozen traces.
double energy_stationary(const SimState& s, const Problem& p, const Field& U_inf, const Field& V_inf);

/// Total of a breakdown; fails when the breakdown was not advanced to s.
double energy_auxiliary(const EnergyBreakdown& b, const SimState& s);

/// 1/2 for decaying boundary data, 0 for frozen data (all accumulators vanish).
double default_epsilon(BoundaryMode mode);

/// Advances the functional along a trajectory. U, V are the linear heat
/// flows driven by psi, zeta started from the harmonic extensions of the
/// initial traces.
class EnergyTracker : public StepObserver {
public:
    EnergyTracker(const Problem& p, const Grid& g, double epsilon);
    EnergyTracker(const Problem& p, const Grid& g);

    void on_start(const SimState& s0) override;
    void on_step(const SimState& prev, const SimState& next) override;
    double energy() const override { return current_.total(); }

    const EnergyBreakdown& breakdown() const { return current_; }
    /// |u~^{n+1} - u~^n| / dt of the last step.
    DerivativeNorms last_homogenized_rates() const { return last_rates_; }

    /// Per-step record (enabled with record_steps): energies and rates.
    void record_steps(bool on) { record_ = on; }
    const std::vector<double>& step_energies() const { return energies_; }
    const std::vector<DerivativeNorms>& step_rates() const { return rates_; }

private:
    struct Local {
        Field ut, vt;                 // homogenized fields
        double work_u = 0, work_v = 0; // grad u~ . grad U_t
        double flux_u = 0, flux_v = 0; // <d_nu u~, psi_t>
    };
    Local evaluate(const SimState& s, EnergyBreakdown& b) const;

    Problem problem_;
    Grid grid_;
    double epsilon_;
    bool frozen_;
    std::unique_ptr<LinearHeatReference> ref_u_, ref_v_;
    Field U_inf_, V_inf_;
    EnergyBreakdown current_;
    Local local_;
    DerivativeNorms last_rates_;
    bool record_ = false;
    std::vector<double> energies_;
    std::vector<DerivativeNorms> rates_;
};

/// r = (L1 - L0)/dt + (1 - eps)(du^2 + dv^2).
double dissipation_residual(double L0, double L1, double dt, double du, double dv, double epsilon);

/// 2 c1 + c2^2 (sum g dt)^2.
double gronwall_bound(double c1, double c2, const std::vector<double>& g, double dt);

/// |u0 v0|^2 + int_0^inf |Psi_t| + int_0^inf |Z_t|; the time integrals are
/// computed by quadrature up to `horizon`, whose neglected tail must be
/// below 1e-10.
double mu_quantity(const InitialData& init, const BoundarySchedule& su, const BoundarySchedule& sv, double horizon);

struct BoundQuantities {
    double mu = 0;
    double beta_kappa = 0;
    double fitted_R = 0;
};

struct AuditRow {
    double kappa = 0;
    double max_h1 = 0;   // sup over t of the pair H-norm
    double min_energy = 0;
    double max_energy = 0;
    double mu = 0;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    double fitted_R = 0;
    /// Least-squares slope of max_h1 against kappa divided by the mean max_h1.
    double slope = 0;
    /// 95% half-width of the relative slope.
    double slope_ci = 0;
    /// Same relative slope for min_energy.
    double energy_slope = 0;
    bool mu_zero = true;
    int violations = 0;
    bool passed = false;
};

/// Uniform-in-kappa audit. With mu = 0 everywhere it passes when
/// |slope| <= tol and |energy_slope| <= tol; otherwise R is fitted on the
/// smallest kappa and runs with max_h1 > R + kappa mu are counted.
AuditReport h_bound_audit(const std::vector<AuditRow>& rows, double tol = 1e-3);

void write_energy_audit_csv(std::ostream& os, const AuditReport& rep);

struct LinearFit {
    double slope = 0, intercept = 0, slope_se = 0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

} // namespace segrelab
