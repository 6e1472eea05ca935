#pragma once

#include "segrelab/mesh.hpp"
#include "segrelab/model.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace segrelab {

/// Kinetics, Dirichlet schedules and coupling strength of one system.
struct Problem {
    ReactionModel f, g;
    BoundarySchedule psi, zeta;
    double kappa = 0;
};

struct SimState {
    double t = 0;
    Field u, v;
    long step_index = 0;
    double dt_last = 0;
};

SimState initial_state(const InitialData& d);

struct StepperConfig {
    double dt = 1e-3;
    long max_steps = 1000000;
    double invariant_tolerance = 1e-9;
    bool check_invariant = true;
    double horizon = std::numeric_limits<double>::infinity();
    /// Stabilization threshold on both difference-quotient norms; 0 disables.
    double threshold = 0;
    /// Consecutive samples below threshold needed to declare stabilization.
    int window = 10;
    long sample_stride = 1;
    /// Store every state_stride-th state (0 stores only the first and last).
    long state_stride = 0;
    double solve_tolerance = 1e-12;

    /// Throws PreconditionError on bad values, including dt*L > 1.
    void validate(double lipschitz) const;
};

/// One linearly implicit step:
///   (I/dt + A_h + kappa diag(v^2)) u' = u/dt + f(u), and symmetrically for v,
/// with Dirichlet data injected at the new time.
SimState step(const SimState& s, const Problem& p, const StepperConfig& cfg);

struct DerivativeNorms {
    double du = 0, dv = 0;
};

DerivativeNorms time_derivative_estimate(const SimState& prev, const SimState& next);

/// Running sum of (du^2 + dv^2) dt.
class DerivativeIntegral {
public:
    void add(const DerivativeNorms& d, double dt) { value_ += (d.du * d.du + d.dv * d.dv) * dt; }
    double value() const { return value_; }

private:
    double value_ = 0;
};

/// (u - U, v - V); fails when the traces differ by more than 1e-12.
std::pair<Field, Field> homogenize(const SimState& s, const Field& U, const Field& V);

/// Hooks run_until calls; the energy module provides the standard tracker.
class StepObserver {
public:
    virtual ~StepObserver() = default;
    virtual void on_start(const SimState& s0) = 0;
    virtual void on_step(const SimState& prev, const SimState& next) = 0;
    virtual double energy() const = 0;
};

enum class RunStatus { stabilized, horizon_reached, budget_exhausted };
std::string to_string(RunStatus s);

struct SampleRow {
    long step = 0;
    double t = 0, energy = 0, overlap_l2sq = 0, ku2v2 = 0, du_norm = 0, dv_norm = 0;
    double u_h1 = 0, v_h1 = 0, u_min = 0, u_max = 0, v_min = 0, v_max = 0;
};

struct Trajectory {
    RunStatus status = RunStatus::budget_exhausted;
    double kappa = 0;
    std::vector<SampleRow> samples;
    std::vector<SimState> states;
    SimState final_state;
    /// Running integral of du^2 + dv^2 over the whole run.
    double derivative_integral = 0;
};

/// Lumped integral of u^2 v^2 over interior nodes.
double overlap_l2sq(const Field& u, const Field& v);
/// sqrt(|u|_H1^2 + |v|_H1^2).
double pair_h_norm(const Field& u, const Field& v);

Trajectory run_until(const SimState& s0, const Problem& p, const StepperConfig& cfg, StepObserver* obs = nullptr);

void write_timeseries_csv(std::ostream& os, const Trajectory& traj);

/// For each stored state, the largest H-distance to the next `taus` stored
/// states. Returns (t, sup) pairs.
std::vector<std::pair<double, double>> quasi_periodicity(const Trajectory& traj, int taus = 10);

/// Exact-in-space solution of U_t = Delta_h U with Dirichlet schedule psi,
/// built from the sine eigenbasis and closed-form Duhamel integrals.
class LinearHeatReference {
public:
    LinearHeatReference(const Field& U0, const BoundarySchedule& sched);

    Field at(double t) const;
    Field rate(double t) const;
    const Field& limit() const { return h_psi_; }

private:
    std::vector<double> duhamel(double t) const;   // I(lambda_k, t) per mode

    Grid grid_;
    BoundarySchedule sched_;
    SineTransform transform_;
    Field h_psi_, h_rho_;
    std::vector<double> c0_, b_;
};

Field linear_heat_reference(const Field& U0, const BoundarySchedule& sched, double t);

/// I(lambda, t) = integral_0^t e^{-lambda (t-s)} s'(s) ds for s(t) = t^2 e^{-gamma t}.
double transient_duhamel(double lambda, double gamma, double t);

} // namespace segrelab
