#pragma once

#include "segrelab/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace segrelab {

enum class ReactionKind { logistic, smooth_logistic, zero };

ReactionKind parse_reaction_kind(const std::string& s);
std::string to_string(ReactionKind k);

/// Kinetics f with f(s)=0 for s<=0 and f(s)<0 for s>1.
class ReactionModel {
public:
    explicit ReactionModel(ReactionKind kind = ReactionKind::logistic) : kind_(kind) {}

    ReactionKind kind() const { return kind_; }
    double value(double s) const;
    double derivative(double s) const;
    /// F(s) = integral of f from 0 to s; 0 for s<0.
    double antiderivative(double s) const;
    /// sup of |f'| over [0,1].
    double lipschitz_bound() const;

private:
    ReactionKind kind_;
};

inline double reaction_f(const ReactionModel& m, double s) { return m.value(s); }
inline double antiderivative_F(const ReactionModel& m, double s) { return m.antiderivative(s); }

enum class BoundaryMode { stationary, decaying };

BoundaryMode parse_boundary_mode(const std::string& s);
std::string to_string(BoundaryMode m);

/// Dirichlet data psi(x,t) = psi_inf(x) + rho(x) t^2 exp(-gamma t).
class BoundarySchedule {
public:
    BoundarySchedule() = default;
    /// Frozen trace.
    explicit BoundarySchedule(Trace psi_inf);
    /// Transient trace; values are checked to stay in [0,1] for all t >= 0.
    BoundarySchedule(Trace psi_inf, Trace rho, double gamma);

    BoundaryMode mode() const { return mode_; }
    const Trace& psi_inf() const { return psi_inf_; }
    const Trace& rho() const { return rho_; }
    double gamma() const { return gamma_; }

    Trace at(double t) const;
    Trace rate(double t) const;
    Trace accel(double t) const;

    /// Scalar factor s(t) = t^2 e^{-gamma t} and its derivatives.
    static double transient(double t, double gamma);
    static double transient_rate(double t, double gamma);
    static double transient_accel(double t, double gamma);

private:
    BoundaryMode mode_ = BoundaryMode::stationary;
    Trace psi_inf_;
    Trace rho_;
    double gamma_ = 1.0;
};

struct InitialData {
    Field u0, v0;
    bool segregated = false;
};

/// Checks 0 <= u0, v0 <= 1, trace compatibility with both schedules at t=0,
/// and u0*v0 = 0 when the data claim to be segregated.
void validate_initial_data(const InitialData& d, const BoundarySchedule& psi, const BoundarySchedule& zeta);

/// Mollifier bump a*exp(1 - 1/(1-r^2)) with r = |x-center|/radius; value a at
/// the center, exactly zero for r >= 1.
struct Bump {
    std::array<double, 2> center{0.0, 0.0};
    double radius = 1.0;
    double amplitude = 1.0;

    double operator()(double x, double y = 0.0) const;
};

Field bump_field(const Grid& g, const std::vector<Bump>& bumps);

/// Disjointly supported bump data. When a trace is given for a species, its
/// boundary nodes take the trace values and a bump that is nonzero at a
/// boundary node whose trace differs is rejected. Without a trace the bump
/// values are kept on the boundary too.
InitialData make_segregated_bumps(const Grid& g, const std::vector<Bump>& u_bumps, const std::vector<Bump>& v_bumps,
                                  const Trace* psi = nullptr, const Trace* zeta = nullptr);

/// Interior values uniform in [0,1] from a seeded generator, boundary from the traces.
InitialData make_random_data(const Grid& g, std::uint64_t seed, const Trace& psi, const Trace& zeta);

} // namespace segrelab
