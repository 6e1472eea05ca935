#pragma once

#include "segrelab/evolve.hpp"
#include "segrelab/mesh.hpp"
#include "segrelab/model.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace segrelab {

/// Flat key=value configuration with dotted keys. Unknown or repeated keys
/// are errors; '#' starts a comment.
struct RunConfig {
    // grid.*
    int dim = 1;
    std::array<int, 2> n{255, 1};
    std::array<double, 2> L{1.0, 1.0};
    // reaction.*
    ReactionKind kind = ReactionKind::logistic;
    // boundary.*
    BoundaryMode mode = BoundaryMode::stationary;
    double gamma = 1.0;
    std::string psi_inf = "0", zeta_inf = "0", rho = "0", rho_zeta = "0";
    // init.*
    std::string init_type = "bumps";
    std::string centers, radii, amplitudes;
    std::uint64_t seed = 1;
    std::string u_file, v_file;
    double u_value = 0.5, v_value = 0.5;
    // run.*
    double kappa = 1.0;
    double dt = 1e-2;
    double horizon = std::numeric_limits<double>::infinity();
    long max_steps = 1000000;
    double threshold = 1e-8;
    int window = 10;
    long sample_stride = 10;
    long state_stride = 100;
    double invariant_tol = 1e-9;
    // steady.*
    double steady_tol = 1e-9;
    // sweep.*
    std::vector<double> kappa_list;
    int workers = 1;
    // output.*
    std::string output_dir = "segrelab-out";

    /// Directory relative paths in the file are resolved against.
    std::string base_dir = ".";
};

RunConfig parse_config(std::istream& is, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Applies one key=value pair; throws on unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Grid, problem (kappa from cfg.kappa) and validated initial data.
struct Setup {
    Grid grid;
    Problem problem;
    InitialData init;
};

Setup build_setup(const RunConfig& cfg);
StepperConfig stepper_config(const RunConfig& cfg);

/// Worker count after applying SEGRELAB_WORKERS.
int effective_workers(const RunConfig& cfg);

} // namespace segrelab
