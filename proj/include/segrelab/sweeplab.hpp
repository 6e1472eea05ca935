#pragma once

#include "segrelab/config.hpp"
#include "segrelab/energy.hpp"
#include "segrelab/evolve.hpp"
#include "segrelab/steady.hpp"

#include <string>
#include <vector>

namespace segrelab {

struct RunResult {
    double kappa = 0;
    Trajectory traj;
    StationaryPair pair;
    LimitCertificate cert;
    double max_h = 0;        // sup over samples of the pair H-norm
    double min_energy = 0, max_energy = 0;
    double mu = 0;
    double morrey_final = 0; // 1D: ratio of the final parabolic state, NaN in 2D
    std::string dir;         // empty when nothing was written
};

/// Runs one kappa with energy tracking, then solves (S_kappa) from the final
/// state. When out_dir is non-empty, writes timeseries.csv, stored states,
/// final and stationary snapshots, certificate.jsonl and run.json there.
RunResult run_single(const RunConfig& cfg, double kappa, const std::string& out_dir);

struct SweepCheck {
    std::string name;
    bool passed = false;
    double value = 0;
    double limit = 0;
    std::string detail;
};

struct KappaRecord {
    double kappa = 0;
    std::string dir;
    std::string status;
    long steps = 0;
    double t_final = 0;
    double overlap = 0, kappa_overlap = 0;
    double h_norm = 0, l2_norm = 0;
    double max_product = 0;
    double min_energy = 0, max_energy = 0, max_h = 0, mu = 0;
    double morrey_final = 0;
    LimitCertificate cert;
};

struct SweepReport {
    std::vector<KappaRecord> records;
    std::vector<double> cauchy_l2;     // |(u,v)_hat(k_{i+1}) - (u,v)_hat(k_i)|
    double overlap_slope = 0;          // log overlap vs log kappa
    double kappa_overlap_slope = 0;
    double finest_max_product = 0;
    AuditReport audit;
    std::vector<SweepCheck> checks;
    std::vector<RunResult> runs;       // in kappa order
    bool passed = false;
};

/// All kappa of cfg.kappa_list (>= 3 values over >= 2 decades), concurrently
/// up to the worker count. Writes report.json, energy_audit.csv,
/// certificates.jsonl and one directory per kappa under cfg.output_dir when
/// write is true.
SweepReport run_sweep(const RunConfig& cfg, bool write = true);

struct ExtractionInput {
    double kappa = 0;
    Field u_hat, v_hat;
    std::vector<SimState> states;
};

struct ExtractionTerm {
    int m = 0;
    double kappa = 0;
    double t = 0;
    double pair_to_limit = 0;   // |(u,v)_hat(kappa_m) - limit|
    double state_to_pair = 0;   // |state_m - (u,v)_hat(kappa_m)|
    double combined_l2 = 0;     // |state_m - limit|
    double linf = 0;            // 1D only, NaN otherwise
};

struct ExtractionResult {
    std::vector<ExtractionTerm> terms;
    int requested = 0;
    int achieved = 0;
    bool complete = false;
    std::string note;
};

/// Diagonal selection with tolerances 1/(2m); the limit pair is the pair of
/// the largest kappa. Stops at the first unreachable m.
ExtractionResult diagonal_extraction(const std::vector<ExtractionInput>& runs, int depth);
std::vector<ExtractionInput> extraction_inputs(const SweepReport& rep);
/// Reloads a sweep directory written by run_sweep.
std::vector<ExtractionInput> load_extraction_inputs(const std::string& report_dir);
std::string extraction_json(const ExtractionResult& r);

std::string report_json(const SweepReport& rep);

} // namespace segrelab
