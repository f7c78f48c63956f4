// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace gkd {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::string out_dir;  // overrides outputs.dir when non-empty
    unsigned threads = 1;
};

struct PipelineResult {
    std::vector<std::string> files;
    std::string summary;  // one-line human-readable result
    bool passed = true;   // false when a study's verdict is negative
    Distances distances;  // run_compare only
};

/// coeff.csv: e,a,stderr,method,n (quadrature rows, MonteCarlo rows with mc).
PipelineResult run_coeff(const RunConfig& cfg, const std::vector<double>& energies, bool mc, const RunOptions& opts);
/// field_validate.csv: tau,x1,x2,target,estimate,stderr on a lags x lags grid.
PipelineResult run_field_validate(const RunConfig& cfg, int lags, int realizations, const RunOptions& opts);
/// simulate.csv: time,e_center,density,stderr and simulate_meta.json.
PipelineResult run_simulate(const RunConfig& cfg, double eps, const RunOptions& opts);
/// she.csv: time,e_center,density and she_fit.json.
PipelineResult run_she(const RunConfig& cfg, const RunOptions& opts);
/// study_table.csv, study_interior.csv, study_she.csv, study_eps_<i>.csv, study_report.json.
PipelineResult run_study(const RunConfig& cfg, const RunOptions& opts);
/// scaling.csv: time,median and scaling.json for a = e^{alpha/2}.
PipelineResult run_scaling(double alpha, const RunOptions& opts);
/// L1/L2/W1 between the last time block of two profile CSVs; compare.json
/// is written only when opts.out_dir is non-empty.
PipelineResult run_compare(const std::string& a_path, const std::string& b_path, const RunOptions& opts);

struct ProfileTable {
    std::vector<double> times;
    std::vector<EnergyProfile> profiles;
};
/// Reads a CSV whose header starts with time,e_center,density.
ProfileTable read_profile_csv(const std::string& path);

struct ScalingRun {
    std::vector<SheSnapshot> snapshots;
    ScalingFit fit;
    double collapse = 0.0;
};
/// SHE with a = e^{alpha/2} from a half-Gaussian at e = 0 on [0, e_max] with
/// `cells` cells; the fit window is where 40 de <= median <= e_max / 5 and
/// no mass reaches the boundary.
ScalingRun scaling_study(double alpha, double e_max = 50.0, int cells = 2000);

}  // namespace gkd
