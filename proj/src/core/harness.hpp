// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcoeff.hpp"
#include "field.hpp"
#include "kinetics.hpp"
#include "she.hpp"

namespace gkd {

/// The kinetic equations advance the energy density at 1/(2 pi) times the
/// rate given by a(e) from diffusion_coefficient; SHE runs compared against
/// particles use this rescaled coefficient.
inline constexpr double kKineticTimeFactor = 0.15915494309189533577;  // 1 / (2 pi)

struct ExperimentConfig {
    FieldSpec field;
    int n = 1;
    InitialDistribution init = InitialDistribution::delta(1.0);
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    std::size_t particles = 2000;
    std::size_t realizations = 50;
    int steps_per_gyro = 64;
    double t_end = 1.0;
    std::vector<double> output_times{};  // empty: {t_end}; must end at t_end
    EnergyGrid grid{8.0, 128};
    double she_dt = 1e-4;
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
    QuadratureOptions quadrature{};

    /// Throws ValidationError naming the offending field.
    void validate() const;
    /// Recorded times, defaulting to {t_end}.
    std::vector<double> recorded_times() const;
    /// Non-fatal findings, e.g. 2 pi n eps > t_end / 10 (scales not separated).
    std::vector<std::string> warnings() const;
};

struct Distances {
    double l1 = 0.0;
    double l2 = 0.0;
    double w1 = 0.0;
};

/// L1 = sum |p - q| de, L2 = (sum (p - q)^2 de)^{1/2}, W1 = sum |P - Q| de with
/// P, Q the cumulative sums. Throws GridMismatch if the grids differ.
Distances compare(const EnergyProfile& p, const EnergyProfile& q);

/// Realization-averaged histograms of one epsilon.
struct EnsembleResult {
    double eps = 0.0;
    std::vector<double> times;
    std::vector<EnergyProfile> mean;                  // per time
    std::vector<std::vector<double>> std_error;       // per time, per bin, across realizations
    std::vector<std::vector<EnergyProfile>> per_realization;  // [realization][time]
    std::size_t out_of_range = 0;
    std::size_t particles = 0;
    std::size_t realizations = 0;
};

/// Runs cfg.realizations independent realizations at `eps` and averages the
/// gyro-averaged histograms in realization order.
EnsembleResult run_ensemble(const ExperimentConfig& cfg, double eps);

/// Kinetic-time coefficient on the faces of cfg.grid.
std::vector<double> study_face_coefficients(const ExperimentConfig& cfg);

/// SHE reference at the recorded times, from the init's profile.
std::vector<SheSnapshot> she_reference(const ExperimentConfig& cfg, const std::vector<double>& a_faces);

struct ConvergenceRow {
    double eps = 0.0;
    Distances dist;
    Distances std_error;   // jackknife over realizations
    double histogram_std_error = 0.0;  // mean per-bin stderr of the averaged histogram, final time
    std::size_t out_of_range = 0;
    bool ok = true;
    std::string error;
};

struct InteriorRow {
    double eps = 0.0;
    double time = 0.0;
    Distances dist;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    std::vector<InteriorRow> interior;
    std::vector<std::string> warnings;
    bool monotone = false;
    std::string verdict;
    std::vector<double> a_faces;
    std::vector<SheSnapshot> she;
    std::vector<std::string> artifacts;
};

/// Strict decrease of L1 beyond the combined standard error of each
/// consecutive pair: L1_i - L1_{i+1} > sqrt(se_i^2 + se_{i+1}^2).
bool strictly_decreasing(const std::vector<ConvergenceRow>& rows);

/// Called after each epsilon finishes (or fails); lets callers persist partial results.
using EpsilonCallback = std::function<void(const ConvergenceRow&, const EnsembleResult*)>;

/// Coefficients, SHE reference, one ensemble per epsilon, distances at the
/// final time (rows) and at the earlier recorded times (interior). A failing
/// epsilon is recorded with ok = false and the study continues.
ConvergenceReport run_convergence_study(const ExperimentConfig& cfg, const EpsilonCallback& on_epsilon = {});

/// Distances between an ensemble's mean at time index `t` and `reference`,
/// with jackknife standard errors over realizations.
ConvergenceRow score_ensemble(const EnsembleResult& ens, std::size_t t, const EnergyProfile& reference);

}  // namespace gkd
