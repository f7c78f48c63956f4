// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "correlation.hpp"
#include "field.hpp"
#include "quadrature.hpp"

namespace gkd {

enum class CoefficientMethod { Quadrature, ClosedForm, MonteCarlo };

std::string to_string(CoefficientMethod m);

/// Tabulated a(e) on an ascending energy grid.
struct DiffusionCoefficientTable {
    std::vector<double> e_values;
    std::vector<double> a_values;
    CoefficientMethod method = CoefficientMethod::Quadrature;
    std::optional<std::vector<double>> std_errors;  // MonteCarlo only
    int n = 1;
    std::size_t clamped = 0;  // entries clamped from [-tol, 0) to 0

    /// Throws InvalidArgument if lengths differ, e is not strictly increasing
    /// and non-negative, or some a < -1e-10 max|a|.
    void validate() const;
    /// Linear interpolation; throws InvalidArgument outside [e_front, e_back].
    double interpolate(double e) const;
};

/// a(e) = 1/(2 pi n^2) int_0^S (-d2tt_tilde)(-s/(2 pi n), 2 sqrt(2e) |sin(s/2)|) ds
/// with S = 2 pi n t_support (the integrand vanishes beyond S).
double diffusion_coefficient(const CorrelationModel& model, double e, int n,
                             const QuadratureOptions& opts = {});
QuadratureResult diffusion_coefficient_detail(const CorrelationModel& model, double e, int n,
                                              const QuadratureOptions& opts = {});

/// K in a(e) = K e^{alpha/2} for A(t, x) = f(t) |x|^alpha:
/// K = -(2^{3 alpha/2} / (2 pi n^2)) int_0^S f''(-s/(2 pi n)) |sin(s/2)|^alpha ds.
double richardson_coefficient(const TemporalEnvelope& envelope, double alpha, int n,
                              const QuadratureOptions& opts = {});

/// Self-similar spreading exponent beta = 2 / (4 - alpha).
double scaling_exponent(double alpha);

/// Normalization of the work-integral oracle, a = c * E[I_N^2] / N. Fixed by
/// calibrate_work_oracle_norm against quadrature on the Gaussian-bump model.
inline constexpr double kWorkOracleNorm = 0.25;

enum class WindowPlacement {
    /// s in [-2 pi N, 2 pi N] exactly.
    Fixed,
    /// Same length, shifted so both ends fall on block boundaries where V = 0.
    /// Removes the O(1/N) endpoint term of the fixed window.
    BlockAligned,
};

struct WorkOracleOptions {
    WindowPlacement placement = WindowPlacement::BlockAligned;
    int panels_per_gyro = 8;  // Gauss-Legendre panels per 2 pi of orbit phase
    int panel_order = 8;
    unsigned threads = 1;
    double norm = kWorkOracleNorm;
};

struct WorkOracleResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double effective_window = 0.0;        // N_eff with window length 4 pi N_eff
    std::vector<double> per_sample;       // norm * I^2 / N_eff for each realization
};

/// Monte Carlo estimate of a(e) from the mean square work integral
///   I_N = int grad V(-s/(2 pi n), -R_s v_perp) . R_s v ds,   |v| = sqrt(2e),
/// along the unperturbed gyro-orbit, one independent realization per sample.
/// Realization i uses synthesize(spec with master_seed = seed, i), so runs with
/// different N and the same seed share their fields.
WorkOracleResult mc_work_oracle(const FieldSpec& spec, double e, int n, int window_n,
                                std::size_t n_samples, std::uint64_t seed,
                                const WorkOracleOptions& opts = {});

/// Work integral of one realization (the per-sample quantity of mc_work_oracle).
double work_integral(const FieldRealization& real, double e, int n, int window_n,
                     const WorkOracleOptions& opts, double* effective_window = nullptr);

struct NormCalibration {
    double least_squares = 0.0;  // unconstrained best-fit constant
    double snapped = 0.0;        // nearest admissible closed-form constant
    std::string snapped_name;
};

/// Least-squares constant c minimizing sum (quad_i - c raw_i)^2, snapped (in
/// log distance) to the nearest of {1/(4 pi), 1/(2 pi), 1/4, 1/pi, 1/2, 1}.
/// raw_i are mean(I^2)/N values with unit normalization.
NormCalibration calibrate_work_oracle_norm(std::span<const double> quadrature,
                                           std::span<const double> raw);

/// a(e) tabulated on e_grid; tiny negatives from roundoff are clamped to 0.
DiffusionCoefficientTable coefficient_profile(const CorrelationModel& model,
                                              std::span<const double> e_grid, int n,
                                              const QuadratureOptions& opts = {},
                                              unsigned threads = 1);

/// K e^{alpha/2} on e_grid.
DiffusionCoefficientTable closed_form_profile(const TemporalEnvelope& envelope, double alpha,
                                              std::span<const double> e_grid, int n,
                                              const QuadratureOptions& opts = {});

/// The orbit double integral
///   int_0^S int_0^{2 pi} R_th v . (-Hess_x A)(-s/(2 pi n), R_th v_perp - R_{th-s} v_perp)
///       . R_{th-s} v  dth ds
/// which should be proportional to diffusion_coefficient; used to report the
/// observed constant between the two forms.
double orbit_hessian_coefficient(const CorrelationModel& model, double e, int n,
                                 int n_theta = 64, const QuadratureOptions& opts = {});

}  // namespace gkd
