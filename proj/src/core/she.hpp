// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "dcoeff.hpp"
#include "profile.hpp"

namespace gkd {

/// Solver state for d_t rho = d_e(a(e) d_e rho) on [0, e_max] with zero flux
/// at both ends. a_faces has cells + 1 entries, one per face; the two
/// boundary faces carry no flux whatever their value.
struct SheState {
    EnergyProfile profile;
    double time = 0.0;
    std::vector<double> a_faces;

    void validate() const;
};

/// Face values from a table (linear interpolation). The table must cover
/// [0, e_max]. With zero_at_origin the face at e = 0 is set to 0.
std::vector<double> face_coefficients(const DiffusionCoefficientTable& table, const EnergyGrid& grid,
                                      bool zero_at_origin = false);
/// Face values of an explicit coefficient function.
std::vector<double> face_coefficients(const std::function<double(double)>& a, const EnergyGrid& grid);

/// One backward-Euler step; throws InvalidArgument for dt <= 0 or a negative
/// face coefficient.
void step_implicit(SheState& state, double dt);

struct SheSnapshot {
    double time = 0.0;
    EnergyProfile profile;
};

/// Steps from `initial` to t_end (nominal step dt, shortened so every output
/// time is hit) and returns the profiles at output_times, or at t_end alone
/// when output_times is empty.
std::vector<SheSnapshot> solve(const EnergyProfile& initial, std::vector<double> a_faces, double t_end, double dt,
                               const std::vector<double>& output_times = {});
std::vector<SheSnapshot> solve(const EnergyProfile& initial, const DiffusionCoefficientTable& coeff, double t_end,
                               double dt, const std::vector<double>& output_times = {});

/// Fraction of mass in the last two cells, used to detect truncation at e_max.
double boundary_mass_fraction(const EnergyProfile& p);
inline constexpr double kBoundaryMassLimit = 1e-6;

struct ScalingFit {
    double beta_hat = 0.0;
    double std_error = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    int points = 0;
};

/// Least-squares slope of log(median) against log(t) over the snapshots with
/// t in [t_lo, t_hi]. Needs >= 5 such snapshots; rejects any of them whose
/// boundary_mass_fraction exceeds kBoundaryMassLimit.
ScalingFit self_similar_fit(const std::vector<SheSnapshot>& snapshots, double t_lo, double t_hi);

/// Largest L1 distance between a snapshot rescaled by its median,
/// q(y) = m rho(m y) / mass, and the last one in the window.
double collapse_distance(const std::vector<SheSnapshot>& snapshots, double t_lo, double t_hi);

}  // namespace gkd
