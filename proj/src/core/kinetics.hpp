// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "field.hpp"
#include "profile.hpp"
#include "vec2.hpp"

namespace gkd {

/// Particles of the rescaled Vlasov characteristics
///   x' = v,   v' = v_perp / eps + eps^{-1/2} grad V(t / (2 pi n eps), x / eps)
/// on the periodic square [0, L)^2. Positions are kept wrapped; `winding`
/// counts the boxes crossed so the field is evaluated on the covering plane
/// (the field is not L-periodic, and sampling it at the wrapped point would
/// make a particle jump to an unrelated part of the field at every crossing).
struct ParticleEnsemble {
    std::vector<Vec2> x;
    std::vector<Vec2> v;
    std::vector<std::array<std::int32_t, 2>> winding;
    double eps = 0.1;
    int n = 1;
    double t = 0.0;
    double box = 1.0;

    std::size_t size() const { return x.size(); }
    Vec2 lifted(std::size_t i) const;
    double energy(std::size_t i) const { return 0.5 * norm2(v[i]); }
    std::vector<double> energies() const;
    /// Throws InvalidArgument on size mismatch, empty ensemble, eps <= 0,
    /// n < 1 or non-finite coordinates.
    void validate() const;
};

enum class PushScheme { StrangKRK };

struct PushConfig {
    double dt = 0.0;
    double t_end = 1.0;
    std::vector<double> output_times;
    PushScheme scheme = PushScheme::StrangKRK;

    /// dt = 2 pi eps / steps_per_gyro.
    static PushConfig for_epsilon(double eps, double t_end, std::vector<double> output_times,
                                  int steps_per_gyro = 64);
    /// 0 < dt <= 2 pi eps / 16; output times ascending in [0, t_end].
    void validate(double eps) const;
};

/// Exact field-free flow over time t (t may be negative): rotation of v at
/// angular frequency 1/eps counter-clockwise, so that dv/dt = v_perp / eps.
std::pair<Vec2, Vec2> free_flow(Vec2 x, Vec2 v, double t, double eps);

/// One kick-drift-kick step of signed length dt (|dt| <= 2 pi eps / 16).
/// A negative dt retraces a positive step exactly up to roundoff.
void strang_step(ParticleEnsemble& ens, const FieldRealization& field, double dt);

/// Field-free step (identical to strang_step with a zero field).
void free_step(ParticleEnsemble& ens, double dt);

struct InitialDistribution {
    enum class Kind { Delta, SmoothBump };
    Kind kind = Kind::Delta;
    double e0 = 1.0;
    double width = 0.25;  // SmoothBump half-width

    static InitialDistribution delta(double e0) { return {Kind::Delta, e0, 0.0}; }
    static InitialDistribution smooth_bump(double e0, double width) { return {Kind::SmoothBump, e0, width}; }

    void validate() const;
    /// Energy sample: e0, or the bump density prop. to (1 - z^2)^2, z = (e - e0)/width, on e >= 0.
    double sample_energy(Engine& eng) const;
    /// The same law on a grid (unit mass); Delta becomes delta_profile.
    EnergyProfile profile(const EnergyGrid& grid) const;
};

/// Particles with energies from `init`, uniform gyro-phase and uniform
/// positions, drawn from derive_seed(seed, Init, realization_index).
ParticleEnsemble initialize_ensemble(const InitialDistribution& init, double eps, int n,
                                     std::size_t particles, std::uint64_t seed,
                                     std::uint64_t realization_index);

struct EnergyRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> energies;  // energies[i] at times[i]
};

/// Pushes an initialized ensemble to cfg.t_end through the given field,
/// recording energies at cfg.output_times. Steps are shortened slightly so
/// every output time is hit exactly.
EnergyRecord push_ensemble(ParticleEnsemble& ens, const FieldRealization& field, const PushConfig& cfg);

/// Field realization `realization_index` of spec with master seed `seed`,
/// covering the block-times needed up to t_end.
FieldRealization realization_for_run(const FieldSpec& spec, double eps, int n, double t_end,
                                     std::uint64_t seed, std::uint64_t realization_index);

/// initialize_ensemble + realization_for_run + push_ensemble.
EnergyRecord simulate_ensemble(const InitialDistribution& init, const FieldSpec& spec, double eps, int n,
                               const PushConfig& cfg, std::size_t particles, std::uint64_t seed,
                               std::uint64_t realization_index);

struct Histogram {
    EnergyProfile profile;
    std::size_t out_of_range = 0;
};

/// Histogram of the samples normalized to a unit-mass density over the
/// in-range samples; samples outside [0, e_max] are counted, not binned.
Histogram gyro_average_histogram(const std::vector<double>& energies, const EnergyGrid& grid);

}  // namespace gkd
