// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "correlation.hpp"
#include "rng.hpp"
#include "vec2.hpp"

namespace gkd {

/// Description of a stationary random potential V(tau, x) with correlation
///   E[V(tau, x) V(sigma, y)] = rho_c(tau - sigma) C(x - y)
/// built from independent random-Fourier spatial fields U_j modulated by the
/// window c of the correlation's block-autocorrelation envelope:
///   V(tau, x) = sum_j c(tau - j b - delta) U_j(x),   delta ~ U[0, b).
struct FieldSpec {
    CorrelationModel correlation;
    int modes = 64;
    double block_length = 1.0;
    std::uint64_t master_seed = 0;

    /// Throws InvalidArgument unless the correlation is separable with a
    /// block-autocorrelation envelope of support block_length and a
    /// synthesizable (non power-law) spatial profile.
    void validate() const;

    const TemporalEnvelope& envelope() const;
    const SpatialProfile& spatial() const;

    /// Target correlation rho_c(tau) C(|x|).
    double target_correlation(double tau, Vec2 x) const;
};

/// Builds a FieldSpec whose correlation is induced by sin^window_power windows.
FieldSpec make_field_spec(const SpatialProfile& spatial, double window_power = 2.0,
                          double block_length = 1.0, int modes = 64, std::uint64_t master_seed = 0);

/// Range of block-time tau for which mode tables are precomputed.
struct TimeWindow {
    double lo = 0.0;
    double hi = 32.0;
};

/// One seeded sample of the field. Immutable; safe for concurrent evaluation.
class FieldRealization {
public:
    /// Mode table of one block, structure-of-arrays.
    struct Block {
        std::vector<double> kx, ky, phase;
    };

    /// Explicit construction; blocks[i] belongs to block index first_block + i.
    FieldRealization(TemporalEnvelope envelope, double amplitude, double delta, long first_block,
                     std::vector<Block> blocks);

    double potential(double tau, Vec2 x) const;
    Vec2 gradient(double tau, Vec2 x) const;
    /// out[i] = scale * grad V(tau, points[i] * point_scale).
    void gradient_batch(double tau, std::span<const Vec2> points, double point_scale, double scale,
                        std::span<Vec2> out) const;
    /// d/dtau V(tau, x).
    double time_derivative(double tau, Vec2 x) const;

    double time_shift() const { return delta_; }
    double amplitude() const { return amplitude_; }
    double block_length() const { return envelope_.support(); }
    long first_block() const { return first_block_; }
    std::size_t block_count() const { return blocks_.size(); }

    /// Index of the block active at tau and the local window coordinate.
    long block_index(double tau, double& local) const;

private:
    friend FieldRealization synthesize(const FieldSpec&, std::uint64_t, TimeWindow);

    const Block& block(long j, Block& scratch) const;

    TemporalEnvelope envelope_;
    double amplitude_;
    double delta_;
    long first_block_;
    std::vector<Block> blocks_;
    // Used to generate blocks outside the precomputed window on demand.
    std::uint64_t seed_ = 0;
    int modes_ = 0;
    std::optional<SpatialProfile> spatial_;
};

/// Mode table of block j for a realization seed; a pure function of its inputs.
FieldRealization::Block make_block(const SpatialProfile& spatial, int modes,
                                   std::uint64_t realization_seed, long j);

/// Realization `realization_index` of `spec`, seeded by
/// derive_seed(spec.master_seed, Field, realization_index).
FieldRealization synthesize(const FieldSpec& spec, std::uint64_t realization_index,
                            TimeWindow window = {});

struct CorrelationLag {
    double tau = 0.0;
    Vec2 x;
};

struct CorrelationEstimate {
    CorrelationLag lag;
    double target = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of E[V(tau0 + tau, x0 + x) V(tau0, x0)] over
/// n_realizations realizations with `base_points` random base points each.
/// The standard error is taken across per-realization means.
std::vector<CorrelationEstimate> empirical_correlation(const FieldSpec& spec,
                                                       std::span<const CorrelationLag> lags,
                                                       int n_realizations, int base_points = 64,
                                                       unsigned threads = 1,
                                                       double base_tau_offset = 0.0);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean of V over random points, standard error across realizations.
MeanEstimate field_mean(const FieldSpec& spec, int points_per_realization, int n_realizations,
                        unsigned threads = 1);

}  // namespace gkd
