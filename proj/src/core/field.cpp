// SPDX-License-Identifier: Apache-2.0
#include "field.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "parallel.hpp"

namespace gkd {

using std::numbers::pi;

void FieldSpec::validate() const
{
    const auto* parts = correlation.separable_parts();
    if (parts == nullptr) throw InvalidArgument("field synthesis needs a separable correlation");
    if (parts->temporal.kind() != EnvelopeKind::BlockAutocorrelation)
        throw InvalidArgument("field synthesis needs a block-autocorrelation envelope");
    if (parts->spatial.kind() == SpatialKind::PowerLaw)
        throw InvalidArgument("power-law spatial profiles cannot be synthesized");
    if (!parts->spatial.synthesizable())
        throw InvalidArgument("spatial profile has no samplable spectral density");
    if (modes < 1) throw InvalidArgument("field needs at least one mode");
    if (!(block_length > 0.0)) throw InvalidArgument("block_length must be positive");
    if (std::abs(parts->temporal.support() - block_length) > 1e-12 * block_length)
        throw InvalidArgument("envelope support must equal block_length");
}

const TemporalEnvelope& FieldSpec::envelope() const
{
    const auto* parts = correlation.separable_parts();
    if (parts == nullptr) throw InvalidArgument("field synthesis needs a separable correlation");
    return parts->temporal;
}

const SpatialProfile& FieldSpec::spatial() const
{
    const auto* parts = correlation.separable_parts();
    if (parts == nullptr) throw InvalidArgument("field synthesis needs a separable correlation");
    return parts->spatial;
}

double FieldSpec::target_correlation(double tau, Vec2 x) const { return correlation(tau, x); }

FieldSpec make_field_spec(const SpatialProfile& spatial, double window_power, double block_length,
                          int modes, std::uint64_t master_seed)
{
    FieldSpec spec{CorrelationModel::separable(
                       TemporalEnvelope::block_autocorrelation(window_power, block_length), spatial),
                   modes, block_length, master_seed};
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------

FieldRealization::FieldRealization(TemporalEnvelope envelope, double amplitude, double delta,
                                   long first_block, std::vector<Block> blocks)
    : envelope_(std::move(envelope)),
      amplitude_(amplitude),
      delta_(delta),
      first_block_(first_block),
      blocks_(std::move(blocks))
{
    if (envelope_.kind() != EnvelopeKind::BlockAutocorrelation)
        throw InvalidArgument("realization needs a block-autocorrelation envelope");
}

FieldRealization::Block make_block(const SpatialProfile& spatial, int modes,
                                   std::uint64_t realization_seed, long j)
{
    Engine eng(derive_seed(realization_seed, static_cast<std::uint64_t>(j)));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    FieldRealization::Block b;
    b.kx.resize(static_cast<std::size_t>(modes));
    b.ky.resize(static_cast<std::size_t>(modes));
    b.phase.resize(static_cast<std::size_t>(modes));
    for (std::size_t m = 0; m < b.kx.size(); ++m) {
        const Vec2 k = spatial.sample_wavevector(eng);
        b.kx[m] = k.x;
        b.ky[m] = k.y;
        b.phase[m] = phase(eng);
    }
    return b;
}

FieldRealization synthesize(const FieldSpec& spec, std::uint64_t realization_index, TimeWindow window)
{
    spec.validate();
    if (!(window.hi >= window.lo)) throw InvalidArgument("time window must satisfy lo <= hi");
    const std::uint64_t seed = derive_seed(spec.master_seed, StreamTag::Field, realization_index);
    Engine shift_eng(splitmix64(seed ^ 0x5bd1e9955bd1e995ULL));
    const double b = spec.block_length;
    const double delta = b * uniform01(shift_eng);

    const long first = static_cast<long>(std::floor((window.lo - delta) / b));
    const long last = static_cast<long>(std::floor((window.hi - delta) / b));
    std::vector<FieldRealization::Block> blocks;
    blocks.reserve(static_cast<std::size_t>(last - first + 1));
    for (long j = first; j <= last; ++j) blocks.push_back(make_block(spec.spatial(), spec.modes, seed, j));

    const double amplitude = std::sqrt(spec.spatial().variance() * 2.0 / spec.modes);
    FieldRealization real(spec.envelope(), amplitude, delta, first, std::move(blocks));
    real.seed_ = seed;
    real.modes_ = spec.modes;
    real.spatial_ = spec.spatial();
    return real;
}

long FieldRealization::block_index(double tau, double& local) const
{
    const double b = envelope_.support();
    const long j = static_cast<long>(std::floor((tau - delta_) / b));
    local = tau - delta_ - static_cast<double>(j) * b;
    return j;
}

const FieldRealization::Block& FieldRealization::block(long j, Block& scratch) const
{
    const long i = j - first_block_;
    if (i >= 0 && i < static_cast<long>(blocks_.size())) return blocks_[static_cast<std::size_t>(i)];
    if (!spatial_) throw InvalidArgument("block outside the realization's time window");
    scratch = make_block(*spatial_, modes_, seed_, j);
    return scratch;
}

double FieldRealization::potential(double tau, Vec2 x) const
{
    double u = 0.0;
    const long j = block_index(tau, u);
    const double c = envelope_.window(u);
    if (c == 0.0 || amplitude_ == 0.0) return 0.0;
    Block scratch;
    const auto& blk = block(j, scratch);
    double sum = 0.0;
    for (std::size_t m = 0; m < blk.kx.size(); ++m)
        sum += std::cos(blk.kx[m] * x.x + blk.ky[m] * x.y + blk.phase[m]);
    return amplitude_ * c * sum;
}

double FieldRealization::time_derivative(double tau, Vec2 x) const
{
    double u = 0.0;
    const long j = block_index(tau, u);
    const double dc = envelope_.window_derivative(u);
    if (dc == 0.0 || amplitude_ == 0.0) return 0.0;
    Block scratch;
    const auto& blk = block(j, scratch);
    double sum = 0.0;
    for (std::size_t m = 0; m < blk.kx.size(); ++m)
        sum += std::cos(blk.kx[m] * x.x + blk.ky[m] * x.y + blk.phase[m]);
    return amplitude_ * dc * sum;
}

Vec2 FieldRealization::gradient(double tau, Vec2 x) const
{
    Vec2 out;
    gradient_batch(tau, std::span<const Vec2>(&x, 1), 1.0, 1.0, std::span<Vec2>(&out, 1));
    return out;
}

void FieldRealization::gradient_batch(double tau, std::span<const Vec2> points, double point_scale,
                                      double scale, std::span<Vec2> out) const
{
    if (out.size() < points.size()) throw InvalidArgument("gradient_batch output too small");
    double u = 0.0;
    const long j = block_index(tau, u);
    const double c = envelope_.window(u);
    const double factor = -scale * amplitude_ * c;
    if (factor == 0.0) {
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = Vec2{};
        return;
    }
    Block scratch;
    const auto& blk = block(j, scratch);
    const std::size_t modes = blk.kx.size();
    const double* kx = blk.kx.data();
    const double* ky = blk.ky.data();
    const double* ph = blk.phase.data();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double px = points[i].x * point_scale;
        const double py = points[i].y * point_scale;
        double gx = 0.0;
        double gy = 0.0;
        for (std::size_t m = 0; m < modes; ++m) {
            const double s = std::sin(kx[m] * px + ky[m] * py + ph[m]);
            gx += s * kx[m];
            gy += s * ky[m];
        }
        out[i] = Vec2{factor * gx, factor * gy};
    }
}

// ---------------------------------------------------------------------------
// Empirical checks
// ---------------------------------------------------------------------------

std::vector<CorrelationEstimate> empirical_correlation(const FieldSpec& spec,
                                                       std::span<const CorrelationLag> lags,
                                                       int n_realizations, int base_points,
                                                       unsigned threads, double base_tau_offset)
{
    spec.validate();
    if (n_realizations < 100) throw InvalidArgument("empirical_correlation needs >= 100 realizations");
    if (base_points < 1) throw InvalidArgument("base_points must be >= 1");

    const double b = spec.block_length;
    const double ell = spec.spatial().kind() == SpatialKind::GaussianBump ? spec.spatial().length() : 1.0;
    double max_tau = 0.0;
    for (const auto& l : lags) max_tau = std::max(max_tau, std::abs(l.tau));
    const double tau_lo = base_tau_offset - max_tau;
    const double tau_hi = base_tau_offset + 8.0 * b + max_tau;

    const auto nr = static_cast<std::size_t>(n_realizations);
    std::vector<std::vector<double>> means(nr, std::vector<double>(lags.size(), 0.0));
    parallel_for(nr, threads, [&](std::size_t r) {
        const auto real = synthesize(spec, r, TimeWindow{tau_lo - b, tau_hi + b});
        Engine eng(derive_seed(spec.master_seed, StreamTag::Sampling, r));
        std::uniform_real_distribution<double> ut(base_tau_offset, base_tau_offset + 8.0 * b);
        std::uniform_real_distribution<double> ux(0.0, 50.0 * ell);
        auto& row = means[r];
        for (int p = 0; p < base_points; ++p) {
            const double t0 = ut(eng);
            const double x0 = ux(eng);
            const Vec2 base{x0, ux(eng)};
            const double v0 = real.potential(t0, base);
            for (std::size_t l = 0; l < lags.size(); ++l)
                row[l] += real.potential(t0 + lags[l].tau, base + lags[l].x) * v0;
        }
        for (auto& m : row) m /= base_points;
    });

    std::vector<CorrelationEstimate> out;
    out.reserve(lags.size());
    for (std::size_t l = 0; l < lags.size(); ++l) {
        double sum = 0.0;
        double sum2 = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
            sum += means[r][l];
            sum2 += means[r][l] * means[r][l];
        }
        const double mean = sum / n_realizations;
        const double var = std::max(0.0, (sum2 - n_realizations * mean * mean) / (n_realizations - 1));
        out.push_back({lags[l], spec.target_correlation(lags[l].tau, lags[l].x), mean,
                       std::sqrt(var / n_realizations)});
    }
    return out;
}

MeanEstimate field_mean(const FieldSpec& spec, int points_per_realization, int n_realizations,
                        unsigned threads)
{
    spec.validate();
    if (n_realizations < 2 || points_per_realization < 1)
        throw InvalidArgument("field_mean needs >= 2 realizations and >= 1 point");
    const double b = spec.block_length;
    const double ell = spec.spatial().kind() == SpatialKind::GaussianBump ? spec.spatial().length() : 1.0;
    const auto nr = static_cast<std::size_t>(n_realizations);
    std::vector<double> means(nr, 0.0);
    parallel_for(nr, threads, [&](std::size_t r) {
        const auto real = synthesize(spec, r, TimeWindow{-b, 9.0 * b});
        Engine eng(derive_seed(spec.master_seed, StreamTag::Sampling, r + 0x10000000ULL));
        std::uniform_real_distribution<double> ut(0.0, 8.0 * b);
        std::uniform_real_distribution<double> ux(0.0, 50.0 * ell);
        double s = 0.0;
        for (int p = 0; p < points_per_realization; ++p) {
            const double t = ut(eng);
            const double x = ux(eng);
            s += real.potential(t, Vec2{x, ux(eng)});
        }
        means[r] = s / points_per_realization;
    });
    double sum = 0.0;
    double sum2 = 0.0;
    for (double m : means) {
        sum += m;
        sum2 += m * m;
    }
    const double mean = sum / n_realizations;
    const double var = std::max(0.0, (sum2 - n_realizations * mean * mean) / (n_realizations - 1));
    return {mean, std::sqrt(var / n_realizations)};
}

}  // namespace gkd
