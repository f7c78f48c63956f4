// SPDX-License-Identifier: Apache-2.0
#include "kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace gkd {

using std::numbers::pi;

Vec2 ParticleEnsemble::lifted(std::size_t i) const
{
    return {x[i].x + box * winding[i][0], x[i].y + box * winding[i][1]};
}

std::vector<double> ParticleEnsemble::energies() const
{
    std::vector<double> e(size());
    for (std::size_t i = 0; i < size(); ++i) e[i] = energy(i);
    return e;
}

void ParticleEnsemble::validate() const
{
    if (x.empty()) throw InvalidArgument("ensemble is empty");
    if (v.size() != x.size() || winding.size() != x.size())
        throw InvalidArgument("ensemble arrays have different lengths");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (!(box > 0.0)) throw InvalidArgument("box side must be positive");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i].x) || !std::isfinite(x[i].y) || !std::isfinite(v[i].x) || !std::isfinite(v[i].y))
            throw InvalidArgument("non-finite particle coordinate at index " + std::to_string(i));
}

PushConfig PushConfig::for_epsilon(double eps, double t_end, std::vector<double> output_times, int steps_per_gyro)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (steps_per_gyro < 16) throw InvalidArgument("need at least 16 steps per gyro-period");
    PushConfig cfg;
    cfg.dt = 2.0 * pi * eps / steps_per_gyro;
    cfg.t_end = t_end;
    cfg.output_times = std::move(output_times);
    return cfg;
}

void PushConfig::validate(double eps) const
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (dt > 2.0 * pi * eps / 16.0 * (1.0 + 1e-12)) throw InvalidArgument("dt exceeds 2 pi eps / 16");
    if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be >= 0");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (!(output_times[i] >= 0.0 && output_times[i] <= t_end))
            throw InvalidArgument("output time outside [0, t_end]");
        if (i > 0 && !(output_times[i] > output_times[i - 1]))
            throw InvalidArgument("output times must be strictly increasing");
    }
}

std::pair<Vec2, Vec2> free_flow(Vec2 x, Vec2 v, double t, double eps)
{
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const Vec2 v1 = rotate(v, t / eps);
    return {x + eps * (perp(v) - perp(v1)), v1};
}

namespace {

void check_step(const ParticleEnsemble& ens, double dt)
{
    if (!std::isfinite(dt)) throw InvalidArgument("dt must be finite");
    if (std::abs(dt) > 2.0 * pi * ens.eps / 16.0 * (1.0 + 1e-12))
        throw InvalidArgument("|dt| exceeds 2 pi eps / 16");
}

void wrap(ParticleEnsemble& ens, std::size_t i)
{
    auto fold = [&](double& c, std::int32_t& w) {
        if (c >= 0.0 && c < ens.box) return;
        const double k = std::floor(c / ens.box);
        c -= k * ens.box;
        if (c >= ens.box) c -= ens.box;  // roundoff at the upper edge
        if (c < 0.0) c = 0.0;
        w += static_cast<std::int32_t>(k);
    };
    fold(ens.x[i].x, ens.winding[i][0]);
    fold(ens.x[i].y, ens.winding[i][1]);
}

void drift(ParticleEnsemble& ens, double dt)
{
    const double angle = dt / ens.eps;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double eps = ens.eps;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const Vec2 v = ens.v[i];
        const Vec2 v1{c * v.x - s * v.y, s * v.x + c * v.y};
        ens.x[i] += eps * (perp(v) - perp(v1));
        ens.v[i] = v1;
        wrap(ens, i);
    }
}

class Kicker {
public:
    explicit Kicker(std::size_t count) : points_(count), force_(count) {}

    /// v += h eps^{-1/2} grad V(t / (2 pi n eps), x / eps) at the ensemble's current time.
    void operator()(ParticleEnsemble& ens, const FieldRealization& field, double h)
    {
        for (std::size_t i = 0; i < ens.size(); ++i) points_[i] = ens.lifted(i);
        const double tau = ens.t / (2.0 * pi * ens.n * ens.eps);
        field.gradient_batch(tau, points_, 1.0 / ens.eps, h / std::sqrt(ens.eps), force_);
        for (std::size_t i = 0; i < ens.size(); ++i) ens.v[i] += force_[i];
    }

private:
    std::vector<Vec2> points_;
    std::vector<Vec2> force_;
};

}  // namespace

void strang_step(ParticleEnsemble& ens, const FieldRealization& field, double dt)
{
    check_step(ens, dt);
    Kicker kick(ens.size());
    kick(ens, field, 0.5 * dt);
    drift(ens, dt);
    ens.t += dt;
    kick(ens, field, 0.5 * dt);
}

void free_step(ParticleEnsemble& ens, double dt)
{
    check_step(ens, dt);
    drift(ens, dt);
    ens.t += dt;
}

void InitialDistribution::validate() const
{
    if (!(e0 >= 0.0) || !std::isfinite(e0)) throw InvalidArgument("initial energy e0 must be >= 0");
    if (kind == Kind::SmoothBump && !(width > 0.0)) throw InvalidArgument("smooth bump width must be positive");
}

double InitialDistribution::sample_energy(Engine& eng) const
{
    if (kind == Kind::Delta) return e0;
    for (;;) {
        const double z = 2.0 * uniform01(eng) - 1.0;
        const double w = 1.0 - z * z;
        if (uniform01(eng) < w * w) {
            const double e = e0 + width * z;
            if (e >= 0.0) return e;
        }
    }
}

EnergyProfile InitialDistribution::profile(const EnergyGrid& grid) const
{
    validate();
    if (kind == Kind::Delta) return delta_profile(grid, e0);
    EnergyProfile p(grid);
    // Cell averages by 8-point midpoint sub-sampling; the bump is C^1.
    const int sub = 8;
    const double de = grid.width();
    for (int k = 0; k < grid.cells; ++k) {
        double s = 0.0;
        for (int j = 0; j < sub; ++j) {
            const double z = (grid.face(k) + (j + 0.5) * de / sub - e0) / width;
            if (std::abs(z) < 1.0) s += (1.0 - z * z) * (1.0 - z * z);
        }
        p.density[static_cast<std::size_t>(k)] = s / sub;
    }
    p.normalize();
    return p;
}

ParticleEnsemble initialize_ensemble(const InitialDistribution& init, double eps, int n, std::size_t particles,
                                     std::uint64_t seed, std::uint64_t realization_index)
{
    init.validate();
    if (particles < 1) throw InvalidArgument("need at least one particle");
    ParticleEnsemble ens;
    ens.eps = eps;
    ens.n = n;
    ens.x.resize(particles);
    ens.v.resize(particles);
    ens.winding.assign(particles, {0, 0});
    Engine eng(derive_seed(seed, StreamTag::Init, realization_index));
    for (std::size_t i = 0; i < particles; ++i) {
        const double e = init.sample_energy(eng);
        const double phase = 2.0 * pi * uniform01(eng);
        const double speed = std::sqrt(2.0 * e);
        ens.v[i] = {speed * std::cos(phase), speed * std::sin(phase)};
        ens.x[i] = {ens.box * uniform01(eng), ens.box * uniform01(eng)};
    }
    ens.validate();
    return ens;
}

EnergyRecord push_ensemble(ParticleEnsemble& ens, const FieldRealization& field, const PushConfig& cfg)
{
    ens.validate();
    cfg.validate(ens.eps);
    std::vector<double> targets = cfg.output_times;
    if (targets.empty()) targets.push_back(cfg.t_end);
    if (targets.back() < cfg.t_end) targets.push_back(cfg.t_end);

    EnergyRecord rec;
    Kicker kick(ens.size());
    const std::size_t recorded = cfg.output_times.empty() ? targets.size() : cfg.output_times.size();
    for (std::size_t o = 0; o < targets.size(); ++o) {
        const double t0 = ens.t;
        const double span = targets[o] - t0;
        if (span < -1e-12) throw InvalidArgument("ensemble time is past an output time");
        if (span > 0.0) {
            const auto steps = static_cast<long>(std::ceil(span / cfg.dt - 1e-9));
            const double h = span / static_cast<double>(steps);
            kick(ens, field, 0.5 * h);
            for (long s = 0; s < steps; ++s) {
                drift(ens, h);
                ens.t = (s + 1 == steps) ? targets[o] : t0 + static_cast<double>(s + 1) * h;
                kick(ens, field, s + 1 == steps ? 0.5 * h : h);
            }
        }
        if (o < recorded) {
            rec.times.push_back(targets[o]);
            rec.energies.push_back(ens.energies());
        }
    }
    return rec;
}

FieldRealization realization_for_run(const FieldSpec& spec, double eps, int n, double t_end, std::uint64_t seed,
                                     std::uint64_t realization_index)
{
    FieldSpec seeded = spec;
    seeded.master_seed = seed;
    const double b = spec.block_length;
    return synthesize(seeded, realization_index, TimeWindow{-b, t_end / (2.0 * pi * n * eps) + b});
}

EnergyRecord simulate_ensemble(const InitialDistribution& init, const FieldSpec& spec, double eps, int n,
                               const PushConfig& cfg, std::size_t particles, std::uint64_t seed,
                               std::uint64_t realization_index)
{
    auto ens = initialize_ensemble(init, eps, n, particles, seed, realization_index);
    const auto field = realization_for_run(spec, eps, n, cfg.t_end, seed, realization_index);
    return push_ensemble(ens, field, cfg);
}

Histogram gyro_average_histogram(const std::vector<double>& energies, const EnergyGrid& grid)
{
    grid.validate();
    if (energies.empty()) throw InvalidArgument("histogram of an empty sample");
    Histogram h{EnergyProfile(grid), 0};
    std::size_t inside = 0;
    const double de = grid.width();
    for (double e : energies) {
        if (!(e >= 0.0 && e <= grid.e_max)) {
            ++h.out_of_range;
            continue;
        }
        const int k = std::min(grid.cells - 1, static_cast<int>(e / de));
        h.profile.density[static_cast<std::size_t>(k)] += 1.0;
        ++inside;
    }
    if (inside > 0)
        for (double& d : h.profile.density) d /= static_cast<double>(inside) * de;
    return h;
}

}  // namespace gkd
