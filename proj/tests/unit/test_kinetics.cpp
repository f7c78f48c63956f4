// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "errors.hpp"
#include "kinetics.hpp"

using namespace gkd;
using std::numbers::pi;

namespace {

// Classical RK4 for x' = v, v' = v_perp / eps.
std::pair<Vec2, Vec2> rk4_gyration(Vec2 x, Vec2 v, double t, double eps, double h)
{
    const auto steps = static_cast<long>(std::ceil(t / h));
    h = t / static_cast<double>(steps);
    auto acc = [eps](Vec2 w) { return (1.0 / eps) * perp(w); };
    for (long i = 0; i < steps; ++i) {
        const Vec2 k1x = v, k1v = acc(v);
        const Vec2 k2x = v + 0.5 * h * k1v, k2v = acc(v + 0.5 * h * k1v);
        const Vec2 k3x = v + 0.5 * h * k2v, k3v = acc(v + 0.5 * h * k2v);
        const Vec2 k4x = v + h * k3v, k4v = acc(v + h * k3v);
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return {x, v};
}

ParticleEnsemble small_ensemble(double eps, std::size_t n = 64, std::uint64_t seed = 1)
{
    return initialize_ensemble(InitialDistribution::smooth_bump(1.0, 0.5), eps, 1, n, seed, 0);
}

double max_state_error(const ParticleEnsemble& a, const ParticleEnsemble& b)
{
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err = std::max(err, norm(a.lifted(i) - b.lifted(i)));
        err = std::max(err, norm(a.v[i] - b.v[i]));
    }
    return err;
}

FieldRealization single_mode_field()
{
    // One block; delta = -0.3 puts the block boundaries at 0.7 + j.
    const auto env = TemporalEnvelope::block_autocorrelation(2.0, 1.0);
    FieldRealization::Block blk{{0.9, -0.4}, {0.3, 1.1}, {0.2, 1.3}};
    return FieldRealization(env, 0.8, -0.3, -1, {blk, blk, blk});
}

}  // namespace

TEST_CASE("free flow: identity, periodicity and the worked example")
{
    const Vec2 x{0.3, -0.2};
    const Vec2 v{0.7, 1.1};
    auto [x0, v0] = free_flow(x, v, 0.0, 0.2);
    CHECK(x0 == x);
    CHECK(v0 == v);
    for (int k : {1, 3}) {
        auto [x1, v1] = free_flow(x, v, 2.0 * pi * 0.2 * k, 0.2);
        CHECK(norm(x1 - x) < 1e-12);
        CHECK(norm(v1 - v) < 1e-12);
    }
    auto [xe, ve] = free_flow(Vec2{}, Vec2{1.0, 0.0}, pi, 1.0);
    CHECK(std::abs(ve.x + 1.0) < 1e-15);
    CHECK(std::abs(ve.y) < 1e-15);
    CHECK(std::abs(xe.x) < 1e-15);
    CHECK(std::abs(xe.y - 2.0) < 1e-15);
    CHECK_THROWS_AS(free_flow(x, v, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("free flow matches an RK4 reference")
{
    auto [xr, vr] = rk4_gyration(Vec2{}, Vec2{1.0, 0.0}, pi, 1.0, 1e-6);
    auto [xe, ve] = free_flow(Vec2{}, Vec2{1.0, 0.0}, pi, 1.0);
    CHECK(norm(xr - xe) < 1e-9);
    CHECK(norm(vr - ve) < 1e-9);

    auto [x2, v2] = rk4_gyration(Vec2{0.1, 0.4}, Vec2{-0.3, 0.8}, 0.9, 0.3, 1e-5);
    auto [x3, v3] = free_flow(Vec2{0.1, 0.4}, Vec2{-0.3, 0.8}, 0.9, 0.3);
    CHECK(norm(x2 - x3) < 1e-9);
    CHECK(norm(v2 - v3) < 1e-9);
}

TEST_CASE("field-free stepping conserves energy and returns after one gyro-period")
{
    const double eps = 0.05;
    auto ens = small_ensemble(eps);
    const auto e0 = ens.energies();
    const auto start = ens;
    const double dt = 2.0 * pi * eps / 64.0;
    for (int s = 0; s < 64; ++s) free_step(ens, dt);
    CHECK(max_state_error(ens, start) < 1e-12);
    for (int s = 64; s < 10000; ++s) free_step(ens, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) worst = std::max(worst, std::abs(ens.energy(i) - e0[i]) / e0[i]);
    CHECK(worst < 1e-12);
}

TEST_CASE("Strang step with a zero field is the free flow")
{
    const auto zero = synthesize(make_field_spec(SpatialProfile::gaussian_bump(0.0, 1.0), 2.0, 1.0, 4, 1), 0);
    auto a = small_ensemble(0.1);
    auto b = a;
    const double dt = 2.0 * pi * 0.1 / 32.0;
    strang_step(a, zero, dt);
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto [x1, v1] = free_flow(b.lifted(i), b.v[i], dt, b.eps);
        CHECK(norm(a.lifted(i) - x1) < 1e-14);
        CHECK(norm(a.v[i] - v1) < 1e-15);
    }
    CHECK(a.t == dt);
    CHECK_THROWS_AS(strang_step(a, zero, 2.0 * pi * 0.1 / 8.0), InvalidArgument);
}

TEST_CASE("Strang stepping is time-reversible")
{
    const auto spec = make_field_spec(SpatialProfile::gaussian_bump(1.0, 1.0), 2.0, 1.0, 64, 9);
    const double eps = 0.05;
    const auto field = realization_for_run(spec, eps, 1, 1.0, 9, 0);
    auto ens = small_ensemble(eps, 32);
    const auto start = ens;
    const double dt = 2.0 * pi * eps / 64.0;
    for (int s = 0; s < 1000; ++s) strang_step(ens, field, dt);
    CHECK(max_state_error(ens, start) > 1e-3);
    for (int s = 0; s < 1000; ++s) strang_step(ens, field, -dt);
    CHECK(max_state_error(ens, start) < 1e-9);
    CHECK(std::abs(ens.t) < 1e-12);
}

TEST_CASE("Strang splitting converges at second order")
{
    const auto field = single_mode_field();
    const double eps = 0.1;
    const double span = pi * eps;  // block time 0 to 0.5, away from block edges
    auto run = [&](int steps) {
        auto ens = small_ensemble(eps, 16, 3);
        for (int s = 0; s < steps; ++s) strang_step(ens, field, span / steps);
        return ens;
    };
    const auto ref = run(16 * 64);
    double prev = 0.0;
    for (int steps : {16, 32, 64}) {
        const double err = max_state_error(run(steps), ref);
        if (prev > 0.0) {
            const double order = std::log2(prev / err);
            CHECK(order >= 1.9);
            CHECK(order <= 2.1);
        }
        prev = err;
    }
}

TEST_CASE("zero field keeps every energy at e0")
{
    const auto spec = make_field_spec(SpatialProfile::gaussian_bump(0.0, 1.0), 2.0, 1.0, 8, 1);
    const auto cfg = PushConfig::for_epsilon(0.1, 0.5, {0.25, 0.5});
    const auto rec = simulate_ensemble(InitialDistribution::delta(1.0), spec, 0.1, 1, cfg, 100, 5, 0);
    REQUIRE(rec.times.size() == 2);
    CHECK(rec.times[1] == 0.5);
    for (const auto& es : rec.energies)
        for (double e : es) CHECK(std::abs(e - 1.0) < 1e-12);
}

TEST_CASE("simulation is deterministic and spatially homogeneous")
{
    const auto spec = make_field_spec(SpatialProfile::gaussian_bump(1.0, 1.0), 2.0, 1.0, 64, 2);
    const double eps = 0.05;
    const auto cfg = PushConfig::for_epsilon(eps, 0.5, {});
    const auto a = simulate_ensemble(InitialDistribution::delta(1.0), spec, eps, 1, cfg, 200, 17, 3);
    const auto b = simulate_ensemble(InitialDistribution::delta(1.0), spec, eps, 1, cfg, 200, 17, 3);
    CHECK(a.energies == b.energies);

    auto ens = initialize_ensemble(InitialDistribution::delta(1.0), eps, 1, 4000, 17, 4);
    const auto field = realization_for_run(spec, eps, 1, 0.5, 17, 4);
    push_ensemble(ens, field, cfg);
    double s[2] = {0, 0}, s2[2] = {0, 0};
    double cnt[2] = {0, 0};
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const int side = ens.x[i].x < 0.5 ? 0 : 1;
        const double e = ens.energy(i);
        s[side] += e;
        s2[side] += e * e;
        cnt[side] += 1;
    }
    double mean[2], var[2];
    for (int k = 0; k < 2; ++k) {
        mean[k] = s[k] / cnt[k];
        var[k] = (s2[k] / cnt[k] - mean[k] * mean[k]) / cnt[k];
    }
    CHECK(std::abs(mean[0] - mean[1]) < 4.0 * std::sqrt(var[0] + var[1]));
    for (std::size_t i = 0; i < ens.size(); ++i) {
        CHECK(ens.x[i].x >= 0.0);
        CHECK(ens.x[i].x < 1.0);
    }
}

TEST_CASE("push configuration and ensemble validation")
{
    CHECK_THROWS_AS(PushConfig::for_epsilon(0.1, 1.0, {}, 8), InvalidArgument);
    auto cfg = PushConfig::for_epsilon(0.1, 1.0, {0.5, 0.25});
    CHECK_THROWS_AS(cfg.validate(0.1), InvalidArgument);
    cfg.output_times = {0.5, 1.5};
    CHECK_THROWS_AS(cfg.validate(0.1), InvalidArgument);
    cfg.output_times = {};
    cfg.dt = 2.0 * pi * 0.1 / 10.0;
    CHECK_THROWS_AS(cfg.validate(0.1), InvalidArgument);

    ParticleEnsemble empty;
    CHECK_THROWS_AS(empty.validate(), InvalidArgument);
    auto ens = small_ensemble(0.1, 4);
    ens.v[2].x = NAN;
    CHECK_THROWS_AS(ens.validate(), InvalidArgument);
    CHECK_THROWS_AS(InitialDistribution::smooth_bump(1.0, 0.0).validate(), InvalidArgument);
}

TEST_CASE("initial distributions")
{
    const auto bump = InitialDistribution::smooth_bump(1.0, 0.5);
    Engine eng(1);
    for (int i = 0; i < 1000; ++i) {
        const double e = bump.sample_energy(eng);
        CHECK(e >= 0.5);
        CHECK(e <= 1.5);
    }
    const EnergyGrid grid{4.0, 64};
    CHECK(bump.profile(grid).mass() == doctest::Approx(1.0).epsilon(1e-14));
    const auto ens = initialize_ensemble(InitialDistribution::delta(2.0), 0.1, 1, 50, 3, 0);
    for (std::size_t i = 0; i < ens.size(); ++i) CHECK(ens.energy(i) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("gyro-average histograms")
{
    const EnergyGrid grid{2.0, 16};
    auto h = gyro_average_histogram(std::vector<double>(100, 0.9), grid);
    CHECK(h.profile.mass() == doctest::Approx(1.0).epsilon(1e-14));
    int nonzero = 0;
    for (double d : h.profile.density) nonzero += d > 0.0;
    CHECK(nonzero == 1);

    std::vector<double> samples{0.5, -0.1, 3.0, 1.0};
    h = gyro_average_histogram(samples, grid);
    CHECK(h.out_of_range == 2);
    CHECK(h.profile.mass() == doctest::Approx(1.0));
    CHECK_THROWS_AS(gyro_average_histogram({}, grid), InvalidArgument);

    // Uniform law on [0, 1] with 10 bins: density 1 within binomial stderr.
    const EnergyGrid unit{1.0, 10};
    Engine eng(5);
    std::vector<double> u(20000);
    for (double& x : u) x = uniform01(eng);
    h = gyro_average_histogram(u, unit);
    const double se = std::sqrt(0.1 * 0.9 / 20000.0) / 0.1;
    for (double d : h.profile.density) CHECK(std::abs(d - 1.0) < 4.0 * se);
}

TEST_CASE("histogram of samples from a known density")
{
    // Density p(e) = e exp(-e) (a Gamma(2) law), sampled as the sum of two exponentials.
    const EnergyGrid grid{12.0, 48};
    const std::size_t n = 50000;
    Engine eng(8);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> samples(n);
    for (double& s : samples) s = expo(eng) + expo(eng);
    const auto h = gyro_average_histogram(samples, grid);

    auto cdf = [](double e) { return 1.0 - (1.0 + e) * std::exp(-e); };
    const double de = grid.width();
    double l1 = 0.0;
    double expected = 0.0;
    const double inside = cdf(grid.e_max);
    for (int k = 0; k < grid.cells; ++k) {
        const double pk = (cdf(grid.face(k + 1)) - cdf(grid.face(k))) / inside;
        const double centre = grid.center(k) * std::exp(-grid.center(k)) / inside;
        l1 += std::abs(h.profile.density[static_cast<std::size_t>(k)] - centre) * de;
        expected += std::sqrt(2.0 / pi) * std::sqrt(pk * (1.0 - pk) / static_cast<double>(n));  // sampling
        expected += std::abs(pk / de - centre) * de;                                            // binning
    }
    CHECK(l1 <= 2.0 * expected);
}
