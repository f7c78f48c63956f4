// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "correlation.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace gkd;
using std::numbers::pi;

namespace {

// Autocorrelation of the window by a fine midpoint rule, independent of the
// closed form and of the Gauss-Legendre path inside the library.
double midpoint_autocorrelation(const TemporalEnvelope& env, double lag)
{
    const double b = env.support();
    const int n = 200000;
    const double h = (b - lag) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) * h;
        s += env.window(u) * env.window(u + lag);
    }
    return s * h;
}

double fd2(const std::function<double(double)>& f, double t, double h)
{
    return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
}

}  // namespace

TEST_CASE("block autocorrelation envelope equals the window autocorrelation")
{
    for (double p : {2.0, 3.0, 4.5}) {
        for (double b : {1.0, 0.7}) {
            const auto env = TemporalEnvelope::block_autocorrelation(p, b);
            CHECK(env.value(0.0) == doctest::Approx(1.0).epsilon(1e-9));
            for (double frac : {0.0, 0.1, 0.35, 0.5, 0.8, 0.97}) {
                const double lag = frac * b;
                CHECK(env.value(lag) == doctest::Approx(midpoint_autocorrelation(env, lag)).epsilon(1e-8));
                CHECK(env.value(-lag) == env.value(lag));
            }
            CHECK(env.value(b) == 0.0);
            CHECK(env.value(1.5 * b) == 0.0);
        }
    }
}

TEST_CASE("envelope second derivatives agree with finite differences")
{
    const auto rc = TemporalEnvelope::raised_cosine_power(3.0, 1.3);
    const auto ba2 = TemporalEnvelope::block_autocorrelation(2.0, 1.0);
    const auto ba3 = TemporalEnvelope::block_autocorrelation(3.0, 2.0);
    for (const auto* env : {&rc, &ba2, &ba3}) {
        REQUIRE(env->has_analytic_second_derivative());
        const double T = env->support();
        for (double frac : {0.05, 0.2, 0.5, 0.77}) {
            const double t = frac * T;
            const double fd = fd2([&](double x) { return env->value(x); }, t, 1e-4 * T);
            CHECK(env->second_derivative(t) == doctest::Approx(fd).epsilon(1e-5).scale(1.0 / (T * T)));
        }
    }
    // Closed value at the origin for sin^2 windows: f''(0) = -4 pi^2 / (3 b^2).
    CHECK(ba2.second_derivative(0.0) == doctest::Approx(-4.0 * pi * pi / 3.0).epsilon(1e-12));
    // Raised cosine: f = cos^p(w t), f''(0) = -p w^2.
    const double w = pi / (2.0 * 1.3);
    CHECK(rc.second_derivative(0.0) == doctest::Approx(-3.0 * w * w).epsilon(1e-12));
}

TEST_CASE("envelope factories reject invalid parameters")
{
    CHECK_THROWS_AS(TemporalEnvelope::raised_cosine_power(1.5, 1.0), InvalidArgument);
    CHECK_THROWS_AS(TemporalEnvelope::raised_cosine_power(2.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(TemporalEnvelope::block_autocorrelation(2.0, -1.0), InvalidArgument);
    CHECK_THROWS_AS(TemporalEnvelope::raised_cosine_power(2.0, 1.0).window(0.5), InvalidArgument);
    const auto custom = TemporalEnvelope::custom([](double t) { return std::abs(t) < 1 ? 1 - t * t : 0.0; }, {}, 1.0);
    CHECK_FALSE(custom.has_analytic_second_derivative());
    CHECK_THROWS_AS(custom.second_derivative(0.0), InvalidArgument);
}

TEST_CASE("spatial profiles: derivatives and spectral sampler")
{
    const auto bump = SpatialProfile::gaussian_bump(2.0, 0.8);
    const auto pl = SpatialProfile::power_law(4.0 / 3.0);
    for (const auto* g : {&bump, &pl}) {
        for (double r : {0.3, 1.0, 2.2}) {
            const double h = 1e-5;
            const double d1 = (g->value(r + h) - g->value(r - h)) / (2 * h);
            CHECK(g->d1(r) == doctest::Approx(d1).epsilon(1e-7));
            CHECK(g->d2(r) == doctest::Approx(fd2([&](double x) { return g->value(x); }, r, 1e-4)).epsilon(1e-5));
        }
    }
    CHECK(bump.value(0.0) == 2.0);
    CHECK(bump.synthesizable());
    CHECK_FALSE(pl.synthesizable());
    CHECK_THROWS_AS(SpatialProfile::power_law(2.5), InvalidArgument);
    CHECK_THROWS_AS(SpatialProfile::gaussian_bump(1.0, 0.0), InvalidArgument);

    // E[cos(k . x)] = exp(-|x|^2 / (2 l^2)) when k ~ N(0, I / l^2).
    Engine eng(42);
    const Vec2 x{0.6, -0.5};
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = std::cos(dot(bump.sample_wavevector(eng), x));
        s += c;
        s2 += c * c;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(-norm2(x) / (2 * 0.64))) < 4 * se);
}

TEST_CASE("correlation model: separable and general forms")
{
    const auto model = CorrelationModel::separable(TemporalEnvelope::block_autocorrelation(2.0, 1.0),
                                                   SpatialProfile::gaussian_bump(1.0, 1.0));
    CHECK(model.t_support() == 1.0);
    CHECK(model.has_analytic_d2tt());
    CHECK(model(0.25, Vec2{1.0, 0.0}) == doctest::Approx(model.separable_parts()->temporal.value(0.25) * std::exp(-0.5)));

    // General model: A = cos^2(pi t / 2) exp(-|x|^2) on |t| < 1; d2tt by finite differences.
    auto a = [](double t, Vec2 x) {
        return std::abs(t) < 1.0 ? std::pow(std::cos(pi * t / 2), 2) * std::exp(-norm2(x)) : 0.0;
    };
    auto general = CorrelationModel::general(a, 1.0);
    CHECK_FALSE(general.has_analytic_d2tt());
    const double t = 0.3;
    const Vec2 x{0.4, 0.1};
    const double exact = -0.5 * pi * pi * std::cos(pi * t) * std::exp(-norm2(x));
    CHECK(general.d2tt(t, x) == doctest::Approx(exact).epsilon(1e-7));
    general.set_fd_step(0.0);
    CHECK_THROWS_AS(general.d2tt(t, x), InvalidArgument);
    CHECK_THROWS_AS(d2tt_tilde(general, t, 0.5), InvalidArgument);
    CHECK_THROWS_AS(CorrelationModel::general({}, 1.0), InvalidArgument);
}

TEST_CASE("angular averages")
{
    // Anisotropic: A = f(t) x1^2 averages to f(t) r^2 / 2 (trapezoid exact for trig polynomials).
    auto a = [](double t, Vec2 x) { return std::abs(t) < 1.0 ? (1 - t * t) * x.x * x.x : 0.0; };
    auto d2 = [](double t, Vec2 x) { return std::abs(t) < 1.0 ? -2.0 * x.x * x.x : 0.0; };
    const auto model = CorrelationModel::general(a, 1.0, d2);
    CHECK(angular_average(model, 0.5, 2.0) == doctest::Approx(0.75 * 2.0).epsilon(1e-14));
    CHECK(angular_average_rotated(model, 0.5, 2.0, 0.3) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(d2tt_tilde(model, 0.5, 2.0) == doctest::Approx(-4.0).epsilon(1e-14));
    CHECK_THROWS_AS(angular_average(model, 0.0, -1.0), InvalidArgument);
    CHECK_THROWS_AS(angular_average(model, 0.0, 1.0, 3), InvalidArgument);

    const auto radial = CorrelationModel::separable(TemporalEnvelope::raised_cosine_power(2.0, 1.0),
                                                    SpatialProfile::gaussian_bump(1.0, 1.0));
    CHECK(angular_average(radial, 0.2, 1.5, 4) == radial(0.2, Vec2{1.5, 0.0}));
}

TEST_CASE("structural validation of correlation models")
{
    const auto good = CorrelationModel::separable(TemporalEnvelope::block_autocorrelation(2.0, 1.0),
                                                  SpatialProfile::gaussian_bump(1.0, 1.0));
    const auto report = validate(good, 500, 1);
    CHECK(report.all_passed());
    REQUIRE(report.find("compact_support") != nullptr);
    CHECK(report.find("missing") == nullptr);

    auto odd = CorrelationModel::general(
        [](double t, Vec2 x) { return std::abs(t) < 1 ? (1 - t * t) * (1 + 0.1 * t) * std::exp(-norm2(x)) : 0.0; }, 1.0);
    const auto r_odd = validate(odd, 200, 2);
    CHECK_FALSE(r_odd.find("even_in_time")->passed);
    CHECK_FALSE(r_odd.find("origin_derivatives")->passed);

    auto leaky = CorrelationModel::general([](double t, Vec2 x) { return std::exp(-t * t - norm2(x)); }, 1.0);
    CHECK_FALSE(validate(leaky, 200, 3).find("compact_support")->passed);

    auto kinked = CorrelationModel::general(
        [](double t, Vec2 x) { return std::abs(t) < 1 ? (1 - std::abs(t)) * std::exp(-norm2(x)) : 0.0; }, 1.0);
    const auto r_kink = validate(kinked, 200, 4);
    CHECK(r_kink.find("even_in_time")->passed);
    CHECK_FALSE(r_kink.find("origin_derivatives")->passed);
}
