// SPDX-License-Identifier: Apache-2.0
#include "correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "errors.hpp"
#include "quadrature.hpp"

namespace gkd {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// TemporalEnvelope
// ---------------------------------------------------------------------------

TemporalEnvelope TemporalEnvelope::raised_cosine_power(double power, double support)
{
    if (!(power >= 2.0)) throw InvalidArgument("raised-cosine power must be >= 2");
    if (!(support > 0.0)) throw InvalidArgument("envelope support must be positive");
    TemporalEnvelope env;
    env.kind_ = EnvelopeKind::RaisedCosinePower;
    env.power_ = power;
    env.support_ = support;
    const double w = pi / (2.0 * support);
    env.f_ = [=](double t) {
        const double at = std::abs(t);
        if (at >= support) return 0.0;
        return std::pow(std::cos(w * at), power);
    };
    env.d2_ = [=](double t) {
        const double at = std::abs(t);
        if (at >= support) return 0.0;
        const double c = std::cos(w * at);
        const double s = std::sin(w * at);
        const double cpm2 = (power == 2.0) ? 1.0 : std::pow(c, power - 2.0);
        return power * w * w * cpm2 * ((power - 1.0) * s * s - c * c);
    };
    return env;
}

namespace {

// (1/pi) int_0^pi sin^q(u) du
double mean_sine_power(double q)
{
    return std::tgamma(0.5 * (q + 1.0)) / (std::sqrt(pi) * std::tgamma(0.5 * q + 1.0));
}

// Autocorrelation of sin^2 windows in closed form, with lag in block units.
double sin2_autocorr(double x)
{
    return (2.0 / 3.0) * ((1.0 - x) * (1.0 + 0.5 * std::cos(2.0 * pi * x)) +
                          (3.0 / (4.0 * pi)) * std::sin(2.0 * pi * x));
}

double sin2_autocorr_d2(double x)
{
    return (2.0 / 3.0) * (-pi * std::sin(2.0 * pi * x) -
                          2.0 * pi * pi * (1.0 - x) * std::cos(2.0 * pi * x));
}

// int_0^{b - lag} h(u) k(u + lag) du by composite Gauss-Legendre.
double lagged_product_integral(const std::function<double(double)>& h,
                               const std::function<double(double)>& k, double lag, double b)
{
    const double len = b - lag;
    if (len <= 0.0) return 0.0;
    constexpr int panels = 8;
    const auto& rule = gauss_rule(24);
    const double width = len / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double centre = (p + 0.5) * width;
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double u = centre + 0.5 * width * rule.nodes[i];
            s += rule.weights[i] * h(u) * k(u + lag);
        }
        total += 0.5 * width * s;
    }
    return total;
}

}  // namespace

TemporalEnvelope TemporalEnvelope::block_autocorrelation(double power, double block_length)
{
    if (!(power >= 2.0)) throw InvalidArgument("window power must be >= 2");
    if (!(block_length > 0.0)) throw InvalidArgument("block length must be positive");
    TemporalEnvelope env;
    env.kind_ = EnvelopeKind::BlockAutocorrelation;
    env.power_ = power;
    env.support_ = block_length;
    const double b = block_length;
    env.window_scale_ = 1.0 / std::sqrt(b * mean_sine_power(2.0 * power));

    if (power == 2.0) {
        env.f_ = [b](double t) {
            const double x = std::abs(t) / b;
            return x >= 1.0 ? 0.0 : sin2_autocorr(x);
        };
        env.d2_ = [b](double t) {
            const double x = std::abs(t) / b;
            return x >= 1.0 ? 0.0 : sin2_autocorr_d2(x) / (b * b);
        };
        return env;
    }

    const double scale = env.window_scale_;
    auto c = [=](double u) { return scale * std::pow(std::sin(pi * u / b), power); };
    auto dc = [=](double u) {
        const double s = std::sin(pi * u / b);
        return scale * power * (pi / b) * std::pow(s, power - 1.0) * std::cos(pi * u / b);
    };
    env.f_ = [=](double t) {
        const double lag = std::abs(t);
        return lag >= b ? 0.0 : lagged_product_integral(c, c, lag, b);
    };
    // f'' = -int c'(u) c'(u + lag) du for a C^1 window vanishing at both ends.
    env.d2_ = [=](double t) {
        const double lag = std::abs(t);
        return lag >= b ? 0.0 : -lagged_product_integral(dc, dc, lag, b);
    };
    return env;
}

TemporalEnvelope TemporalEnvelope::custom(Fn f, Fn second_derivative, double support)
{
    if (!f) throw InvalidArgument("custom envelope needs a callable");
    if (!(support > 0.0)) throw InvalidArgument("envelope support must be positive");
    TemporalEnvelope env;
    env.kind_ = EnvelopeKind::Custom;
    env.support_ = support;
    env.f_ = std::move(f);
    env.d2_ = std::move(second_derivative);
    return env;
}

double TemporalEnvelope::value(double t) const { return f_(t); }

double TemporalEnvelope::second_derivative(double t) const
{
    if (!d2_) throw InvalidArgument("envelope has no analytic second derivative");
    return d2_(t);
}

double TemporalEnvelope::window(double u) const
{
    if (kind_ != EnvelopeKind::BlockAutocorrelation)
        throw InvalidArgument("only block-autocorrelation envelopes have a window");
    if (u <= 0.0 || u >= support_) return 0.0;
    return window_scale_ * std::pow(std::sin(pi * u / support_), power_);
}

double TemporalEnvelope::window_derivative(double u) const
{
    if (kind_ != EnvelopeKind::BlockAutocorrelation)
        throw InvalidArgument("only block-autocorrelation envelopes have a window");
    if (u <= 0.0 || u >= support_) return 0.0;
    const double s = std::sin(pi * u / support_);
    return window_scale_ * power_ * (pi / support_) * std::pow(s, power_ - 1.0) *
           std::cos(pi * u / support_);
}

// ---------------------------------------------------------------------------
// SpatialProfile
// ---------------------------------------------------------------------------

SpatialProfile SpatialProfile::power_law(double alpha)
{
    if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("power-law exponent must lie in (0, 2]");
    SpatialProfile p;
    p.kind_ = SpatialKind::PowerLaw;
    p.alpha_ = alpha;
    p.g_ = [alpha](double r) { return std::pow(r, alpha); };
    p.g1_ = [alpha](double r) { return alpha * std::pow(r, alpha - 1.0); };
    p.g2_ = [alpha](double r) { return alpha * (alpha - 1.0) * std::pow(r, alpha - 2.0); };
    return p;
}

SpatialProfile SpatialProfile::gaussian_bump(double variance, double length)
{
    if (!(variance >= 0.0)) throw InvalidArgument("bump variance must be non-negative");
    if (!(length > 0.0)) throw InvalidArgument("bump length must be positive");
    SpatialProfile p;
    p.kind_ = SpatialKind::GaussianBump;
    p.variance_ = variance;
    p.length_ = length;
    const double l2 = length * length;
    p.g_ = [=](double r) { return variance * std::exp(-r * r / (2.0 * l2)); };
    p.g1_ = [=](double r) { return -variance * r / l2 * std::exp(-r * r / (2.0 * l2)); };
    p.g2_ = [=](double r) {
        return variance * (r * r / (l2 * l2) - 1.0 / l2) * std::exp(-r * r / (2.0 * l2));
    };
    // Spectral density of exp(-r^2 / 2l^2) is Gaussian with variance 1/l^2 per component.
    p.sampler_ = [length](Engine& eng) {
        std::normal_distribution<double> normal(0.0, 1.0 / length);
        const double kx = normal(eng);
        return Vec2{kx, normal(eng)};
    };
    return p;
}

SpatialProfile SpatialProfile::custom(Fn g, Fn g1, Fn g2, WaveSampler sampler)
{
    if (!g) throw InvalidArgument("custom spatial profile needs a callable");
    SpatialProfile p;
    p.kind_ = SpatialKind::Custom;
    p.variance_ = g(0.0);
    p.g_ = std::move(g);
    p.g1_ = std::move(g1);
    p.g2_ = std::move(g2);
    p.sampler_ = std::move(sampler);
    return p;
}

double SpatialProfile::value(double r) const { return g_(r); }

double SpatialProfile::d1(double r) const
{
    if (g1_) return g1_(r);
    const double h = 1e-5 * std::max(1.0, r);
    return (g_(r + h) - g_(std::max(0.0, r - h))) / (r + h - std::max(0.0, r - h));
}

double SpatialProfile::d2(double r) const
{
    if (g2_) return g2_(r);
    const double h = 1e-4 * std::max(1.0, r);
    return richardson_second_difference([this](double s) { return g_(std::abs(s)); }, r, h);
}

bool SpatialProfile::synthesizable() const
{
    return kind_ != SpatialKind::PowerLaw && static_cast<bool>(sampler_);
}

Vec2 SpatialProfile::sample_wavevector(Engine& eng) const
{
    if (!synthesizable()) throw InvalidArgument("spatial profile has no samplable spectral density");
    return sampler_(eng);
}

// ---------------------------------------------------------------------------
// CorrelationModel
// ---------------------------------------------------------------------------

CorrelationModel CorrelationModel::separable(TemporalEnvelope temporal, SpatialProfile spatial)
{
    const double support = temporal.support();
    CorrelationModel m(Separable{std::move(temporal), std::move(spatial)});
    m.t_support_ = support;
    m.fd_step_ = 1e-4 * support;
    return m;
}

CorrelationModel CorrelationModel::general(Callable a, double t_support, Callable d2tt)
{
    if (!a) throw InvalidArgument("general correlation needs a callable");
    if (!(t_support > 0.0)) throw InvalidArgument("t_support must be positive");
    CorrelationModel m(General{std::move(a)});
    m.t_support_ = t_support;
    m.fd_step_ = 1e-4 * t_support;
    m.d2tt_ = std::move(d2tt);
    return m;
}

double CorrelationModel::operator()(double t, Vec2 x) const
{
    if (const auto* s = std::get_if<Separable>(&kind_))
        return s->temporal.value(t) * s->spatial.value(norm(x));
    return std::get<General>(kind_).a(t, x);
}

bool CorrelationModel::has_analytic_d2tt() const
{
    if (d2tt_) return true;
    if (const auto* s = std::get_if<Separable>(&kind_))
        return s->temporal.has_analytic_second_derivative();
    return false;
}

double richardson_second_difference(const std::function<double(double)>& h, double t, double step)
{
    auto central = [&](double d) { return (h(t + d) - 2.0 * h(t) + h(t - d)) / (d * d); };
    const double coarse = central(step);
    const double fine = central(0.5 * step);
    return (4.0 * fine - coarse) / 3.0;
}

double CorrelationModel::d2tt(double t, Vec2 x) const
{
    if (d2tt_) return d2tt_(t, x);
    if (const auto* s = std::get_if<Separable>(&kind_)) {
        if (s->temporal.has_analytic_second_derivative())
            return s->temporal.second_derivative(t) * s->spatial.value(norm(x));
    }
    if (!(fd_step_ > 0.0)) throw InvalidArgument("fd_step must be positive");
    return richardson_second_difference([&](double tt) { return (*this)(tt, x); }, t, fd_step_);
}

// ---------------------------------------------------------------------------
// Angular averages
// ---------------------------------------------------------------------------

namespace {

void check_angular_args(double r, int n_theta)
{
    if (n_theta < 4) throw InvalidArgument("n_theta must be >= 4");
    if (!(r >= 0.0)) throw InvalidArgument("radius must be non-negative");
}

template <class Fn>
double trapezoid_circle(Fn&& fn, double r, double theta0, int n_theta)
{
    double sum = 0.0;
    const double step = 2.0 * pi / n_theta;
    for (int i = 0; i < n_theta; ++i) {
        const double th = theta0 + i * step;
        sum += fn(Vec2{r * std::cos(th), r * std::sin(th)});
    }
    return sum / n_theta;
}

}  // namespace

double angular_average(const CorrelationModel& model, double t, double r, int n_theta)
{
    return angular_average_rotated(model, t, r, 0.0, n_theta);
}

double angular_average_rotated(const CorrelationModel& model, double t, double r, double theta0,
                               int n_theta)
{
    check_angular_args(r, n_theta);
    if (model.radially_symmetric()) return model(t, Vec2{r, 0.0});
    return trapezoid_circle([&](Vec2 x) { return model(t, x); }, r, theta0, n_theta);
}

double d2tt_tilde(const CorrelationModel& model, double t, double r, int n_theta)
{
    check_angular_args(r, n_theta);
    if (!model.has_analytic_d2tt() && !(model.fd_step() > 0.0))
        throw InvalidArgument("fd_step must be positive");
    if (model.radially_symmetric()) return model.d2tt(t, Vec2{r, 0.0});
    return trapezoid_circle([&](Vec2 x) { return model.d2tt(t, x); }, r, 0.0, n_theta);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate(const CorrelationModel& model, int sample_count, std::uint64_t rng_seed)
{
    if (sample_count < 1) throw InvalidArgument("sample_count must be >= 1");
    Engine eng(derive_seed(rng_seed, StreamTag::Validation, 0));
    const double T = model.t_support();
    double length = 1.0;
    if (const auto* s = model.separable_parts(); s && s->spatial.kind() == SpatialKind::GaussianBump)
        length = s->spatial.length();

    std::uniform_real_distribution<double> ut(-T, T);
    std::uniform_real_distribution<double> ux(-3.0 * length, 3.0 * length);
    std::uniform_real_distribution<double> beyond(T, 3.0 * T);

    struct Point { double t; Vec2 x; };
    std::vector<Point> pts(static_cast<std::size_t>(sample_count));
    for (auto& p : pts) {
        p.t = ut(eng);
        const double x1 = ux(eng);
        p.x = Vec2{x1, ux(eng)};
    }

    double scale = std::abs(model(0.0, Vec2{}));
    for (const auto& p : pts) scale = std::max(scale, std::abs(model(p.t, p.x)));
    if (scale == 0.0) scale = 1.0;
    const double even_tol = 1e-12 * scale;

    ValidationCheck even_t{"even_in_time", true, 0.0, even_tol};
    ValidationCheck even_x{"even_in_space", true, 0.0, even_tol};
    for (const auto& p : pts) {
        const double a = model(p.t, p.x);
        even_t.max_residual = std::max(even_t.max_residual, std::abs(a - model(-p.t, p.x)));
        even_x.max_residual = std::max(even_x.max_residual, std::abs(a - model(p.t, -p.x)));
    }
    even_t.passed = even_t.max_residual <= even_tol;
    even_x.passed = even_x.max_residual <= even_tol;

    ValidationCheck support{"compact_support", true, 0.0, 0.0};
    for (const auto& p : pts) {
        const double sign = (p.t < 0.0) ? -1.0 : 1.0;
        const double t = sign * beyond(eng);
        support.max_residual = std::max(support.max_residual, std::abs(model(t, p.x)));
        support.max_residual = std::max(support.max_residual, std::abs(model(sign * T, p.x)));
    }
    support.passed = support.max_residual == 0.0;

    // One-sided slopes at the origin with one Richardson level, so kinks are
    // caught as well as odd components. Residuals are in units of scale / T
    // (time) and scale / length (space).
    const double ht = (model.fd_step() > 0.0) ? model.fd_step() : 1e-4 * T;
    const double hx = 1e-4 * length;
    const double a0 = model(0.0, Vec2{});
    auto one_sided = [&](auto&& shifted, double h) {
        const double d_h = (shifted(h) - a0) / h;
        const double d_half = (shifted(0.5 * h) - a0) / (0.5 * h);
        return std::abs(2.0 * d_half - d_h);
    };
    double origin = 0.0;
    for (double sgn : {1.0, -1.0}) {
        origin = std::max(origin, one_sided([&](double h) { return model(sgn * h, Vec2{}); }, ht) *
                                      T / scale);
        origin = std::max(origin, one_sided([&](double h) { return model(0.0, Vec2{sgn * h, 0.0}); },
                                            hx) * length / scale);
        origin = std::max(origin, one_sided([&](double h) { return model(0.0, Vec2{0.0, sgn * h}); },
                                            hx) * length / scale);
    }
    ValidationCheck deriv{"origin_derivatives", origin <= 1e-6, origin, 1e-6};

    return ValidationReport{{even_t, even_x, support, deriv}};
}

}  // namespace gkd
