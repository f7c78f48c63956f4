// SPDX-License-Identifier: Apache-2.0
#include "dcoeff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"
#include "parallel.hpp"

namespace gkd {

using std::numbers::pi;

std::string to_string(CoefficientMethod m)
{
    switch (m) {
    case CoefficientMethod::Quadrature: return "Quadrature";
    case CoefficientMethod::ClosedForm: return "ClosedForm";
    case CoefficientMethod::MonteCarlo: return "MonteCarlo";
    }
    return "Unknown";
}

void DiffusionCoefficientTable::validate() const
{
    if (e_values.size() != a_values.size())
        throw InvalidArgument("coefficient table: e and a have different lengths");
    if (std_errors && std_errors->size() != e_values.size())
        throw InvalidArgument("coefficient table: stderr column has the wrong length");
    if (n < 1) throw InvalidArgument("coefficient table: n must be >= 1");
    double amax = 0.0;
    for (std::size_t i = 0; i < e_values.size(); ++i) {
        if (!(e_values[i] >= 0.0)) throw InvalidArgument("coefficient table: energies must be >= 0");
        if (i > 0 && !(e_values[i] > e_values[i - 1]))
            throw InvalidArgument("coefficient table: energies must be strictly increasing");
        amax = std::max(amax, std::abs(a_values[i]));
    }
    for (double a : a_values)
        if (a < -1e-10 * amax)
            throw InvalidArgument("coefficient table: negative diffusion coefficient " + std::to_string(a));
}

double DiffusionCoefficientTable::interpolate(double e) const
{
    if (e_values.empty()) throw InvalidArgument("empty coefficient table");
    const double tol = 1e-12 * std::max(1.0, e_values.back());
    if (e < e_values.front() - tol || e > e_values.back() + tol)
        throw InvalidArgument("energy " + std::to_string(e) + " outside the coefficient table");
    if (e_values.size() == 1) return a_values.front();
    auto it = std::upper_bound(e_values.begin(), e_values.end(), e);
    std::size_t hi = static_cast<std::size_t>(it - e_values.begin());
    hi = std::clamp<std::size_t>(hi, 1, e_values.size() - 1);
    const std::size_t lo = hi - 1;
    const double w = (e - e_values[lo]) / (e_values[hi] - e_values[lo]);
    return (1.0 - w) * a_values[lo] + w * a_values[hi];
}

namespace {

void check_e_n(double e, int n)
{
    if (!(e >= 0.0)) throw InvalidArgument("energy must be >= 0");
    if (n < 1) throw InvalidArgument("resonance index n must be >= 1");
}

QuadratureResult integrate_over_orbit_phase(const Integrand& f, double s_max,
                                            const QuadratureOptions& opts)
{
    opts.validate();
    if (opts.method == QuadratureMethod::CompositeGaussLegendre)
        return gauss_legendre(f, 0.0, s_max, opts.panels, opts.order);
    // At least four initial panels per 2 pi so no oscillation is skipped.
    const int panels = std::max(16, 4 * static_cast<int>(std::ceil(s_max / (2.0 * pi))));
    // Envelope derivatives may jump at the support edge s_max; take the value
    // there as the limit from inside so refinement of the last panel converges.
    const double edge = s_max * (1.0 - 4.0 * std::numeric_limits<double>::epsilon());
    auto inside = [&](double s) { return f(std::min(s, edge)); };
    return adaptive_simpson(inside, 0.0, s_max, opts.abs_tol, opts.rel_tol, opts.max_evaluations, panels);
}

}  // namespace

QuadratureResult diffusion_coefficient_detail(const CorrelationModel& model, double e, int n,
                                              const QuadratureOptions& opts)
{
    check_e_n(e, n);
    const double two_pi_n = 2.0 * pi * n;
    const double s_max = opts.s_max_override.value_or(two_pi_n * model.t_support());
    const double radius_scale = 2.0 * std::sqrt(2.0 * e);
    auto integrand = [&](double s) {
        return -d2tt_tilde(model, -s / two_pi_n, radius_scale * std::abs(std::sin(0.5 * s)));
    };
    auto r = integrate_over_orbit_phase(integrand, s_max, opts);
    const double pre = 1.0 / (2.0 * pi * n * n);
    r.value *= pre;
    r.error_estimate *= pre;
    return r;
}

double diffusion_coefficient(const CorrelationModel& model, double e, int n, const QuadratureOptions& opts)
{
    return diffusion_coefficient_detail(model, e, n, opts).value;
}

double richardson_coefficient(const TemporalEnvelope& envelope, double alpha, int n,
                              const QuadratureOptions& opts)
{
    if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("alpha must lie in (0, 2]");
    if (n < 1) throw InvalidArgument("resonance index n must be >= 1");
    const double two_pi_n = 2.0 * pi * n;
    const double s_max = opts.s_max_override.value_or(two_pi_n * envelope.support());
    auto integrand = [&](double s) {
        return envelope.second_derivative(-s / two_pi_n) * std::pow(std::abs(std::sin(0.5 * s)), alpha);
    };
    const auto r = integrate_over_orbit_phase(integrand, s_max, opts);
    return -std::pow(2.0, 1.5 * alpha) / (2.0 * pi * n * n) * r.value;
}

double scaling_exponent(double alpha)
{
    if (!(alpha < 4.0)) throw InvalidArgument("scaling exponent needs alpha < 4");
    return 2.0 / (4.0 - alpha);
}

// ---------------------------------------------------------------------------
// Work-integral oracle
// ---------------------------------------------------------------------------

double work_integral(const FieldRealization& real, double e, int n, int window_n,
                     const WorkOracleOptions& opts, double* effective_window)
{
    check_e_n(e, n);
    if (window_n < 1) throw InvalidArgument("window N must be >= 1");
    const double two_pi_n = 2.0 * pi * n;
    const double b = real.block_length();

    double s_lo = -2.0 * pi * window_n;
    double s_hi = 2.0 * pi * window_n;
    double n_eff = window_n;
    if (opts.placement == WindowPlacement::BlockAligned) {
        const double tau_half = static_cast<double>(window_n) / n;
        const long blocks = static_cast<long>(std::floor(2.0 * tau_half / b + 1e-12));
        if (blocks < 1) throw InvalidArgument("window shorter than one field block");
        const double delta = real.time_shift();
        const double tau_start = delta + b * std::ceil((-tau_half - delta) / b - 1e-12);
        const double tau_end = tau_start + static_cast<double>(blocks) * b;
        s_lo = -two_pi_n * tau_end;
        s_hi = -two_pi_n * tau_start;
        n_eff = (s_hi - s_lo) / (4.0 * pi);
    }
    if (effective_window) *effective_window = n_eff;
    if (e == 0.0) return 0.0;

    const double speed = std::sqrt(2.0 * e);
    const Vec2 v{speed, 0.0};
    const Vec2 vperp = perp(v);
    auto integrand = [&](double s) {
        const Vec2 pos = -rotate(vperp, s);
        return dot(real.gradient(-s / two_pi_n, pos), rotate(v, s));
    };

    // Split at block boundaries so each panel sees a smooth integrand.
    std::vector<double> cuts{s_lo};
    {
        const double delta = real.time_shift();
        const double tau_a = -s_hi / two_pi_n;
        const double tau_b = -s_lo / two_pi_n;
        for (double j = std::ceil((tau_a - delta) / b); delta + j * b < tau_b; j += 1.0) {
            const double s = -two_pi_n * (delta + j * b);
            if (s > s_lo + 1e-12 && s < s_hi - 1e-12) cuts.push_back(s);
        }
        cuts.push_back(s_hi);
        std::sort(cuts.begin(), cuts.end());
    }
    const auto& rule = gauss_rule(opts.panel_order);
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double len = cuts[c + 1] - cuts[c];
        const int panels = std::max(1, static_cast<int>(std::ceil(len / (2.0 * pi) * opts.panels_per_gyro)));
        const double h = len / panels;
        for (int p = 0; p < panels; ++p) {
            const double centre = cuts[c] + (p + 0.5) * h;
            double sum = 0.0;
            for (std::size_t k = 0; k < rule.nodes.size(); ++k)
                sum += rule.weights[k] * integrand(centre + 0.5 * h * rule.nodes[k]);
            total += 0.5 * h * sum;
        }
    }
    return total;
}

WorkOracleResult mc_work_oracle(const FieldSpec& spec, double e, int n, int window_n,
                                std::size_t n_samples, std::uint64_t seed, const WorkOracleOptions& opts)
{
    spec.validate();
    check_e_n(e, n);
    if (window_n < 2) throw InvalidArgument("window N must be >= 2");
    if (n_samples < 10) throw InvalidArgument("mc_work_oracle needs >= 10 samples");

    FieldSpec seeded = spec;
    seeded.master_seed = seed;
    const double b = spec.block_length;
    const double tau_half = static_cast<double>(window_n) / n;
    const TimeWindow window{-tau_half - 2.0 * b, tau_half + 2.0 * b};

    WorkOracleResult out;
    out.per_sample.assign(n_samples, 0.0);
    std::vector<double> n_eff(n_samples, 0.0);
    parallel_for(n_samples, opts.threads, [&](std::size_t i) {
        const auto real = synthesize(seeded, i, window);
        const double integral = work_integral(real, e, n, window_n, opts, &n_eff[i]);
        out.per_sample[i] = opts.norm * integral * integral / n_eff[i];
    });

    double sum = 0.0;
    double sum2 = 0.0;
    double n_eff_sum = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        sum += out.per_sample[i];
        sum2 += out.per_sample[i] * out.per_sample[i];
        n_eff_sum += n_eff[i];
    }
    const double count = static_cast<double>(n_samples);
    out.estimate = sum / count;
    const double var = std::max(0.0, (sum2 - count * out.estimate * out.estimate) / (count - 1.0));
    out.std_error = std::sqrt(var / count);
    out.effective_window = n_eff_sum / count;
    return out;
}

NormCalibration calibrate_work_oracle_norm(std::span<const double> quadrature, std::span<const double> raw)
{
    if (quadrature.size() != raw.size() || raw.empty())
        throw InvalidArgument("calibration needs matching, non-empty value lists");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        num += quadrature[i] * raw[i];
        den += raw[i] * raw[i];
    }
    if (!(den > 0.0) || !(num > 0.0)) throw InvalidArgument("calibration data must be positive");
    NormCalibration cal;
    cal.least_squares = num / den;

    static const std::array<std::pair<double, const char*>, 6> candidates{{
        {1.0 / (4.0 * pi), "1/(4pi)"},
        {1.0 / (2.0 * pi), "1/(2pi)"},
        {0.25, "1/4"},
        {1.0 / pi, "1/pi"},
        {0.5, "1/2"},
        {1.0, "1"},
    }};
    double best = INFINITY;
    for (const auto& [value, name] : candidates) {
        const double d = std::abs(std::log(cal.least_squares / value));
        if (d < best) {
            best = d;
            cal.snapped = value;
            cal.snapped_name = name;
        }
    }
    return cal;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

namespace {

void check_grid(std::span<const double> e_grid)
{
    if (e_grid.empty()) throw InvalidArgument("energy grid is empty");
    for (std::size_t i = 0; i < e_grid.size(); ++i) {
        if (!(e_grid[i] >= 0.0)) throw InvalidArgument("energy grid must be non-negative");
        if (i > 0 && !(e_grid[i] > e_grid[i - 1]))
            throw InvalidArgument("energy grid must be strictly increasing");
    }
}

}  // namespace

DiffusionCoefficientTable coefficient_profile(const CorrelationModel& model,
                                              std::span<const double> e_grid, int n,
                                              const QuadratureOptions& opts, unsigned threads)
{
    check_grid(e_grid);
    DiffusionCoefficientTable table;
    table.e_values.assign(e_grid.begin(), e_grid.end());
    table.a_values.assign(e_grid.size(), 0.0);
    table.n = n;
    table.method = CoefficientMethod::Quadrature;
    parallel_for(e_grid.size(), threads, [&](std::size_t i) {
        table.a_values[i] = diffusion_coefficient(model, e_grid[i], n, opts);
    });
    double amax = 0.0;
    for (double a : table.a_values) amax = std::max(amax, std::abs(a));
    const double tol = 1e-10 * amax;
    for (double& a : table.a_values) {
        if (a < 0.0 && a >= -tol) {
            a = 0.0;
            ++table.clamped;
        }
    }
    table.validate();
    return table;
}

DiffusionCoefficientTable closed_form_profile(const TemporalEnvelope& envelope, double alpha,
                                              std::span<const double> e_grid, int n,
                                              const QuadratureOptions& opts)
{
    check_grid(e_grid);
    const double k = richardson_coefficient(envelope, alpha, n, opts);
    DiffusionCoefficientTable table;
    table.method = CoefficientMethod::ClosedForm;
    table.n = n;
    for (double e : e_grid) {
        table.e_values.push_back(e);
        table.a_values.push_back(k * std::pow(e, 0.5 * alpha));
    }
    table.validate();
    return table;
}

namespace {

struct Sym2 {
    double xx, xy, yy;
};

Sym2 spatial_hessian(const CorrelationModel& model, double t, Vec2 x)
{
    if (const auto* parts = model.separable_parts()) {
        const double f = parts->temporal.value(t);
        if (f == 0.0) return {0.0, 0.0, 0.0};
        const auto& g = parts->spatial;
        const double r = norm(x);
        if (r < 1e-12) {
            const double d2 = g.d2(0.0);
            return {f * d2, 0.0, f * d2};
        }
        const double ux = x.x / r;
        const double uy = x.y / r;
        const double d2 = g.d2(r);
        const double d1r = g.d1(r) / r;
        return {f * (d2 * ux * ux + d1r * (1.0 - ux * ux)), f * (d2 - d1r) * ux * uy,
                f * (d2 * uy * uy + d1r * (1.0 - uy * uy))};
    }
    const double h = 1e-4;
    auto a = [&](double dx, double dy) { return model(t, Vec2{x.x + dx, x.y + dy}); };
    const double a0 = a(0, 0);
    return {(a(h, 0) - 2 * a0 + a(-h, 0)) / (h * h),
            (a(h, h) - a(h, -h) - a(-h, h) + a(-h, -h)) / (4 * h * h),
            (a(0, h) - 2 * a0 + a(0, -h)) / (h * h)};
}

}  // namespace

double orbit_hessian_coefficient(const CorrelationModel& model, double e, int n, int n_theta,
                                 const QuadratureOptions& opts)
{
    check_e_n(e, n);
    if (n_theta < 4) throw InvalidArgument("n_theta must be >= 4");
    const double two_pi_n = 2.0 * pi * n;
    const double s_max = opts.s_max_override.value_or(two_pi_n * model.t_support());
    const Vec2 v{std::sqrt(2.0 * e), 0.0};
    const Vec2 vperp = perp(v);
    auto integrand = [&](double s) {
        double sum = 0.0;
        for (int i = 0; i < n_theta; ++i) {
            const double th = 2.0 * pi * i / n_theta;
            const Vec2 a = rotate(v, th);
            const Vec2 b = rotate(v, th - s);
            const Vec2 x = rotate(vperp, th) - rotate(vperp, th - s);
            const Sym2 h = spatial_hessian(model, -s / two_pi_n, x);
            sum -= a.x * (h.xx * b.x + h.xy * b.y) + a.y * (h.xy * b.x + h.yy * b.y);
        }
        return 2.0 * pi * sum / n_theta;
    };
    return integrate_over_orbit_phase(integrand, s_max, opts).value;
}

}  // namespace gkd
