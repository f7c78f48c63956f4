// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rng.hpp"
#include "vec2.hpp"

namespace gkd {

enum class EnvelopeKind { RaisedCosinePower, BlockAutocorrelation, Custom };

/// Temporal factor f(t) of a separable correlation A(t, x) = f(t) g(|x|).
///
/// Built-in families (both even, compactly supported, f'(0) = 0):
///  - RaisedCosinePower(p, T): f(t) = cos^p(pi t / (2T)) on |t| < T.
///  - BlockAutocorrelation(p, b): the normalized autocorrelation of the window
///    c(u) = C sin^p(pi u / b) on [0, b], so f(0) = 1 and f is positive
///    definite. This is the envelope induced by the block-renewal field.
class TemporalEnvelope {
public:
    using Fn = std::function<double(double)>;

    static TemporalEnvelope raised_cosine_power(double power, double support);
    static TemporalEnvelope block_autocorrelation(double power, double block_length);
    /// `second_derivative` may be empty; callers then fall back to finite differences.
    static TemporalEnvelope custom(Fn f, Fn second_derivative, double support);

    double value(double t) const;
    bool has_analytic_second_derivative() const { return static_cast<bool>(d2_) || kind_ != EnvelopeKind::Custom; }
    /// Analytic f''(t); throws if none is available.
    double second_derivative(double t) const;

    EnvelopeKind kind() const { return kind_; }
    double power() const { return power_; }
    double support() const { return support_; }

    /// Window c(u) on [0, b] with autocorrelation f (BlockAutocorrelation only).
    double window(double u) const;
    double window_derivative(double u) const;

private:
    TemporalEnvelope() = default;

    EnvelopeKind kind_ = EnvelopeKind::Custom;
    double power_ = 0.0;
    double support_ = 0.0;
    double window_scale_ = 0.0;  // C in c(u) = C sin^p(pi u / b)
    Fn f_;
    Fn d2_;
};

enum class SpatialKind { PowerLaw, GaussianBump, Custom };

/// Radial factor g(r) of a separable correlation.
class SpatialProfile {
public:
    using Fn = std::function<double(double)>;
    using WaveSampler = std::function<Vec2(Engine&)>;

    static SpatialProfile power_law(double alpha);
    static SpatialProfile gaussian_bump(double variance, double length);
    /// g with optional derivatives; a wave-vector sampler drawing from the
    /// normalized spectral density makes the profile usable for synthesis.
    static SpatialProfile custom(Fn g, Fn g1 = {}, Fn g2 = {}, WaveSampler sampler = {});

    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;

    SpatialKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double variance() const { return variance_; }
    double length() const { return length_; }

    bool synthesizable() const;
    /// Draws k from the normalized spectral density of g (synthesizable only).
    Vec2 sample_wavevector(Engine& eng) const;

private:
    SpatialProfile() = default;

    SpatialKind kind_ = SpatialKind::Custom;
    double alpha_ = 0.0;
    double variance_ = 0.0;
    double length_ = 0.0;
    Fn g_, g1_, g2_;
    WaveSampler sampler_;
};

/// Space-time correlation A(t, x) of the turbulent potential.
class CorrelationModel {
public:
    using Callable = std::function<double(double, Vec2)>;

    struct Separable {
        TemporalEnvelope temporal;
        SpatialProfile spatial;
    };
    struct General {
        Callable a;
    };

    /// t_support is taken from the envelope; fd_step defaults to 1e-4 t_support.
    static CorrelationModel separable(TemporalEnvelope temporal, SpatialProfile spatial);
    static CorrelationModel general(Callable a, double t_support, Callable d2tt = {});

    double operator()(double t, Vec2 x) const;

    bool is_separable() const { return std::holds_alternative<Separable>(kind_); }
    const Separable* separable_parts() const { return std::get_if<Separable>(&kind_); }
    bool radially_symmetric() const { return is_separable(); }

    double t_support() const { return t_support_; }
    double fd_step() const { return fd_step_; }
    /// Not validated here; operations that need it reject fd_step <= 0.
    void set_fd_step(double h) { fd_step_ = h; }

    bool has_analytic_d2tt() const;
    /// d^2 A / dt^2 at (t, x): analytic when available, otherwise a central
    /// difference with step fd_step plus one Richardson level.
    double d2tt(double t, Vec2 x) const;

private:
    explicit CorrelationModel(std::variant<Separable, General> kind) : kind_(std::move(kind)) {}

    std::variant<Separable, General> kind_;
    double t_support_ = 1.0;
    double fd_step_ = 1e-4;
    Callable d2tt_;
};

/// Central second difference of h at t with step `step`, one Richardson level.
double richardson_second_difference(const std::function<double(double)>& h, double t, double step);

/// Angular average (1/2pi) int_0^{2pi} A(t, R_theta (r, 0)) dtheta by the
/// periodic trapezoid rule; exact for radial models regardless of n_theta.
double angular_average(const CorrelationModel& model, double t, double r, int n_theta = 64);

/// Same average of the slice through x = r (cos theta0, sin theta0).
double angular_average_rotated(const CorrelationModel& model, double t, double r,
                               double theta0, int n_theta = 64);

/// Angular average of d^2 A / dt^2.
double d2tt_tilde(const CorrelationModel& model, double t, double r, int n_theta = 64);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double max_residual = 0.0;
    double tolerance = 0.0;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_passed() const;
    const ValidationCheck* find(const std::string& name) const;
};

/// Randomized check of the structural conditions on A: evenness in t and x,
/// vanishing beyond t_support, and zero first derivatives at the origin.
/// Failures are reported, never thrown.
ValidationReport validate(const CorrelationModel& model, int sample_count, std::uint64_t rng_seed);

}  // namespace gkd
