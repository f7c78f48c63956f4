// SPDX-License-Identifier: Apache-2.0
#include "she.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace gkd {

void SheState::validate() const
{
    profile.grid.validate();
    if (profile.density.size() != static_cast<std::size_t>(profile.grid.cells))
        throw InvalidArgument("profile size does not match its grid");
    if (a_faces.size() != profile.density.size() + 1)
        throw InvalidArgument("need one coefficient per face (cells + 1)");
    for (std::size_t f = 1; f + 1 < a_faces.size(); ++f)
        if (!(a_faces[f] >= 0.0)) throw InvalidArgument("negative diffusion coefficient at face " + std::to_string(f));
}

std::vector<double> face_coefficients(const DiffusionCoefficientTable& table, const EnergyGrid& grid,
                                      bool zero_at_origin)
{
    table.validate();
    grid.validate();
    if (table.e_values.empty() || table.e_values.front() > 0.0 ||
        table.e_values.back() < grid.e_max * (1.0 - 1e-12))
        throw GridMismatch("coefficient table does not cover [0, e_max]");
    std::vector<double> a(static_cast<std::size_t>(grid.cells) + 1);
    for (int f = 0; f <= grid.cells; ++f)
        a[static_cast<std::size_t>(f)] = std::max(0.0, table.interpolate(std::min(grid.face(f), table.e_values.back())));
    if (zero_at_origin) a.front() = 0.0;
    return a;
}

std::vector<double> face_coefficients(const std::function<double(double)>& a, const EnergyGrid& grid)
{
    grid.validate();
    std::vector<double> out(static_cast<std::size_t>(grid.cells) + 1);
    for (int f = 0; f <= grid.cells; ++f) out[static_cast<std::size_t>(f)] = a(grid.face(f));
    return out;
}

void step_implicit(SheState& state, double dt)
{
    if (!(dt > 0.0)) throw InvalidArgument("SHE step needs dt > 0");
    state.validate();
    const std::size_t k = state.profile.density.size();
    const double de = state.profile.grid.width();
    const double r = dt / (de * de);
    const auto& a = state.a_faces;
    auto& rho = state.profile.density;

    // Thomas algorithm for the M-matrix  -r a_i rho_{i-1} + (1 + r(a_i + a_{i+1})) rho_i - r a_{i+1} rho_{i+1}.
    std::vector<double> c(k, 0.0);
    std::vector<double> d(k, 0.0);
    auto face = [&](std::size_t f) { return (f == 0 || f == k) ? 0.0 : a[f]; };
    for (std::size_t i = 0; i < k; ++i) {
        const double lower = -r * face(i);
        const double upper = -r * face(i + 1);
        const double diag = 1.0 + r * (face(i) + face(i + 1));
        const double denom = i == 0 ? diag : diag - lower * c[i - 1];
        c[i] = upper / denom;
        d[i] = (rho[i] - (i == 0 ? 0.0 : lower * d[i - 1])) / denom;
    }
    rho[k - 1] = d[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) rho[i] = d[i] - c[i] * rho[i + 1];
    state.time += dt;
}

std::vector<SheSnapshot> solve(const EnergyProfile& initial, std::vector<double> a_faces, double t_end, double dt,
                               const std::vector<double>& output_times)
{
    if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be >= 0");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    std::vector<double> targets = output_times;
    if (targets.empty()) targets.push_back(t_end);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] >= 0.0 && targets[i] <= t_end)) throw InvalidArgument("output time outside [0, t_end]");
        if (i > 0 && !(targets[i] > targets[i - 1])) throw InvalidArgument("output times must be increasing");
    }

    SheState state{initial, 0.0, std::move(a_faces)};
    state.validate();
    std::vector<SheSnapshot> out;
    out.reserve(targets.size());
    for (double target : targets) {
        const double t0 = state.time;
        const double span = target - t0;
        if (span > 0.0) {
            const auto steps = static_cast<long>(std::ceil(span / dt - 1e-9));
            const double h = span / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) step_implicit(state, h);
            state.time = target;
        }
        out.push_back({target, state.profile});
    }
    return out;
}

std::vector<SheSnapshot> solve(const EnergyProfile& initial, const DiffusionCoefficientTable& coeff, double t_end,
                               double dt, const std::vector<double>& output_times)
{
    return solve(initial, face_coefficients(coeff, initial.grid), t_end, dt, output_times);
}

double boundary_mass_fraction(const EnergyProfile& p)
{
    const double total = p.mass();
    if (!(total > 0.0)) throw InvalidArgument("profile has zero mass");
    const std::size_t k = p.density.size();
    return (p.density[k - 1] + p.density[k - 2]) * p.grid.width() / total;
}

namespace {

std::vector<const SheSnapshot*> in_window(const std::vector<SheSnapshot>& snaps, double t_lo, double t_hi)
{
    if (!(t_lo > 0.0 && t_hi > t_lo)) throw InvalidArgument("fit window must satisfy 0 < t_lo < t_hi");
    std::vector<const SheSnapshot*> sel;
    for (const auto& s : snaps)
        if (s.time >= t_lo && s.time <= t_hi) sel.push_back(&s);
    if (sel.size() < 5) throw InvalidArgument("fit window holds fewer than 5 output times");
    for (const auto* s : sel)
        if (boundary_mass_fraction(s->profile) > kBoundaryMassLimit)
            throw InvalidArgument("profile at t = " + std::to_string(s->time) + " reaches the e_max boundary");
    return sel;
}

}  // namespace

ScalingFit self_similar_fit(const std::vector<SheSnapshot>& snapshots, double t_lo, double t_hi)
{
    const auto sel = in_window(snapshots, t_lo, t_hi);
    const double m = static_cast<double>(sel.size());
    double sx = 0, sy = 0;
    std::vector<double> xs, ys;
    for (const auto* s : sel) {
        xs.push_back(std::log(s->time));
        ys.push_back(std::log(s->profile.median()));
        sx += xs.back();
        sy += ys.back();
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    ScalingFit fit;
    fit.beta_hat = sxy / sxx;
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - my - fit.beta_hat * (xs[i] - mx);
        rss += res * res;
    }
    fit.std_error = std::sqrt(rss / (m - 2.0) / sxx);
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.points = static_cast<int>(sel.size());
    return fit;
}

double collapse_distance(const std::vector<SheSnapshot>& snapshots, double t_lo, double t_hi)
{
    const auto sel = in_window(snapshots, t_lo, t_hi);
    struct Scaled {
        const EnergyProfile* p;
        double median, mass;
    };
    std::vector<Scaled> scaled;
    double y_max = INFINITY;
    for (const auto* s : sel) {
        scaled.push_back({&s->profile, s->profile.median(), s->profile.mass()});
        y_max = std::min(y_max, s->profile.grid.e_max / scaled.back().median);
    }
    // q(y) = m rho(m y) / mass, rho linear between cell centres.
    auto q = [](const Scaled& s, double y) {
        const auto& g = s.p->grid;
        const double e = s.median * y;
        const double pos = e / g.width() - 0.5;
        const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, g.cells - 2);
        const double w = std::clamp(pos - k, 0.0, 1.0);
        const auto& d = s.p->density;
        const double rho = (1.0 - w) * d[static_cast<std::size_t>(k)] + w * d[static_cast<std::size_t>(k) + 1];
        return s.median * rho / s.mass;
    };
    const int samples = 4000;
    const double dy = y_max / samples;
    const Scaled& ref = scaled.back();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < scaled.size(); ++i) {
        double l1 = 0.0;
        for (int j = 0; j < samples; ++j) {
            const double y = (j + 0.5) * dy;
            l1 += std::abs(q(scaled[i], y) - q(ref, y));
        }
        worst = std::max(worst, l1 * dy);
    }
    return worst;
}

}  // namespace gkd
