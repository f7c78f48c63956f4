// SPDX-License-Identifier: Apache-2.0
#include "harness.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"

namespace gkd {

using std::numbers::pi;

void ExperimentConfig::validate() const
{
    auto wrap = [](const char* field, auto&& check) {
        try {
            check();
        } catch (const InvalidArgument& e) {
            throw ValidationError(field, e.what());
        }
    };
    wrap("field", [&] { field.validate(); });
    wrap("kinetics.init", [&] { init.validate(); });
    wrap("she", [&] { grid.validate(); });
    if (n < 1) throw ValidationError("correlation.n", "must be >= 1");
    if (epsilons.empty()) throw ValidationError("kinetics.epsilons", "must not be empty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw ValidationError("kinetics.epsilons", "values must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw ValidationError("kinetics.epsilons", "must be strictly decreasing");
    }
    if (particles < 1) throw ValidationError("kinetics.particles", "must be >= 1");
    if (realizations < 2) throw ValidationError("kinetics.realizations", "must be >= 2");
    if (steps_per_gyro < 16) throw ValidationError("kinetics.dt_per_gyro", "must be >= 16");
    if (!(t_end > 0.0)) throw ValidationError("kinetics.t_end", "must be positive");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (!(output_times[i] > 0.0 && output_times[i] <= t_end))
            throw ValidationError("outputs.times", "times must lie in (0, t_end]");
        if (i > 0 && !(output_times[i] > output_times[i - 1]))
            throw ValidationError("outputs.times", "must be strictly increasing");
    }
    if (!output_times.empty() && std::abs(output_times.back() - t_end) > 1e-12 * t_end)
        throw ValidationError("outputs.times", "last time must equal kinetics.t_end");
    if (!(she_dt > 0.0)) throw ValidationError("she.dt", "must be positive");
    if (init.e0 > grid.e_max) throw ValidationError("kinetics.init.e0", "lies beyond she.e_max");
}

std::vector<double> ExperimentConfig::recorded_times() const
{
    return output_times.empty() ? std::vector<double>{t_end} : output_times;
}

std::vector<std::string> ExperimentConfig::warnings() const
{
    std::vector<std::string> out;
    for (double eps : epsilons) {
        const double lapse = 2.0 * pi * n * eps;
        if (lapse > t_end / 10.0) {
            std::ostringstream s;
            s << "decorrelation lapse 2 pi n eps = " << lapse << " at eps = " << eps << " exceeds t_end / 10";
            out.push_back(s.str());
        }
    }
    if (particles * realizations < 10000)
        out.push_back("particles * realizations < 10^4: too few samples for a headline run");
    return out;
}

Distances compare(const EnergyProfile& p, const EnergyProfile& q)
{
    if (!(p.grid == q.grid) || p.density.size() != q.density.size())
        throw GridMismatch("profiles live on different energy grids");
    const double de = p.grid.width();
    Distances d;
    double cp = 0.0;
    double cq = 0.0;
    for (std::size_t k = 0; k < p.density.size(); ++k) {
        const double diff = p.density[k] - q.density[k];
        d.l1 += std::abs(diff);
        d.l2 += diff * diff;
        cp += p.density[k] * de;
        cq += q.density[k] * de;
        d.w1 += std::abs(cp - cq);
    }
    d.l1 *= de;
    d.l2 = std::sqrt(d.l2 * de);
    d.w1 *= de;
    return d;
}

EnsembleResult run_ensemble(const ExperimentConfig& cfg, double eps)
{
    cfg.validate();
    const auto times = cfg.recorded_times();
    const auto push = PushConfig::for_epsilon(eps, cfg.t_end, times, cfg.steps_per_gyro);
    const std::size_t nr = cfg.realizations;

    EnsembleResult res;
    res.eps = eps;
    res.times = times;
    res.particles = cfg.particles;
    res.realizations = nr;
    res.per_realization.assign(nr, {});
    std::vector<std::size_t> outside(nr, 0);
    parallel_for(nr, cfg.threads, [&](std::size_t r) {
        const auto rec = simulate_ensemble(cfg.init, cfg.field, eps, cfg.n, push, cfg.particles, cfg.master_seed, r);
        auto& row = res.per_realization[r];
        for (const auto& e : rec.energies) {
            auto h = gyro_average_histogram(e, cfg.grid);
            outside[r] += h.out_of_range;
            row.push_back(std::move(h.profile));
        }
    });

    const auto k = static_cast<std::size_t>(cfg.grid.cells);
    for (std::size_t t = 0; t < times.size(); ++t) {
        EnergyProfile mean(cfg.grid);
        std::vector<double> sq(k, 0.0);
        for (std::size_t r = 0; r < nr; ++r) {
            const auto& d = res.per_realization[r][t].density;
            for (std::size_t b = 0; b < k; ++b) {
                mean.density[b] += d[b];
                sq[b] += d[b] * d[b];
            }
        }
        std::vector<double> se(k, 0.0);
        const double m = static_cast<double>(nr);
        for (std::size_t b = 0; b < k; ++b) {
            mean.density[b] /= m;
            const double var = std::max(0.0, (sq[b] - m * mean.density[b] * mean.density[b]) / (m - 1.0));
            se[b] = std::sqrt(var / m);
        }
        res.mean.push_back(std::move(mean));
        res.std_error.push_back(std::move(se));
    }
    for (auto o : outside) res.out_of_range += o;
    return res;
}

std::vector<double> study_face_coefficients(const ExperimentConfig& cfg)
{
    std::vector<double> faces(static_cast<std::size_t>(cfg.grid.cells) + 1);
    for (int f = 0; f <= cfg.grid.cells; ++f) faces[static_cast<std::size_t>(f)] = cfg.grid.face(f);
    auto table = coefficient_profile(cfg.field.correlation, faces, cfg.n, cfg.quadrature, cfg.threads);
    for (double& a : table.a_values) a *= kKineticTimeFactor;
    return face_coefficients(table, cfg.grid);
}

std::vector<SheSnapshot> she_reference(const ExperimentConfig& cfg, const std::vector<double>& a_faces)
{
    return solve(cfg.init.profile(cfg.grid), a_faces, cfg.t_end, cfg.she_dt, cfg.recorded_times());
}

ConvergenceRow score_ensemble(const EnsembleResult& ens, std::size_t t, const EnergyProfile& reference)
{
    ConvergenceRow row;
    row.eps = ens.eps;
    row.dist = compare(ens.mean[t], reference);
    row.out_of_range = ens.out_of_range;
    double se = 0.0;
    for (double s : ens.std_error[t]) se += s;
    row.histogram_std_error = se / static_cast<double>(ens.std_error[t].size());

    // Jackknife: leave one realization out of the mean.
    const std::size_t nr = ens.per_realization.size();
    const double m = static_cast<double>(nr);
    std::vector<Distances> loo(nr);
    EnergyProfile partial(reference.grid);
    for (std::size_t r = 0; r < nr; ++r) {
        const auto& d = ens.per_realization[r][t].density;
        for (std::size_t b = 0; b < d.size(); ++b)
            partial.density[b] = (m * ens.mean[t].density[b] - d[b]) / (m - 1.0);
        loo[r] = compare(partial, reference);
    }
    auto jack = [&](double Distances::*field) {
        double mean = 0.0;
        for (const auto& d : loo) mean += d.*field;
        mean /= m;
        double ss = 0.0;
        for (const auto& d : loo) ss += (d.*field - mean) * (d.*field - mean);
        return std::sqrt((m - 1.0) / m * ss);
    };
    row.std_error = {jack(&Distances::l1), jack(&Distances::l2), jack(&Distances::w1)};
    return row;
}

bool strictly_decreasing(const std::vector<ConvergenceRow>& rows)
{
    if (rows.size() < 2) return false;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!rows[i].ok || !rows[i + 1].ok) return false;
        const double budget = std::hypot(rows[i].std_error.l1, rows[i + 1].std_error.l1);
        if (!(rows[i].dist.l1 - rows[i + 1].dist.l1 > budget)) return false;
    }
    return true;
}

ConvergenceReport run_convergence_study(const ExperimentConfig& cfg, const EpsilonCallback& on_epsilon)
{
    cfg.validate();
    ConvergenceReport report;
    report.warnings = cfg.warnings();
    report.a_faces = study_face_coefficients(cfg);
    report.she = she_reference(cfg, report.a_faces);
    const std::size_t last = report.she.size() - 1;

    for (double eps : cfg.epsilons) {
        ConvergenceRow row;
        row.eps = eps;
        std::optional<EnsembleResult> ens;
        try {
            ens = run_ensemble(cfg, eps);
            row = score_ensemble(*ens, last, report.she[last].profile);
            for (std::size_t t = 0; t < last; ++t)
                report.interior.push_back({eps, ens->times[t], compare(ens->mean[t], report.she[t].profile)});
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            ens.reset();
        }
        report.rows.push_back(row);
        if (on_epsilon) on_epsilon(row, ens ? &*ens : nullptr);
    }
    report.monotone = strictly_decreasing(report.rows);
    if (report.rows.size() < 2)
        report.verdict = "single epsilon: no monotonicity verdict";
    else
        report.verdict = report.monotone ? "L1 strictly decreasing beyond combined stderr"
                                         : "L1 not strictly decreasing beyond combined stderr";
    return report;
}

}  // namespace gkd
