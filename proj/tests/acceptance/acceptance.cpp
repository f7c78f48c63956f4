// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only if all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dcoeff.hpp"
#include "field.hpp"
#include "harness.hpp"
#include "kinetics.hpp"
#include "pipelines.hpp"
#include "rng.hpp"
#include "she.hpp"

using namespace gkd;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

// 1. Quadrature of a(e) for |x|^alpha against K e^{alpha/2}.
Outcome closed_form()
{
    // cos^2 on T = 1 gives K = 0 by symmetry; cos^3 keeps K away from zero for n = 1, 2.
    const auto env = TemporalEnvelope::raised_cosine_power(3.0, 1.0);
    double worst = 0.0;
    double smallest_k = 1e300;
    for (double alpha : {1.0, 4.0 / 3.0, 2.0}) {
        const auto model = CorrelationModel::separable(env, SpatialProfile::power_law(alpha));
        for (int n : {1, 2}) {
            const double k = richardson_coefficient(env, alpha, n);
            smallest_k = std::min(smallest_k, std::abs(k));
            for (double e : {0.25, 1.0, 4.0}) {
                const double a = diffusion_coefficient(model, e, n);
                const double ref = k * std::pow(e, alpha / 2.0);
                worst = std::max(worst, std::abs(a - ref) / std::abs(ref));
            }
        }
    }
    return {worst <= 1e-6, fmt("max relative error %.3e (tol 1e-6), min |K| %.3e", worst, smallest_k)};
}

// 2. Self-similar exponent of the SHE with a = e^{alpha/2}.
Outcome scaling()
{
    std::ostringstream s;
    bool ok = true;
    for (double alpha : {4.0 / 3.0, 1.0}) {
        const auto run = scaling_study(alpha);
        const double beta = scaling_exponent(alpha);
        const double rel = std::abs(run.fit.beta_hat - beta) / beta;
        ok = ok && rel <= 0.05;
        s << fmt("alpha=%.4g beta_hat=%.4f expected %.4f (rel %.2e)  ", alpha, run.fit.beta_hat, beta, rel);
    }
    s << "(tol 5%)";
    return {ok, s.str()};
}

// 3. a(e) >= 0 over random admissible separable correlations.
Outcome positivity()
{
    Engine eng(derive_seed(0xacce97ULL, StreamTag::Sampling, 3));
    double worst = 1e300;  // smallest a(e) / |a(1)|
    for (int c = 0; c < 200; ++c) {
        const double p = 2.0 + 4.0 * uniform01(eng);
        const double b = 0.5 + 1.5 * uniform01(eng);
        const double s2 = 0.1 + 2.9 * uniform01(eng);
        const double ell = 0.3 + 2.7 * uniform01(eng);
        const int n = 1 + static_cast<int>(3.0 * uniform01(eng));
        const auto model = CorrelationModel::separable(TemporalEnvelope::block_autocorrelation(p, b),
                                                       SpatialProfile::gaussian_bump(s2, ell));
        const double a1 = std::abs(diffusion_coefficient(model, 1.0, n));
        for (double e : {0.25, 1.0, 4.0}) {
            const double a = diffusion_coefficient(model, e, n);
            worst = std::min(worst, a1 > 0.0 ? a / a1 : (a < 0.0 ? -1.0 : 0.0));
        }
    }
    return {worst >= -1e-10, fmt("200 models, min a(e)/|a(1)| = %.3e (tol -1e-10)", worst)};
}

// 4. Work-integral Monte Carlo against quadrature, and window drift.
Outcome oracle()
{
    const auto spec = make_field_spec(SpatialProfile::gaussian_bump(1.0, 1.0), 2.0, 1.0, 64, 0);
    WorkOracleOptions opts;
    opts.threads = workers();
    const std::uint64_t seed = 20240604;
    const std::size_t samples = 10000;
    std::ostringstream s;
    bool ok = true;
    for (double e : {0.5, 1.0, 2.0}) {
        const double quad = diffusion_coefficient(spec.correlation, e, 1);
        const auto mc = mc_work_oracle(spec, e, 1, 8, samples, seed, opts);
        const double z = std::abs(mc.estimate - quad) / mc.std_error;
        const double rel = std::abs(mc.estimate - quad) / quad;
        ok = ok && z <= 3.0 && rel <= 0.10;
        s << fmt("e=%.1f mc=%.5f quad=%.5f z=%.2f rel=%.3f  ", e, mc.estimate, quad, z, rel);
    }
    // Same seed, so the three windows share their field realizations.
    std::vector<WorkOracleResult> byn;
    for (int nw : {4, 8, 16}) byn.push_back(mc_work_oracle(spec, 1.0, 1, nw, samples, seed, opts));
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < byn.size(); ++i) {
        const double drift = std::abs(byn[i + 1].estimate - byn[i].estimate) / byn[i + 1].std_error;
        worst = std::max(worst, drift);
    }
    ok = ok && worst < 1.0;
    s << fmt("drift N=4,8,16 max |da|/stderr=%.2f (tol 3 sigma, 10%%, drift < 1 stderr)", worst);
    return {ok, s.str()};
}

// 5. Exact field-free gyration.
Outcome gyro_flow()
{
    const double eps = 0.05;
    auto ens = initialize_ensemble(InitialDistribution::smooth_bump(1.0, 0.5), eps, 1, 256, 5, 0);
    const auto start = ens;
    const auto e0 = ens.energies();
    const double dt = 2.0 * pi * eps / 64.0;
    double ret = 0.0;
    for (int s = 0; s < 64; ++s) free_step(ens, dt);
    for (std::size_t i = 0; i < ens.size(); ++i)
        ret = std::max({ret, norm(ens.lifted(i) - start.lifted(i)), norm(ens.v[i] - start.v[i])});
    for (int s = 64; s < 10000; ++s) free_step(ens, dt);
    double drift = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) drift = std::max(drift, std::abs(ens.energy(i) - e0[i]) / e0[i]);

    // RK4 with step 1e-6 for x' = v, v' = v_perp / eps.
    auto rk4 = [](Vec2 x, Vec2 v, double t, double ep) {
        const long steps = static_cast<long>(std::ceil(t / 1e-6));
        const double h = t / static_cast<double>(steps);
        auto acc = [ep](Vec2 w) { return (1.0 / ep) * perp(w); };
        for (long i = 0; i < steps; ++i) {
            const Vec2 k1v = acc(v), k2v = acc(v + 0.5 * h * k1v), k3v = acc(v + 0.5 * h * k2v),
                       k4v = acc(v + h * k3v);
            const Vec2 k2x = v + 0.5 * h * k1v, k3x = v + 0.5 * h * k2v, k4x = v + h * k3v;
            x += (h / 6.0) * (v + 2.0 * k2x + 2.0 * k3x + k4x);
            v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        return std::pair{x, v};
    };
    double rk = 0.0;
    for (auto [x, v, t, ep] : {std::tuple{Vec2{0, 0}, Vec2{1, 0}, pi, 1.0},
                               std::tuple{Vec2{0.2, -0.1}, Vec2{-0.4, 0.9}, 0.7, 0.3}}) {
        const auto [xr, vr] = rk4(x, v, t, ep);
        const auto [xe, ve] = free_flow(x, v, t, ep);
        rk = std::max({rk, norm(xr - xe), norm(vr - ve)});
    }
    const bool ok = drift <= 1e-12 && ret <= 1e-12 && rk <= 1e-9;
    return {ok, fmt("energy drift %.2e over 1e4 steps, gyro return %.2e (tol 1e-12), RK4 gap %.2e (tol 1e-9)",
                    drift, ret, rk)};
}

// 6. SHE invariants and the image-method heat kernel.
Outcome she_invariants()
{
    const EnergyGrid grid{8.0, 128};
    const auto p = delta_profile(grid, 1.0);
    SheState st{p, 0.0, face_coefficients([](double e) { return std::pow(e, 2.0 / 3.0); }, grid)};
    for (int s = 0; s < 10000; ++s) step_implicit(st, 1e-3);
    const double mass_err = std::abs(st.profile.mass() - p.mass()) / p.mass();

    Engine eng(derive_seed(0xacce97ULL, StreamTag::Sampling, 6));
    int violations = 0;
    for (int c = 0; c < 100; ++c) {
        const int cells = 8 + static_cast<int>(uniform01(eng) * 120);
        const EnergyGrid g{0.5 + 8.0 * uniform01(eng), cells};
        EnergyProfile q(g);
        for (double& d : q.density) d = uniform01(eng) < 0.3 ? 0.0 : uniform01(eng);
        q.density[0] += 1e-3;
        std::vector<double> faces(static_cast<std::size_t>(cells + 1));
        for (double& a : faces) a = 3.0 * uniform01(eng);
        const double hi = *std::max_element(q.density.begin(), q.density.end());
        const double dt = std::pow(10.0, -4.0 + 4.0 * uniform01(eng));
        SheState s{q, 0.0, faces};
        for (int k = 0; k < 50; ++k) step_implicit(s, dt);
        for (double d : s.profile.density) violations += (d < 0.0 || d > hi * (1.0 + 1e-12));
    }

    // Neumann heat kernel on [0, L] by images, D = 1.
    auto kernel = [](double e, double t) {
        const double L = 4.0, e0 = 1.5, var = 2.0 * t;
        double sum = 0.0;
        for (int m = -20; m <= 20; ++m)
            for (double src : {e0 + 2.0 * m * L, -e0 + 2.0 * m * L}) sum += std::exp(-(e - src) * (e - src) / (2.0 * var));
        return sum / std::sqrt(2.0 * pi * var);
    };
    const EnergyGrid hg{4.0, 400};
    EnergyProfile init(hg), exact(hg);
    for (int k = 0; k < hg.cells; ++k) {
        init.density[static_cast<std::size_t>(k)] = kernel(hg.center(k), 0.02);
        exact.density[static_cast<std::size_t>(k)] = kernel(hg.center(k), 0.22);
    }
    const auto snaps = solve(init, std::vector<double>(401, 1.0), 0.2, 1e-4);
    const double l1 = compare(snaps.back().profile, exact).l1;

    const bool ok = mass_err <= 1e-12 && violations == 0 && l1 <= 1e-3;
    return {ok, fmt("mass error %.2e (tol 1e-12), %d positivity/max-principle violations in 100 cases, "
                    "image-method L1 %.2e (tol 1e-3)",
                    mass_err, violations, l1)};
}

// 7. Kinetic ensembles approach the SHE solution as eps decreases.
Outcome limit_signature()
{
    ExperimentConfig cfg{.field = make_field_spec(SpatialProfile::gaussian_bump(1.0, 1.0), 2.0, 1.0, 64, 0)};
    cfg.n = 1;
    cfg.init = InitialDistribution::delta(1.0);
    cfg.epsilons = {0.1, 0.05, 0.025};
    cfg.particles = 2000;
    cfg.realizations = 50;
    cfg.t_end = 1.0;
    cfg.master_seed = 20240607;
    cfg.threads = workers();
    const auto report = run_convergence_study(cfg);
    std::ostringstream s;
    bool all_ok = true;
    for (const auto& r : report.rows) {
        all_ok = all_ok && r.ok;
        s << fmt("eps=%.3g L1=%.4f+-%.4f  ", r.eps, r.dist.l1, r.std_error.l1);
    }
    const double last = report.rows.back().dist.l1;
    const bool ok = all_ok && report.monotone && last <= 0.1;
    s << fmt("strict decrease: %s, L1(0.025) tol 0.1", report.monotone ? "yes" : "no");
    return {ok, s.str()};
}

// 8. Field synthesis: mean zero, target correlation, no correlation across blocks.
Outcome field_synthesis()
{
    const auto spec = make_field_spec(SpatialProfile::gaussian_bump(1.0, 1.0), 2.0, 1.0, 64, 20240608);
    const auto mean = field_mean(spec, 256, 1000, workers());
    const bool mean_ok = std::abs(mean.mean) <= 4.0 * mean.std_error;

    std::vector<CorrelationLag> lags;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) lags.push_back({0.2 * i, Vec2{0.5 * j, 0.0}});
    const std::size_t grid_lags = lags.size();
    for (double tau : {1.0, 1.25, 1.5, 2.0})
        for (double x : {0.0, 0.5}) lags.push_back({tau, Vec2{x, 0.0}});
    const auto est = empirical_correlation(spec, lags, 2000, 64, workers());
    double worst_grid = 0.0, worst_far = 0.0;
    for (std::size_t l = 0; l < est.size(); ++l) {
        const double z = std::abs(est[l].estimate - est[l].target) / est[l].std_error;
        (l < grid_lags ? worst_grid : worst_far) = std::max(l < grid_lags ? worst_grid : worst_far, z);
    }
    const bool ok = mean_ok && worst_grid <= 3.0 && worst_far <= 3.0;
    return {ok, fmt("mean %.2e (|z|=%.2f, tol 4), 5x5 grid max |z|=%.2f, beyond-block max |z|=%.2f (tol 3)",
                    mean.mean, std::abs(mean.mean) / mean.std_error, worst_grid, worst_far)};
}

}  // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 closed-form coefficient", closed_form},
        {"2 anomalous scaling exponent", scaling},
        {"3 coefficient positivity", positivity},
        {"4 work-integral oracle", oracle},
        {"5 exact gyro-flow", gyro_flow},
        {"6 diffusion solver invariants", she_invariants},
        {"7 diffusion-limit convergence", limit_signature},
        {"8 field synthesis", field_synthesis},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
