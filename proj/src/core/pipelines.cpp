// SPDX-License-Identifier: Apache-2.0
#include "pipelines.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "harness.hpp"

namespace gkd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Clock {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

fs::path output_dir(const RunConfig* cfg, const RunOptions& opts)
{
    fs::path dir = !opts.out_dir.empty() ? fs::path(opts.out_dir) : fs::path(cfg ? cfg->outputs.dir : "out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::string& header) : path_(path), out_(path)
    {
        if (!out_) throw IoError("cannot write " + path.string());
        out_ << header << "\n";
    }
    template <class... T>
    void row(const T&... cells)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << "\n";
    }
    std::string close()
    {
        out_.close();
        if (!out_) throw IoError("failed writing " + path_.string());
        return path_.string();
    }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    fs::path path_;
    std::ofstream out_;
};

std::string write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
    return path.string();
}

bool wants(const RunConfig& cfg, const char* format)
{
    for (const auto& f : cfg.outputs.formats)
        if (f == format) return true;
    return false;
}

json seeds_json(const RunConfig& cfg)
{
    json s = json::object();
    if (cfg.field.master_seed) {
        s["master_seed"] = *cfg.field.master_seed;
        s["streams"] = {{"field", "derive(master, field, realization)"},
                        {"init", "derive(master, init, realization)"},
                        {"sampling", "derive(master, sampling, realization)"}};
    }
    return s;
}

/// manifest.json: config echo, hash, seeds, version, wall time and the files written.
std::string write_manifest(const fs::path& dir, const char* subcommand, const RunConfig* cfg,
                           const std::vector<std::string>& files, double wall, const json& extra = json::object())
{
    json m;
    m["tool"] = "gkdiff";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    if (cfg != nullptr) {
        m["config"] = canonical(*cfg);
        m["config_hash"] = hash_hex(config_hash(*cfg));
        m["seeds"] = seeds_json(*cfg);
    }
    m["wall_time_s"] = wall;
    m["files"] = files;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    return write_json(dir / "manifest.json", m);
}

json distances_json(const Distances& d) { return {{"L1", d.l1}, {"L2", d.l2}, {"W1", d.w1}}; }

}  // namespace

// ---------------------------------------------------------------------------

PipelineResult run_coeff(const RunConfig& cfg, const std::vector<double>& energies, bool mc, const RunOptions& opts)
{
    cfg.validate();
    if (energies.empty()) throw ValidationError("e", "need at least one energy");
    for (double e : energies)
        if (!(e >= 0.0)) throw ValidationError("e", "energies must be >= 0");
    if (mc) cfg.validate_stochastic();
    Clock clock;
    const auto dir = output_dir(&cfg, opts);
    const auto model = cfg.model();
    const int n = cfg.correlation.n;

    PipelineResult res;
    CsvWriter csv(dir / "coeff.csv", "e,a,stderr,method,n");
    std::ostringstream summary;
    for (double e : energies) {
        const auto q = diffusion_coefficient_detail(model, e, n);
        csv.row(e, q.value, q.error_estimate, to_string(CoefficientMethod::Quadrature), n);
        summary << "a(" << e << ")=" << q.value << " ";
    }
    if (mc) {
        const auto spec = cfg.field_spec();
        const auto oopts = cfg.oracle_options(opts.threads);
        for (double e : energies) {
            const auto r = mc_work_oracle(spec, e, n, cfg.oracle.window, static_cast<std::size_t>(cfg.oracle.samples),
                                          derive_seed(*cfg.field.master_seed, StreamTag::Oracle, 0), oopts);
            csv.row(e, r.estimate, r.std_error, to_string(CoefficientMethod::MonteCarlo), n);
        }
    }
    res.files.push_back(csv.close());
    json extra = {{"work_oracle_norm", kWorkOracleNorm}, {"kinetic_time_factor", kKineticTimeFactor}};
    res.files.push_back(write_manifest(dir, "coeff", &cfg, res.files, clock.seconds(), extra));
    res.summary = summary.str();
    return res;
}

PipelineResult run_field_validate(const RunConfig& cfg, int lags, int realizations, const RunOptions& opts)
{
    if (lags < 2) throw ValidationError("lags", "must be >= 2");
    if (realizations < 100) throw ValidationError("realizations", "must be >= 100");
    const auto spec = cfg.field_spec();
    Clock clock;
    const auto dir = output_dir(&cfg, opts);
    const double b = spec.block_length;
    const double ell = cfg.correlation.ell;

    std::vector<CorrelationLag> grid;
    for (int i = 0; i < lags; ++i)
        for (int j = 0; j < lags; ++j)
            grid.push_back({1.25 * b * i / (lags - 1), Vec2{2.0 * ell * j / (lags - 1), 0.0}});
    const auto est = empirical_correlation(spec, grid, realizations, 64, opts.threads);
    const auto mean = field_mean(spec, 1000, 100, opts.threads);

    PipelineResult res;
    CsvWriter csv(dir / "field_validate.csv", "tau,x1,x2,target,estimate,stderr");
    double worst = 0.0;
    for (const auto& e : est) {
        csv.row(e.lag.tau, e.lag.x.x, e.lag.x.y, e.target, e.estimate, e.std_error);
        if (e.std_error > 0.0) worst = std::max(worst, std::abs(e.estimate - e.target) / e.std_error);
    }
    res.files.push_back(csv.close());
    json extra = {{"field_mean", {{"mean", mean.mean}, {"stderr", mean.std_error}}},
                  {"max_abs_z", worst},
                  {"realizations", realizations}};
    res.files.push_back(write_manifest(dir, "field-validate", &cfg, res.files, clock.seconds(), extra));
    std::ostringstream s;
    s << "max |estimate - target| / stderr = " << worst << "; mean = " << mean.mean << " +- " << mean.std_error;
    res.summary = s.str();
    return res;
}

PipelineResult run_simulate(const RunConfig& cfg, double eps, const RunOptions& opts)
{
    if (!(eps > 0.0)) throw ValidationError("epsilon", "must be positive");
    auto xcfg = cfg.experiment(opts.threads);
    xcfg.epsilons = {eps};
    xcfg.validate();
    Clock clock;
    const auto dir = output_dir(&cfg, opts);
    const auto ens = run_ensemble(xcfg, eps);

    PipelineResult res;
    if (wants(cfg, "csv")) {
        CsvWriter csv(dir / "simulate.csv", "time,e_center,density,stderr");
        for (std::size_t t = 0; t < ens.times.size(); ++t)
            for (int k = 0; k < xcfg.grid.cells; ++k)
                csv.row(ens.times[t], xcfg.grid.center(k), ens.mean[t].density[static_cast<std::size_t>(k)],
                        ens.std_error[t][static_cast<std::size_t>(k)]);
        res.files.push_back(csv.close());
    }
    json meta = {{"config_hash", hash_hex(config_hash(cfg))},
                 {"seeds", seeds_json(cfg)},
                 {"epsilon", eps},
                 {"n", xcfg.n},
                 {"particles", ens.particles},
                 {"realizations", ens.realizations},
                 {"dt_per_gyro", xcfg.steps_per_gyro},
                 {"out_of_range", ens.out_of_range},
                 {"wall_time_s", clock.seconds()},
                 {"warnings", xcfg.warnings()}};
    res.files.push_back(write_json(dir / "simulate_meta.json", meta));
    res.files.push_back(write_manifest(dir, "simulate", &cfg, res.files, clock.seconds()));
    std::ostringstream s;
    s << "eps=" << eps << " realizations=" << ens.realizations << " particles=" << ens.particles
      << " out_of_range=" << ens.out_of_range;
    res.summary = s.str();
    return res;
}

PipelineResult run_she(const RunConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    Clock clock;
    const auto dir = output_dir(&cfg, opts);
    const auto grid = cfg.grid();
    std::vector<double> faces;
    for (int f = 0; f <= grid.cells; ++f) faces.push_back(grid.face(f));
    auto table = coefficient_profile(cfg.model(), faces, cfg.correlation.n, {}, opts.threads);
    for (double& a : table.a_values) a *= kKineticTimeFactor;
    const std::vector<double> times = cfg.outputs.times.empty() ? std::vector<double>{cfg.kinetics.t_end}
                                                                : cfg.outputs.times;
    const auto snaps = solve(cfg.initial_distribution().profile(grid), table, cfg.kinetics.t_end, cfg.she.dt, times);

    PipelineResult res;
    if (wants(cfg, "csv")) {
        CsvWriter csv(dir / "she.csv", "time,e_center,density");
        for (const auto& s : snaps)
            for (int k = 0; k < grid.cells; ++k) csv.row(s.time, grid.center(k), s.profile.density[static_cast<std::size_t>(k)]);
        res.files.push_back(csv.close());
    }
    json fit;
    try {
        const auto f = self_similar_fit(snaps, snaps.front().time, snaps.back().time);
        fit = {{"beta_hat", f.beta_hat}, {"stderr", f.std_error}, {"window", {f.t_lo, f.t_hi}}, {"points", f.points}};
    } catch (const InvalidArgument& e) {
        fit = {{"beta_hat", nullptr}, {"stderr", nullptr}, {"window", {snaps.front().time, snaps.back().time}},
               {"error", e.what()}};
    }
    fit["mass"] = snaps.back().profile.mass();
    fit["median"] = snaps.back().profile.median();
    res.files.push_back(write_json(dir / "she_fit.json", fit));
    res.files.push_back(write_manifest(dir, "she", &cfg, res.files, clock.seconds(),
                                       {{"kinetic_time_factor", kKineticTimeFactor}}));
    res.summary = "median(t_end) = " + fmt(snaps.back().profile.median());
    return res;
}

PipelineResult run_study(const RunConfig& cfg, const RunOptions& opts)
{
    const auto xcfg = cfg.experiment(opts.threads);
    Clock clock;
    const auto dir = output_dir(&cfg, opts);
    const auto& grid = xcfg.grid;
    PipelineResult res;

    std::size_t index = 0;
    auto persist = [&](const ConvergenceRow& row, const EnsembleResult* ens) {
        const std::string stem = "study_eps_" + std::to_string(index++);
        if (ens != nullptr) {
            CsvWriter csv(dir / (stem + ".csv"), "time,e_center,density,stderr");
            for (std::size_t t = 0; t < ens->times.size(); ++t)
                for (int k = 0; k < grid.cells; ++k)
                    csv.row(ens->times[t], grid.center(k), ens->mean[t].density[static_cast<std::size_t>(k)],
                            ens->std_error[t][static_cast<std::size_t>(k)]);
            res.files.push_back(csv.close());
        }
        json partial = {{"eps", row.eps}, {"ok", row.ok}, {"error", row.error}, {"distances", distances_json(row.dist)},
                        {"stderr", distances_json(row.std_error)}};
        res.files.push_back(write_json(dir / (stem + ".json"), partial));
    };
    const auto report = run_convergence_study(xcfg, persist);

    CsvWriter table(dir / "study_table.csv", "eps,L1,L2,W1,L1_stderr,L2_stderr,W1_stderr,hist_stderr,out_of_range,status");
    json rows = json::array();
    for (const auto& r : report.rows) {
        table.row(r.eps, r.dist.l1, r.dist.l2, r.dist.w1, r.std_error.l1, r.std_error.l2, r.std_error.w1,
                  r.histogram_std_error, r.out_of_range, std::string(r.ok ? "ok" : "failed"));
        rows.push_back({{"eps", r.eps}, {"distances", distances_json(r.dist)}, {"stderr", distances_json(r.std_error)},
                        {"hist_stderr", r.histogram_std_error}, {"out_of_range", r.out_of_range},
                        {"ok", r.ok}, {"error", r.error}});
    }
    res.files.push_back(table.close());

    CsvWriter interior(dir / "study_interior.csv", "eps,time,L1,L2,W1");
    json interior_json = json::array();
    for (const auto& r : report.interior) {
        interior.row(r.eps, r.time, r.dist.l1, r.dist.l2, r.dist.w1);
        interior_json.push_back({{"eps", r.eps}, {"time", r.time}, {"distances", distances_json(r.dist)}});
    }
    res.files.push_back(interior.close());

    CsvWriter she(dir / "study_she.csv", "time,e_center,density");
    for (const auto& s : report.she)
        for (int k = 0; k < grid.cells; ++k) she.row(s.time, grid.center(k), s.profile.density[static_cast<std::size_t>(k)]);
    res.files.push_back(she.close());

    json rep = {{"metric_note", "L1/L2/W1 between gyro-averaged energy densities at the final time; a finite-sample "
                                "surrogate for weak-L2 convergence uniformly in time"},
                {"config_hash", hash_hex(config_hash(cfg))},
                {"rows", rows},
                {"interior", interior_json},
                {"monotone", report.monotone},
                {"verdict", report.verdict},
                {"warnings", report.warnings},
                {"kinetic_time_factor", kKineticTimeFactor},
                {"wall_time_s", clock.seconds()}};
    res.files.push_back(write_json(dir / "study_report.json", rep));
    res.files.push_back(write_manifest(dir, "study", &cfg, res.files, clock.seconds()));
    res.passed = report.monotone || report.rows.size() < 2;
    for (const auto& r : report.rows) res.passed = res.passed && r.ok;
    res.summary = report.verdict;
    return res;
}

ScalingRun scaling_study(double alpha, double e_max, int cells)
{
    if (!(alpha >= 0.0 && alpha <= 2.0)) throw ValidationError("alpha", "must lie in [0, 2]");
    const EnergyGrid grid{e_max, cells};
    grid.validate();
    const auto a = face_coefficients([alpha](double e) { return std::pow(e, 0.5 * alpha); }, grid);

    ScalingRun run;
    EnergyProfile current = delta_profile(grid, 0.0);
    double t = 0.0;
    // 20 outputs per decade; the step tracks 1% of the current time.
    for (int i = 0; i <= 120; ++i) {
        const double target = std::pow(10.0, -3.0 + i / 20.0);
        const double dt = std::max(1e-6, 0.01 * std::max(t, 1e-4));
        current = solve(current, a, target - t, dt).back().profile;
        t = target;
        run.snapshots.push_back({t, current});
        if (boundary_mass_fraction(current) > 1e-3) break;
    }
    const double de = grid.width();
    double t_lo = NAN;
    double t_hi = NAN;
    for (const auto& s : run.snapshots) {
        const double m = s.profile.median();
        const bool clear = boundary_mass_fraction(s.profile) <= kBoundaryMassLimit;
        if (std::isnan(t_lo) && m >= 40.0 * de) t_lo = s.time;
        if (!std::isnan(t_lo) && clear && m <= e_max / 5.0) t_hi = s.time;
    }
    if (std::isnan(t_lo) || std::isnan(t_hi)) throw InvalidArgument("no usable self-similar window");
    run.fit = self_similar_fit(run.snapshots, t_lo, t_hi);
    run.collapse = collapse_distance(run.snapshots, t_lo, t_hi);
    return run;
}

PipelineResult run_scaling(double alpha, const RunOptions& opts)
{
    Clock clock;
    const auto run = scaling_study(alpha);
    const auto dir = output_dir(nullptr, opts);
    PipelineResult res;
    CsvWriter csv(dir / "scaling.csv", "time,median");
    for (const auto& s : run.snapshots) csv.row(s.time, s.profile.median());
    res.files.push_back(csv.close());
    const double expected = scaling_exponent(alpha);
    json j = {{"alpha", alpha},
              {"beta_expected", expected},
              {"beta_hat", run.fit.beta_hat},
              {"stderr", run.fit.std_error},
              {"window", {run.fit.t_lo, run.fit.t_hi}},
              {"points", run.fit.points},
              {"collapse_l1", run.collapse}};
    res.files.push_back(write_json(dir / "scaling.json", j));
    res.files.push_back(write_manifest(dir, "scaling", nullptr, res.files, clock.seconds(), {{"alpha", alpha}}));
    res.summary = "beta_hat = " + fmt(run.fit.beta_hat) + " (expected " + fmt(expected) + ")";
    return res;
}

ProfileTable read_profile_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("time,e_center,density", 0) != 0)
        throw ValidationError(path, "header must start with time,e_center,density");
    std::vector<double> times;
    std::vector<std::vector<double>> centers, values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream s(line);
        std::string a, b, c;
        if (!std::getline(s, a, ',') || !std::getline(s, b, ',') || !std::getline(s, c, ','))
            throw ValidationError(path, "malformed row at line " + std::to_string(lineno));
        double t = 0, e = 0, d = 0;
        try {
            t = std::stod(a);
            e = std::stod(b);
            d = std::stod(c);
        } catch (const std::exception&) {
            throw ValidationError(path, "non-numeric value at line " + std::to_string(lineno));
        }
        if (times.empty() || t != times.back()) {
            times.push_back(t);
            centers.emplace_back();
            values.emplace_back();
        }
        centers.back().push_back(e);
        values.back().push_back(d);
    }
    if (times.empty()) throw ValidationError(path, "no data rows");
    ProfileTable table;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& c = centers[i];
        const double de = 2.0 * c.front();
        const int cells = static_cast<int>(c.size());
        const EnergyGrid grid{de * cells, cells};
        for (int k = 0; k < cells; ++k)
            if (std::abs(c[static_cast<std::size_t>(k)] - grid.center(k)) > 1e-9 * grid.e_max)
                throw ValidationError(path, "energy centres are not a uniform grid starting at 0");
        table.times.push_back(times[i]);
        table.profiles.emplace_back(grid, values[i]);
    }
    return table;
}

PipelineResult run_compare(const std::string& a_path, const std::string& b_path, const RunOptions& opts)
{
    const auto a = read_profile_csv(a_path);
    const auto b = read_profile_csv(b_path);
    const auto& p = a.profiles.back();
    const auto& q = b.profiles.back();
    if (p.grid.cells != q.grid.cells || std::abs(p.grid.e_max - q.grid.e_max) > 1e-9 * p.grid.e_max)
        throw GridMismatch("profiles live on different energy grids");
    EnergyProfile q_on_p(p.grid, q.density);
    const auto d = compare(p, q_on_p);
    PipelineResult res;
    res.distances = d;
    json j = {{"a", a_path}, {"b", b_path}, {"time_a", a.times.back()}, {"time_b", b.times.back()},
              {"L1", d.l1}, {"L2", d.l2}, {"W1", d.w1}};
    if (!opts.out_dir.empty()) {
        const auto dir = output_dir(nullptr, opts);
        res.files.push_back(write_json(dir / "compare.json", j));
    }
    res.summary = j.dump();
    return res;
}

}  // namespace gkd
