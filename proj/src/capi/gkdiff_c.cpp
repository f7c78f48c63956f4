// SPDX-License-Identifier: Apache-2.0
#include "gkdiff/gkdiff.h"

#include <cstring>
#include <exception>
#include <string>

#include "../core/config.hpp"
#include "../core/dcoeff.hpp"
#include "../core/errors.hpp"
#include "../core/harness.hpp"
#include "../core/kinetics.hpp"
#include "../core/pipelines.hpp"

struct gkd_config {
    gkd::RunConfig cfg;
};

struct gkd_table {
    gkd::DiffusionCoefficientTable table;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_field;
thread_local std::string last_summary;

template <class F>
gkd_status guarded(F&& body)
{
    last_error.clear();
    last_field.clear();
    try {
        body();
        return GKD_OK;
    } catch (const gkd::ValidationError& e) {
        last_error = e.what();
        last_field = e.field();
        return GKD_ERR_VALIDATION;
    } catch (const gkd::InvalidArgument& e) {
        last_error = e.what();
        return GKD_ERR_INVALID_ARGUMENT;
    } catch (const gkd::NonConvergedQuadrature& e) {
        last_error = e.what();
        return GKD_ERR_NONCONVERGED;
    } catch (const gkd::IoError& e) {
        last_error = e.what();
        return GKD_ERR_IO;
    } catch (const gkd::GridMismatch& e) {
        last_error = e.what();
        return GKD_ERR_GRID_MISMATCH;
    } catch (const std::exception& e) {
        last_error = e.what();
        return GKD_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return GKD_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what)
{
    if (p == nullptr) throw gkd::InvalidArgument(std::string(what) + " must not be NULL");
}

gkd::RunOptions options(const gkd_run_options* opts)
{
    gkd::RunOptions o;
    if (opts != nullptr) {
        if (opts->out_dir != nullptr) o.out_dir = opts->out_dir;
        o.threads = opts->threads;
    }
    return o;
}

}  // namespace

extern "C" {

const char* gkd_version(void) { return gkd::kVersion; }

const char* gkd_status_string(gkd_status status)
{
    switch (status) {
    case GKD_OK: return "ok";
    case GKD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GKD_ERR_VALIDATION: return "validation error";
    case GKD_ERR_NONCONVERGED: return "numerical non-convergence";
    case GKD_ERR_IO: return "i/o error";
    case GKD_ERR_GRID_MISMATCH: return "grid mismatch";
    case GKD_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* gkd_last_error(void) { return last_error.c_str(); }
const char* gkd_last_error_field(void) { return last_field.c_str(); }
const char* gkd_last_summary(void) { return last_summary.c_str(); }

gkd_status gkd_config_load(const char* path, gkd_config** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new gkd_config{gkd::load_config(path)};
    });
}

gkd_status gkd_config_parse(const char* text, gkd_config** out)
{
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new gkd_config{gkd::parse_config(text)};
    });
}

void gkd_config_free(gkd_config* cfg) { delete cfg; }

gkd_status gkd_config_hash(const gkd_config* cfg, uint64_t* out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = gkd::config_hash(cfg->cfg);
    });
}

gkd_status gkd_config_canonical(const gkd_config* cfg, char* buf, size_t cap, size_t* needed)
{
    return guarded([&] {
        require(cfg, "cfg");
        const auto text = gkd::canonical(cfg->cfg);
        if (needed != nullptr) *needed = text.size() + 1;
        if (buf != nullptr && cap > 0) {
            const size_t n = std::min(cap - 1, text.size());
            std::memcpy(buf, text.data(), n);
            buf[n] = '\0';
        }
    });
}

gkd_status gkd_scaling_exponent(double alpha, double* out)
{
    return guarded([&] {
        require(out, "out");
        *out = gkd::scaling_exponent(alpha);
    });
}

gkd_status gkd_diffusion_coefficient(const gkd_config* cfg, double e, double* out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = gkd::diffusion_coefficient(cfg->cfg.model(), e, cfg->cfg.correlation.n);
    });
}

gkd_status gkd_richardson_coefficient(const gkd_config* cfg, double alpha, double* out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = gkd::richardson_coefficient(cfg->cfg.envelope(), alpha, cfg->cfg.correlation.n);
    });
}

gkd_status gkd_mc_work_oracle(const gkd_config* cfg, double e, int window, size_t samples, uint64_t seed,
                              unsigned threads, double* estimate, double* std_error)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(estimate, "estimate");
        auto opts = cfg->cfg.oracle_options(threads);
        cfg->cfg.validate_stochastic();
        const auto r = gkd::mc_work_oracle(cfg->cfg.field_spec(), e, cfg->cfg.correlation.n, window, samples, seed, opts);
        *estimate = r.estimate;
        if (std_error != nullptr) *std_error = r.std_error;
    });
}

gkd_status gkd_free_flow(const double x[2], const double v[2], double t, double eps, double x_out[2], double v_out[2])
{
    return guarded([&] {
        require(x, "x");
        require(v, "v");
        require(x_out, "x_out");
        require(v_out, "v_out");
        const auto [x1, v1] = gkd::free_flow({x[0], x[1]}, {v[0], v[1]}, t, eps);
        x_out[0] = x1.x;
        x_out[1] = x1.y;
        v_out[0] = v1.x;
        v_out[1] = v1.y;
    });
}

gkd_status gkd_compare(size_t cells, double e_max, const double* p, const double* q, double out[3])
{
    return guarded([&] {
        require(p, "p");
        require(q, "q");
        require(out, "out");
        if (cells > 1u << 30) throw gkd::InvalidArgument("too many cells");
        const gkd::EnergyGrid grid{e_max, static_cast<int>(cells)};
        const gkd::EnergyProfile a(grid, std::vector<double>(p, p + cells));
        const gkd::EnergyProfile b(grid, std::vector<double>(q, q + cells));
        const auto d = gkd::compare(a, b);
        out[0] = d.l1;
        out[1] = d.l2;
        out[2] = d.w1;
    });
}

gkd_status gkd_table_compute(const gkd_config* cfg, const double* e, size_t count, unsigned threads, gkd_table** out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(e, "e");
        require(out, "out");
        auto t = gkd::coefficient_profile(cfg->cfg.model(), std::span<const double>(e, count),
                                          cfg->cfg.correlation.n, {}, threads);
        *out = new gkd_table{std::move(t)};
    });
}

gkd_status gkd_table_size(const gkd_table* table, size_t* out)
{
    return guarded([&] {
        require(table, "table");
        require(out, "out");
        *out = table->table.e_values.size();
    });
}

gkd_status gkd_table_get(const gkd_table* table, size_t index, double* e, double* a)
{
    return guarded([&] {
        require(table, "table");
        if (index >= table->table.e_values.size()) throw gkd::InvalidArgument("table index out of range");
        if (e != nullptr) *e = table->table.e_values[index];
        if (a != nullptr) *a = table->table.a_values[index];
    });
}

gkd_status gkd_table_interpolate(const gkd_table* table, double e, double* a)
{
    return guarded([&] {
        require(table, "table");
        require(a, "a");
        *a = table->table.interpolate(e);
    });
}

void gkd_table_free(gkd_table* table) { delete table; }

gkd_status gkd_run_coeff(const gkd_config* cfg, const double* e, size_t count, int mc, const gkd_run_options* opts)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(e, "e");
        last_summary = gkd::run_coeff(cfg->cfg, std::vector<double>(e, e + count), mc != 0, options(opts)).summary;
    });
}

gkd_status gkd_run_field_validate(const gkd_config* cfg, int lags, int realizations, const gkd_run_options* opts)
{
    return guarded([&] {
        require(cfg, "cfg");
        last_summary = gkd::run_field_validate(cfg->cfg, lags, realizations, options(opts)).summary;
    });
}

gkd_status gkd_run_simulate(const gkd_config* cfg, double eps, const gkd_run_options* opts)
{
    return guarded([&] {
        require(cfg, "cfg");
        last_summary = gkd::run_simulate(cfg->cfg, eps, options(opts)).summary;
    });
}

gkd_status gkd_run_she(const gkd_config* cfg, const gkd_run_options* opts)
{
    return guarded([&] {
        require(cfg, "cfg");
        last_summary = gkd::run_she(cfg->cfg, options(opts)).summary;
    });
}

gkd_status gkd_run_study(const gkd_config* cfg, const gkd_run_options* opts, int* passed)
{
    return guarded([&] {
        require(cfg, "cfg");
        const auto r = gkd::run_study(cfg->cfg, options(opts));
        last_summary = r.summary;
        if (passed != nullptr) *passed = r.passed ? 1 : 0;
    });
}

gkd_status gkd_run_scaling(double alpha, const gkd_run_options* opts)
{
    return guarded([&] { last_summary = gkd::run_scaling(alpha, options(opts)).summary; });
}

gkd_status gkd_run_compare(const char* a_csv, const char* b_csv, const gkd_run_options* opts, double out[3])
{
    return guarded([&] {
        require(a_csv, "a_csv");
        require(b_csv, "b_csv");
        const auto r = gkd::run_compare(a_csv, b_csv, options(opts));
        last_summary = r.summary;
        if (out != nullptr) {
            out[0] = r.distances.l1;
            out[1] = r.distances.l2;
            out[2] = r.distances.w1;
        }
    });
}

}  // extern "C"
