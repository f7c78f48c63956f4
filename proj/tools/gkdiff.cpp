// SPDX-License-Identifier: Apache-2.0
// Command-line front end; talks to the library only through the C API.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gkdiff/gkdiff.h"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

int exit_code(gkd_status s)
{
    switch (s) {
    case GKD_OK: return 0;
    case GKD_ERR_NONCONVERGED: return 2;
    case GKD_ERR_INTERNAL: return kExitInternal;
    default: return 1;
    }
}

int report(gkd_status s)
{
    if (s == GKD_OK) {
        std::printf("%s\n", gkd_last_summary());
        return 0;
    }
    const std::string field = gkd_last_error_field();
    std::fprintf(stderr, "gkdiff: %s: %s\n", gkd_status_string(s), gkd_last_error());
    if (!field.empty()) std::fprintf(stderr, "gkdiff: offending field: %s\n", field.c_str());
    return exit_code(s);
}

struct ConfigHandle {
    gkd_config* ptr = nullptr;
    ~ConfigHandle() { gkd_config_free(ptr); }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gyrokinetic diffusion-limit verification tools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(gkd_version()));

    unsigned threads = 1;
    std::string out_dir;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    app.add_option("--out", out_dir, "Output directory (overrides outputs.dir)");

    std::string config;
    std::vector<double> energies;
    bool mc = false;
    int lags = 5;
    int realizations = 1000;
    double epsilon = 0.0;
    double alpha = 0.0;
    std::string a_csv, b_csv;

    auto* coeff = app.add_subcommand("coeff", "Tabulate a(e) by quadrature (and optionally Monte Carlo)");
    coeff->add_option("--config", config, "Run configuration (TOML)")->required();
    coeff->add_option("--e", energies, "Comma-separated energies")->required()->delimiter(',');
    coeff->add_flag("--mc", mc, "Add work-integral Monte Carlo rows");

    auto* fv = app.add_subcommand("field-validate", "Empirical correlation of the synthesized field");
    fv->add_option("--config", config, "Run configuration (TOML)")->required();
    fv->add_option("--lags", lags, "Lag grid is lags x lags over tau and x1")->check(CLI::Range(2, 64));
    fv->add_option("--realizations", realizations, "Field realizations")->check(CLI::Range(100, 100000000));

    auto* sim = app.add_subcommand("simulate", "Particle ensemble at one epsilon");
    sim->add_option("--config", config, "Run configuration (TOML)")->required();
    sim->add_option("--epsilon", epsilon, "Scale parameter eps")->required();

    auto* she = app.add_subcommand("she", "Solve the energy diffusion equation");
    she->add_option("--config", config, "Run configuration (TOML)")->required();

    auto* cmp = app.add_subcommand("compare", "L1, L2 and W1 between two profile CSVs");
    cmp->add_option("a", a_csv, "First profile CSV")->required();
    cmp->add_option("b", b_csv, "Second profile CSV")->required();

    auto* study = app.add_subcommand("study", "Kinetic ensembles against the diffusion limit over eps");
    study->add_option("--config", config, "Run configuration (TOML)")->required();

    auto* scaling = app.add_subcommand("scaling", "Self-similar exponent for a = e^{alpha/2}");
    scaling->add_option("--alpha", alpha, "Exponent alpha in [0, 2]")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::fprintf(stderr, "%s", app.help().c_str());
        return kExitUsage;
    }

    gkd_run_options opts{out_dir.empty() ? nullptr : out_dir.c_str(), threads};
    ConfigHandle cfg;
    if (!config.empty()) {
        const auto s = gkd_config_load(config.c_str(), &cfg.ptr);
        if (s != GKD_OK) return report(s);
    }

    if (*coeff) return report(gkd_run_coeff(cfg.ptr, energies.data(), energies.size(), mc ? 1 : 0, &opts));
    if (*fv) return report(gkd_run_field_validate(cfg.ptr, lags, realizations, &opts));
    if (*sim) return report(gkd_run_simulate(cfg.ptr, epsilon, &opts));
    if (*she) return report(gkd_run_she(cfg.ptr, &opts));
    if (*scaling) return report(gkd_run_scaling(alpha, &opts));
    if (*cmp) {
        double d[3] = {0, 0, 0};
        return report(gkd_run_compare(a_csv.c_str(), b_csv.c_str(), &opts, d));
    }
    if (*study) {
        int passed = 0;
        const int code = report(gkd_run_study(cfg.ptr, &opts, &passed));
        if (code != 0) return code;
        return passed ? 0 : 1;
    }
    return kExitUsage;
}
