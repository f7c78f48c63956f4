// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "correlation.hpp"
#include "dcoeff.hpp"
#include "field.hpp"
#include "harness.hpp"

namespace gkd {

/// Contents of a run configuration file (TOML). Every key has a default
/// except field.master_seed, which stochastic pipelines require.
struct RunConfig {
    struct Correlation {
        std::string kind = "gaussian_bump";  // gaussian_bump | power_law
        std::optional<double> alpha;
        double sigma2 = 1.0;
        double ell = 1.0;
        std::string envelope = "block_autocorrelation";  // | raised_cosine_power
        double envelope_power = 2.0;
        double t_support = 1.0;
        int n = 1;
    } correlation;
    struct Field {
        int modes = 64;
        std::optional<double> block_length;  // defaults to correlation.t_support
        std::optional<std::uint64_t> master_seed;
    } field;
    struct Init {
        std::string kind = "delta";  // delta | smooth_bump
        double e0 = 1.0;
        double width = 0.25;
    };
    struct Kinetics {
        std::vector<double> epsilons{0.1, 0.05, 0.025};
        std::int64_t particles = 2000;
        std::int64_t realizations = 50;
        int dt_per_gyro = 64;
        double t_end = 1.0;
        Init init;
    } kinetics;
    struct She {
        double e_max = 8.0;
        int cells = 128;
        double dt = 1e-4;
    } she;
    struct Oracle {
        int window = 8;
        std::int64_t samples = 10000;
        std::string placement = "aligned";  // aligned | fixed
    } oracle;
    struct Outputs {
        std::string dir = "out";
        std::vector<double> times;
        std::vector<std::string> formats{"csv", "json"};
    } outputs;

    /// Structural checks; throws ValidationError naming the offending key.
    void validate() const;
    /// Additional checks for pipelines that synthesize fields.
    void validate_stochastic() const;

    CorrelationModel model() const;
    TemporalEnvelope envelope() const;
    /// Requires validate_stochastic().
    FieldSpec field_spec() const;
    InitialDistribution initial_distribution() const;
    EnergyGrid grid() const { return {she.e_max, she.cells}; }
    ExperimentConfig experiment(unsigned threads) const;
    WorkOracleOptions oracle_options(unsigned threads) const;
};

/// Parses TOML text; unknown keys and type mismatches are ValidationErrors.
RunConfig parse_config(const std::string& text);
/// Reads and parses a file; IoError if unreadable.
RunConfig load_config(const std::string& path);

/// Fixed-order TOML rendering with all defaults filled in and round-trip
/// exact numbers; parse_config(canonical(c)) has the same canonical text.
std::string canonical(const RunConfig& cfg);
/// FNV-1a 64 of the canonical text.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace gkd
