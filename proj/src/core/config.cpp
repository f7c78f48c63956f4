// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_HEADER_ONLY 1
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "errors.hpp"

namespace gkd {

namespace {

using Keys = std::set<std::string>;

void check_keys(const toml::table& t, const std::string& prefix, const Keys& allowed)
{
    for (const auto& [k, v] : t) {
        const std::string key(k.str());
        if (!allowed.count(key))
            throw ValidationError(prefix.empty() ? key : prefix + "." + key, "unknown key");
    }
}

const toml::table* section(const toml::table& root, const char* name)
{
    const auto* node = root.get(name);
    if (node == nullptr) return nullptr;
    const auto* t = node->as_table();
    if (t == nullptr) throw ValidationError(name, "must be a table");
    return t;
}

double get_double(const toml::node& n, const std::string& key)
{
    if (auto v = n.value_exact<double>()) return *v;
    if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
    throw ValidationError(key, "must be a number");
}

std::int64_t get_int(const toml::node& n, const std::string& key)
{
    if (auto v = n.value_exact<std::int64_t>()) return *v;
    throw ValidationError(key, "must be an integer");
}

std::string get_string(const toml::node& n, const std::string& key)
{
    if (auto v = n.value_exact<std::string>()) return *v;
    throw ValidationError(key, "must be a string");
}

template <class F>
void read(const toml::table* t, const std::string& prefix, const char* name, F&& assign)
{
    if (t == nullptr) return;
    if (const auto* n = t->get(name)) assign(*n, prefix + "." + name);
}

std::vector<double> get_double_array(const toml::node& n, const std::string& key)
{
    const auto* arr = n.as_array();
    if (arr == nullptr) throw ValidationError(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) out.push_back(get_double(e, key));
    return out;
}

std::vector<std::string> get_string_array(const toml::node& n, const std::string& key)
{
    const auto* arr = n.as_array();
    if (arr == nullptr) throw ValidationError(key, "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *arr) out.push_back(get_string(e, key));
    return out;
}

int narrow(std::int64_t v, const std::string& key)
{
    if (v < -2147483647 || v > 2147483647) throw ValidationError(key, "out of range");
    return static_cast<int>(v);
}

}  // namespace

RunConfig parse_config(const std::string& text)
{
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream s;
        s << e.description() << " (line " << e.source().begin.line << ")";
        throw ValidationError("config", s.str());
    }
    check_keys(root, "", {"correlation", "field", "kinetics", "she", "oracle", "outputs"});

    RunConfig c;
    if (const auto* t = section(root, "correlation")) {
        check_keys(*t, "correlation", {"kind", "alpha", "sigma2", "ell", "envelope", "envelope_power", "t_support", "n"});
        read(t, "correlation", "kind", [&](auto& n, auto k) { c.correlation.kind = get_string(n, k); });
        read(t, "correlation", "alpha", [&](auto& n, auto k) { c.correlation.alpha = get_double(n, k); });
        read(t, "correlation", "sigma2", [&](auto& n, auto k) { c.correlation.sigma2 = get_double(n, k); });
        read(t, "correlation", "ell", [&](auto& n, auto k) { c.correlation.ell = get_double(n, k); });
        read(t, "correlation", "envelope", [&](auto& n, auto k) { c.correlation.envelope = get_string(n, k); });
        read(t, "correlation", "envelope_power",
             [&](auto& n, auto k) { c.correlation.envelope_power = get_double(n, k); });
        read(t, "correlation", "t_support", [&](auto& n, auto k) { c.correlation.t_support = get_double(n, k); });
        read(t, "correlation", "n", [&](auto& n, auto k) { c.correlation.n = narrow(get_int(n, k), k); });
    }
    if (const auto* t = section(root, "field")) {
        check_keys(*t, "field", {"modes", "block_length", "master_seed"});
        read(t, "field", "modes", [&](auto& n, auto k) { c.field.modes = narrow(get_int(n, k), k); });
        read(t, "field", "block_length", [&](auto& n, auto k) { c.field.block_length = get_double(n, k); });
        read(t, "field", "master_seed", [&](auto& n, auto k) {
            const auto v = get_int(n, k);
            if (v < 0) throw ValidationError(k, "must be non-negative");
            c.field.master_seed = static_cast<std::uint64_t>(v);
        });
    }
    if (const auto* t = section(root, "kinetics")) {
        check_keys(*t, "kinetics", {"epsilons", "particles", "realizations", "dt_per_gyro", "t_end", "init"});
        read(t, "kinetics", "epsilons", [&](auto& n, auto k) { c.kinetics.epsilons = get_double_array(n, k); });
        read(t, "kinetics", "particles", [&](auto& n, auto k) { c.kinetics.particles = get_int(n, k); });
        read(t, "kinetics", "realizations", [&](auto& n, auto k) { c.kinetics.realizations = get_int(n, k); });
        read(t, "kinetics", "dt_per_gyro", [&](auto& n, auto k) { c.kinetics.dt_per_gyro = narrow(get_int(n, k), k); });
        read(t, "kinetics", "t_end", [&](auto& n, auto k) { c.kinetics.t_end = get_double(n, k); });
        if (const auto* node = t->get("init")) {
            const auto* it = node->as_table();
            if (it == nullptr) throw ValidationError("kinetics.init", "must be a table");
            check_keys(*it, "kinetics.init", {"kind", "e0", "width"});
            auto& in = c.kinetics.init;
            read(it, "kinetics.init", "kind", [&](auto& n, auto k) { in.kind = get_string(n, k); });
            read(it, "kinetics.init", "e0", [&](auto& n, auto k) { in.e0 = get_double(n, k); });
            read(it, "kinetics.init", "width", [&](auto& n, auto k) { in.width = get_double(n, k); });
        }
    }
    if (const auto* t = section(root, "she")) {
        check_keys(*t, "she", {"e_max", "cells", "dt"});
        read(t, "she", "e_max", [&](auto& n, auto k) { c.she.e_max = get_double(n, k); });
        read(t, "she", "cells", [&](auto& n, auto k) { c.she.cells = narrow(get_int(n, k), k); });
        read(t, "she", "dt", [&](auto& n, auto k) { c.she.dt = get_double(n, k); });
    }
    if (const auto* t = section(root, "oracle")) {
        check_keys(*t, "oracle", {"window", "samples", "placement"});
        read(t, "oracle", "window", [&](auto& n, auto k) { c.oracle.window = narrow(get_int(n, k), k); });
        read(t, "oracle", "samples", [&](auto& n, auto k) { c.oracle.samples = get_int(n, k); });
        read(t, "oracle", "placement", [&](auto& n, auto k) { c.oracle.placement = get_string(n, k); });
    }
    if (const auto* t = section(root, "outputs")) {
        check_keys(*t, "outputs", {"dir", "times", "formats"});
        read(t, "outputs", "dir", [&](auto& n, auto k) { c.outputs.dir = get_string(n, k); });
        read(t, "outputs", "times", [&](auto& n, auto k) { c.outputs.times = get_double_array(n, k); });
        read(t, "outputs", "formats", [&](auto& n, auto k) { c.outputs.formats = get_string_array(n, k); });
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void RunConfig::validate() const
{
    const auto& c = correlation;
    if (c.kind == "gaussian_bump") {
        if (!(c.sigma2 >= 0.0)) throw ValidationError("correlation.sigma2", "must be >= 0");
        if (!(c.ell > 0.0)) throw ValidationError("correlation.ell", "must be positive");
    } else if (c.kind == "power_law") {
        if (!c.alpha) throw ValidationError("correlation.alpha", "required for kind = \"power_law\"");
        if (!(*c.alpha > 0.0 && *c.alpha <= 2.0)) throw ValidationError("correlation.alpha", "must lie in (0, 2]");
    } else {
        throw ValidationError("correlation.kind", "must be \"gaussian_bump\" or \"power_law\"");
    }
    if (c.envelope != "block_autocorrelation" && c.envelope != "raised_cosine_power")
        throw ValidationError("correlation.envelope", "must be \"block_autocorrelation\" or \"raised_cosine_power\"");
    if (!(c.envelope_power >= 2.0)) throw ValidationError("correlation.envelope_power", "must be >= 2");
    if (!(c.t_support > 0.0)) throw ValidationError("correlation.t_support", "must be positive");
    if (c.n < 1) throw ValidationError("correlation.n", "must be >= 1");

    if (field.modes < 1) throw ValidationError("field.modes", "must be >= 1");
    if (field.block_length) {
        if (!(*field.block_length > 0.0)) throw ValidationError("field.block_length", "must be positive");
        if (std::abs(*field.block_length - c.t_support) > 1e-12 * c.t_support)
            throw ValidationError("field.block_length", "must equal correlation.t_support");
    }

    const auto& k = kinetics;
    if (k.epsilons.empty()) throw ValidationError("kinetics.epsilons", "must not be empty");
    for (std::size_t i = 0; i < k.epsilons.size(); ++i) {
        if (!(k.epsilons[i] > 0.0)) throw ValidationError("kinetics.epsilons", "values must be positive");
        if (i > 0 && !(k.epsilons[i] < k.epsilons[i - 1]))
            throw ValidationError("kinetics.epsilons", "must be strictly decreasing");
    }
    if (k.particles < 1) throw ValidationError("kinetics.particles", "must be >= 1");
    if (k.realizations < 2) throw ValidationError("kinetics.realizations", "must be >= 2");
    if (k.dt_per_gyro < 16) throw ValidationError("kinetics.dt_per_gyro", "must be >= 16");
    if (!(k.t_end > 0.0)) throw ValidationError("kinetics.t_end", "must be positive");
    if (k.init.kind != "delta" && k.init.kind != "smooth_bump")
        throw ValidationError("kinetics.init.kind", "must be \"delta\" or \"smooth_bump\"");
    if (!(k.init.e0 >= 0.0)) throw ValidationError("kinetics.init.e0", "must be >= 0");
    if (!(k.init.width > 0.0)) throw ValidationError("kinetics.init.width", "must be positive");

    if (!(she.e_max > 0.0)) throw ValidationError("she.e_max", "must be positive");
    if (she.cells < 8) throw ValidationError("she.cells", "must be >= 8");
    if (!(she.dt > 0.0)) throw ValidationError("she.dt", "must be positive");
    if (k.init.e0 > she.e_max) throw ValidationError("kinetics.init.e0", "lies beyond she.e_max");

    if (oracle.window < 2) throw ValidationError("oracle.window", "must be >= 2");
    if (oracle.samples < 10) throw ValidationError("oracle.samples", "must be >= 10");
    if (oracle.placement != "aligned" && oracle.placement != "fixed")
        throw ValidationError("oracle.placement", "must be \"aligned\" or \"fixed\"");

    if (outputs.dir.empty()) throw ValidationError("outputs.dir", "must not be empty");
    for (std::size_t i = 0; i < outputs.times.size(); ++i) {
        if (!(outputs.times[i] > 0.0 && outputs.times[i] <= k.t_end))
            throw ValidationError("outputs.times", "times must lie in (0, kinetics.t_end]");
        if (i > 0 && !(outputs.times[i] > outputs.times[i - 1]))
            throw ValidationError("outputs.times", "must be strictly increasing");
    }
    if (!outputs.times.empty() && std::abs(outputs.times.back() - k.t_end) > 1e-12 * k.t_end)
        throw ValidationError("outputs.times", "last time must equal kinetics.t_end");
    for (const auto& f : outputs.formats)
        if (f != "csv" && f != "json") throw ValidationError("outputs.formats", "entries must be \"csv\" or \"json\"");
}

void RunConfig::validate_stochastic() const
{
    validate();
    if (!field.master_seed) throw ValidationError("field.master_seed", "required for stochastic pipelines");
    if (correlation.kind != "gaussian_bump")
        throw ValidationError("correlation.kind", "field synthesis needs \"gaussian_bump\"");
    if (correlation.envelope != "block_autocorrelation")
        throw ValidationError("correlation.envelope", "field synthesis needs \"block_autocorrelation\"");
}

TemporalEnvelope RunConfig::envelope() const
{
    if (correlation.envelope == "block_autocorrelation")
        return TemporalEnvelope::block_autocorrelation(correlation.envelope_power, correlation.t_support);
    return TemporalEnvelope::raised_cosine_power(correlation.envelope_power, correlation.t_support);
}

CorrelationModel RunConfig::model() const
{
    const auto spatial = correlation.kind == "power_law"
                             ? SpatialProfile::power_law(*correlation.alpha)
                             : SpatialProfile::gaussian_bump(correlation.sigma2, correlation.ell);
    return CorrelationModel::separable(envelope(), spatial);
}

FieldSpec RunConfig::field_spec() const
{
    validate_stochastic();
    FieldSpec spec{model(), field.modes, correlation.t_support, *field.master_seed};
    spec.validate();
    return spec;
}

InitialDistribution RunConfig::initial_distribution() const
{
    const auto& in = kinetics.init;
    return in.kind == "delta" ? InitialDistribution::delta(in.e0) : InitialDistribution::smooth_bump(in.e0, in.width);
}

ExperimentConfig RunConfig::experiment(unsigned threads) const
{
    ExperimentConfig x{.field = field_spec()};
    x.n = correlation.n;
    x.init = initial_distribution();
    x.epsilons = kinetics.epsilons;
    x.particles = static_cast<std::size_t>(kinetics.particles);
    x.realizations = static_cast<std::size_t>(kinetics.realizations);
    x.steps_per_gyro = kinetics.dt_per_gyro;
    x.t_end = kinetics.t_end;
    x.output_times = outputs.times;
    x.grid = grid();
    x.she_dt = she.dt;
    x.master_seed = *field.master_seed;
    x.threads = threads;
    x.validate();
    return x;
}

WorkOracleOptions RunConfig::oracle_options(unsigned threads) const
{
    WorkOracleOptions o;
    o.placement = oracle.placement == "fixed" ? WindowPlacement::Fixed : WindowPlacement::BlockAligned;
    o.threads = threads;
    return o;
}

namespace {

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

template <class T, class F>
std::string list(const std::vector<T>& v, F&& fmt)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

}  // namespace

std::string canonical(const RunConfig& c)
{
    std::ostringstream o;
    o << "[correlation]\n"
      << "kind = " << quoted(c.correlation.kind) << "\n";
    if (c.correlation.alpha) o << "alpha = " << num(*c.correlation.alpha) << "\n";
    o << "sigma2 = " << num(c.correlation.sigma2) << "\n"
      << "ell = " << num(c.correlation.ell) << "\n"
      << "envelope = " << quoted(c.correlation.envelope) << "\n"
      << "envelope_power = " << num(c.correlation.envelope_power) << "\n"
      << "t_support = " << num(c.correlation.t_support) << "\n"
      << "n = " << c.correlation.n << "\n\n"
      << "[field]\n"
      << "modes = " << c.field.modes << "\n"
      << "block_length = " << num(c.field.block_length.value_or(c.correlation.t_support)) << "\n";
    if (c.field.master_seed) o << "master_seed = " << *c.field.master_seed << "\n";
    o << "\n[kinetics]\n"
      << "epsilons = " << list(c.kinetics.epsilons, num) << "\n"
      << "particles = " << c.kinetics.particles << "\n"
      << "realizations = " << c.kinetics.realizations << "\n"
      << "dt_per_gyro = " << c.kinetics.dt_per_gyro << "\n"
      << "t_end = " << num(c.kinetics.t_end) << "\n\n"
      << "[kinetics.init]\n"
      << "kind = " << quoted(c.kinetics.init.kind) << "\n"
      << "e0 = " << num(c.kinetics.init.e0) << "\n"
      << "width = " << num(c.kinetics.init.width) << "\n\n"
      << "[she]\n"
      << "e_max = " << num(c.she.e_max) << "\n"
      << "cells = " << c.she.cells << "\n"
      << "dt = " << num(c.she.dt) << "\n\n"
      << "[oracle]\n"
      << "window = " << c.oracle.window << "\n"
      << "samples = " << c.oracle.samples << "\n"
      << "placement = " << quoted(c.oracle.placement) << "\n\n"
      << "[outputs]\n"
      << "dir = " << quoted(c.outputs.dir) << "\n"
      << "times = " << list(c.outputs.times, num) << "\n"
      << "formats = " << list(c.outputs.formats, quoted) << "\n";
    return o.str();
}

std::uint64_t config_hash(const RunConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gkd
