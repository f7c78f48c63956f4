// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "errors.hpp"
#include "pipelines.hpp"

using namespace gkd;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kSmall = R"(
[field]
modes = 16
master_seed = 7

[kinetics]
epsilons = [0.2, 0.1]
particles = 60
realizations = 3
dt_per_gyro = 16
t_end = 0.2

[she]
e_max = 4.0
cells = 32
dt = 1e-3

[oracle]
window = 2
samples = 20

[outputs]
times = [0.1, 0.2]
)";

RunOptions scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("gkdiff_pipelines_" + name);
    fs::remove_all(dir);
    return {dir.string(), 1};
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return json::parse(in);
}

void check_manifest(const RunOptions& opts, const std::string& subcommand)
{
    const auto m = read_json(fs::path(opts.out_dir) / "manifest.json");
    CHECK(m["tool"] == "gkdiff");
    CHECK(m["version"] == kVersion);
    CHECK(m["subcommand"] == subcommand);
    CHECK(m["wall_time_s"].get<double>() >= 0.0);
    for (const auto& f : m["files"]) CHECK(fs::exists(f.get<std::string>()));
    if (m.contains("config")) {
        const auto cfg = parse_config(m["config"].get<std::string>());
        CHECK(hash_hex(config_hash(cfg)) == m["config_hash"].get<std::string>());
        CHECK(m["seeds"]["master_seed"] == 7);
    }
}

}  // namespace

TEST_CASE("coeff pipeline")
{
    const auto cfg = parse_config(kSmall);
    const auto opts = scratch("coeff");
    const auto res = run_coeff(cfg, {0.5, 1.0}, true, opts);
    const fs::path csv = fs::path(opts.out_dir) / "coeff.csv";
    CHECK(first_line(csv) == "e,a,stderr,method,n");
    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    CHECK(rows == 5);
    check_manifest(opts, "coeff");
}

TEST_CASE("field-validate pipeline")
{
    const auto cfg = parse_config(kSmall);
    const auto opts = scratch("field");
    run_field_validate(cfg, 2, 100, opts);
    CHECK(first_line(fs::path(opts.out_dir) / "field_validate.csv") == "tau,x1,x2,target,estimate,stderr");
    check_manifest(opts, "field-validate");
}

TEST_CASE("simulate, she and compare pipelines")
{
    const auto cfg = parse_config(kSmall);
    const auto sim = scratch("simulate");
    run_simulate(cfg, 0.1, sim);
    const fs::path sim_csv = fs::path(sim.out_dir) / "simulate.csv";
    CHECK(first_line(sim_csv) == "time,e_center,density,stderr");
    CHECK(fs::exists(fs::path(sim.out_dir) / "simulate_meta.json"));
    check_manifest(sim, "simulate");

    const auto she = scratch("she");
    run_she(cfg, she);
    const fs::path she_csv = fs::path(she.out_dir) / "she.csv";
    CHECK(first_line(she_csv) == "time,e_center,density");
    const auto table = read_profile_csv(she_csv.string());
    CHECK(table.times == std::vector<double>{0.1, 0.2});
    CHECK(table.profiles.back().grid == EnergyGrid{4.0, 32});
    CHECK(table.profiles.back().mass() == doctest::Approx(1.0).epsilon(1e-9));
    check_manifest(she, "she");

    const auto self = run_compare(she_csv.string(), she_csv.string(), {});
    CHECK(self.distances.l1 == 0.0);
    const auto cmp = scratch("compare");
    const auto d = run_compare(sim_csv.string(), she_csv.string(), cmp);
    CHECK(d.distances.l1 > 0.0);
    CHECK(d.distances.l1 <= 2.0 + 1e-9);
    CHECK(read_json(fs::path(cmp.out_dir) / "compare.json")["L1"].get<double>() == d.distances.l1);

    auto other = cfg;
    other.she.cells = 64;
    const auto she2 = scratch("she64");
    run_she(other, she2);
    CHECK_THROWS_AS(run_compare(she_csv.string(), (fs::path(she2.out_dir) / "she.csv").string(), {}), GridMismatch);
}

TEST_CASE("study pipeline")
{
    const auto cfg = parse_config(kSmall);
    const auto opts = scratch("study");
    const auto res = run_study(cfg, opts);
    const fs::path dir(opts.out_dir);
    CHECK(first_line(dir / "study_table.csv") ==
          "eps,L1,L2,W1,L1_stderr,L2_stderr,W1_stderr,hist_stderr,out_of_range,status");
    CHECK(first_line(dir / "study_interior.csv") == "eps,time,L1,L2,W1");
    CHECK(first_line(dir / "study_she.csv") == "time,e_center,density");
    CHECK(fs::exists(dir / "study_eps_0.csv"));
    CHECK(fs::exists(dir / "study_eps_1.json"));
    const auto rep = read_json(dir / "study_report.json");
    CHECK(rep.contains("rows"));
    CHECK(rep["warnings"].size() >= 1);
    check_manifest(opts, "study");
    CHECK_FALSE(res.summary.empty());
}

TEST_CASE("profile CSV reader rejects malformed input")
{
    const auto dir = fs::temp_directory_path() / "gkdiff_pipelines_bad";
    fs::create_directories(dir);
    auto write = [&](const char* name, const char* text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    CHECK_THROWS_AS(read_profile_csv(write("hdr.csv", "t,e,d\n0,0.5,1\n")), ValidationError);
    CHECK_THROWS_AS(read_profile_csv(write("empty.csv", "time,e_center,density\n")), ValidationError);
    CHECK_THROWS_AS(read_profile_csv(write("nan.csv", "time,e_center,density\n0,x,1\n")), ValidationError);
    CHECK_THROWS_AS(read_profile_csv(write("grid.csv", "time,e_center,density\n0,0.5,1\n0,1.7,1\n")), ValidationError);
    CHECK_THROWS_AS(read_profile_csv((dir / "missing.csv").string()), IoError);
}

TEST_CASE("stochastic pipelines require a master seed")
{
    const auto cfg = parse_config("");
    CHECK_THROWS_AS(run_simulate(cfg, 0.1, scratch("noseed")), ValidationError);
}
