// unit_pipeline.cpp - artifact pipeline on a miniature configuration
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twodes/pipeline.hpp"

using namespace twodes;
namespace fs = std::filesystem;

namespace {

// Short sweep: 8x8 coherence grids, eight waiting times, fixed sub-Ohmic
// coupling so no calibration runs, and a wide crosspeak window because the
// coarse frequency axes space bins ~208 cm^-1 apart.
nlohmann::json tiny_json() {
  nlohmann::json j;
  j["dimer"] = {{"eps1_cm1", 12410.0}, {"eps2_cm1", 12210.0}, {"coupling_cm1", 5.5},
                {"mu1", 1.0},          {"mu2", -0.8},         {"temperature_K", 77.0}};
  j["bath"] = {{"kind", "power_law"}, {"lambda", 0.2}, {"s", 0.9}, {"omega_c_rad_fs", 0.01}};
  j["dynamics_mode"] = "correlation_aware";
  j["pulse_amplitude"] = 0.01;
  j["grids"] = {{"t1_max_fs", 40.0},
                {"t1_points", 8},
                {"t3_max_fs", 40.0},
                {"t3_points", 8},
                {"T_list_fs", {0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0}}};
  j["integrator"] = {{"dt_fs", 0.5}};
  j["crosspeak_window"] = {{"halfwidth_cm1", 250.0}};
  j["spectra_T_fs"] = {0.0};
  return j;
}

std::string scratch(const std::string& name) {
  const std::string dir = "pipeline_scratch/" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return line;
}

struct TinyRun {
  RunConfig cfg;
  SimulateResult result;
  std::string dir_a;
  std::string dir_b;
};

const TinyRun& tiny_run() {
  static const TinyRun run = [] {
    TinyRun r;
    r.cfg = parse_config(tiny_json());
    r.dir_a = scratch("run_a");
    r.dir_b = scratch("run_b");
    r.result = run_simulate(r.cfg, r.dir_a, 1);
    run_simulate(r.cfg, r.dir_b, 1);
    return r;
  }();
  return run;
}

}  // namespace

TEST_CASE("simulate writes a complete artifact set") {
  const TinyRun& run = tiny_run();
  const SimulateResult& res = run.result;

  REQUIRE(res.T_fs == run.cfg.grids.T_list_fs);
  REQUIRE(res.acp.size() == 8);
  for (double a : res.acp) REQUIRE(std::isfinite(a));
  REQUIRE(res.has_beating);
  REQUIRE(std::isfinite(res.beating.peak_nu_cm1));
  REQUIRE(res.beating.peak_to_median > 0.0);

  CHECK(res.lambda_sm_certificate >= 0.0);
  CHECK(std::isfinite(res.lambda_sm_certificate));
  CHECK(res.rk4_ratio > 6.0);
  CHECK(res.rk4_ratio < 40.0);
  CHECK(res.trace_drift < 1e-6);
  CHECK(res.hermiticity_drift < 1e-6);
  CHECK(res.min_pt_eigenvalue < 1e-6);
  CHECK(res.min_pt_eigenvalue > -1e-2);
  CHECK(res.min_pt_time_fs >= 0.0);
  CHECK(res.min_pt_time_fs <= 140.0);

  for (const char* name : {"config.json", "manifest.json", "trace.csv", "beating.csv",
                           "memory_norm.csv", "ppt.csv", "spectrum_T0.csv"})
    CHECK(fs::exists(run.dir_a + "/" + std::string(name)));
  for (double T : res.T_fs) {
    const std::string label = detail::fmt_label(T);
    CHECK(fs::exists(run.dir_a + "/signals/rephasing_T" + label + ".csv"));
    CHECK(fs::exists(run.dir_a + "/signals/nonrephasing_T" + label + ".csv"));
  }

  CHECK(first_line(run.dir_a + "/trace.csv") == "T_fs,acp");
  const auto trace = detail::read_csv(run.dir_a + "/trace.csv");
  REQUIRE(trace.size() == 8);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    REQUIRE(trace[k].size() == 2);
    CHECK(trace[k][0] == res.T_fs[k]);
    CHECK(trace[k][1] == res.acp[k]);
  }

  // 70 + 140 + 70 propagation steps plus doubled records at the three pulses.
  const auto ppt = detail::read_csv(run.dir_a + "/ppt.csv");
  CHECK(ppt.size() == 284);
  CHECK(first_line(run.dir_a + "/ppt.csv") == "t_fs,min_eig");

  CHECK(first_line(run.dir_a + "/signals/rephasing_T0.csv") == "t1_fs,t3_fs,re,im");
  CHECK(detail::read_csv(run.dir_a + "/signals/rephasing_T0.csv").size() == 64);
  CHECK(first_line(run.dir_a + "/spectrum_T0.csv") == "omega1_cm1,omega3_cm1,value");
}

TEST_CASE("manifest records hashes, certificates, and the file inventory") {
  const TinyRun& run = tiny_run();
  std::ifstream in(run.dir_a + "/manifest.json");
  REQUIRE(in.good());
  const nlohmann::json m = nlohmann::json::parse(in);

  CHECK(m.at("config_hash").get<std::string>() == config_hash(run.result.cfg));
  CHECK(m.at("code_version").get<std::string>() == code_version);
  CHECK(m.at("failed_stage").is_null());

  const auto& certs = m.at("certificates");
  CHECK(certs.at("lambda_sm_certificate").get<double>() == run.result.lambda_sm_certificate);
  CHECK(certs.at("rk4_halving_ratio").get<double>() == run.result.rk4_ratio);
  CHECK(certs.at("trace_drift").get<double>() == run.result.trace_drift);
  CHECK(certs.at("hermiticity_drift").get<double>() == run.result.hermiticity_drift);

  const auto& an = m.at("analysis");
  CHECK(an.at("acp_first").get<double>() == run.result.acp.front());
  CHECK(an.at("acp_last").get<double>() == run.result.acp.back());
  CHECK(an.at("min_pt_eigenvalue").get<double>() == run.result.min_pt_eigenvalue);
  CHECK(an.at("beating_peak_cm1").get<double>() == run.result.beating.peak_nu_cm1);
  CHECK(an.at("beating_peak_to_median").get<double>() == run.result.beating.peak_to_median);

  const auto& times = m.at("wall_times_s");
  for (const char* stage :
       {"resolve", "correlation", "kernel", "sweep", "analysis", "diagnostics", "total"})
    CHECK(times.contains(stage));

  const auto& files = m.at("files");
  REQUIRE(files.is_array());
  REQUIRE(!files.empty());
  CHECK(files.back().at("path").get<std::string>() == "manifest.json");
  CHECK(files.back().at("bytes").is_null());
  bool saw_config = false, saw_trace = false;
  for (std::size_t k = 0; k + 1 < files.size(); ++k) {
    const std::string path = files[k].at("path").get<std::string>();
    if (path == "config.json") saw_config = true;
    if (path == "trace.csv") saw_trace = true;
    REQUIRE(fs::exists(run.dir_a + "/" + path));
    CHECK(fs::file_size(run.dir_a + "/" + path) == files[k].at("bytes").get<std::uint64_t>());
  }
  CHECK(saw_config);
  CHECK(saw_trace);
}

TEST_CASE("saved config echoes the resolved run configuration") {
  const TinyRun& run = tiny_run();
  const RunConfig echoed = load_config(run.dir_a + "/config.json");
  CHECK(to_json(echoed).dump() == to_json(run.result.cfg).dump());
  CHECK(config_hash(echoed) == config_hash(run.result.cfg));
  CHECK(echoed.bath.lambda == 0.2);
  CHECK_FALSE(echoed.bath_lambda_auto);

  const RunConfig resolved = resolve_config(run.cfg, 1);
  CHECK(to_json(resolved).dump() == to_json(run.cfg).dump());
}

TEST_CASE("repeated runs are byte-identical") {
  const TinyRun& run = tiny_run();
  std::vector<std::string> names = {"config.json",     "trace.csv", "beating.csv",
                                    "memory_norm.csv", "ppt.csv",   "spectrum_T0.csv"};
  for (double T : run.result.T_fs) {
    const std::string label = detail::fmt_label(T);
    names.push_back("signals/rephasing_T" + label + ".csv");
    names.push_back("signals/nonrephasing_T" + label + ".csv");
  }
  for (const std::string& name : names) {
    INFO(name);
    CHECK(read_file(run.dir_a + "/" + name) == read_file(run.dir_b + "/" + name));
  }
}

TEST_CASE("dry run writes only the configuration and manifest") {
  const TinyRun& run = tiny_run();
  const std::string dir = scratch("dry");
  run_simulate(run.cfg, dir, 1, true);

  std::vector<std::string> entries;
  for (const auto& e : fs::directory_iterator(dir))
    entries.push_back(e.path().filename().string());
  std::sort(entries.begin(), entries.end());
  REQUIRE(entries == std::vector<std::string>{"config.json", "manifest.json"});

  std::ifstream in(dir + "/manifest.json");
  const nlohmann::json m = nlohmann::json::parse(in);
  CHECK(m.at("dry_run").get<bool>());
  CHECK(m.at("files").size() == 2);
}

TEST_CASE("compare summarizes runs and enforces matching grids") {
  const TinyRun& run = tiny_run();
  const std::string out = scratch("cmp");
  const std::vector<CompareRow> rows = run_compare({run.dir_a, run.dir_b}, out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "run_a");
  CHECK(rows[1].label == "run_b");
  CHECK(rows[0].acp_first == run.result.acp.front());
  CHECK(rows[0].acp_last == run.result.acp.back());
  CHECK(rows[0].acp_mid == run.result.acp[4]);
  CHECK(rows[0].peak_to_median == rows[1].peak_to_median);
  CHECK(rows[0].beating == (rows[0].persistence >= compare_beating_threshold));
  CHECK(fs::exists(out + "/compare.csv"));
  CHECK(fs::exists(out + "/compare.txt"));
  CHECK(first_line(out + "/compare.csv") ==
        "label,peak_nu_cm1,peak_to_median,persistence,acp_first,acp_mid,acp_last,flag");

  CHECK_THROWS_AS(run_compare({run.dir_a}, out), ConfigError);

  const std::string fake = scratch("fake");
  nlohmann::json j = tiny_json();
  j["grids"]["t1_points"] = 4;
  save_config(parse_config(j), fake + "/config.json");
  CHECK_THROWS_AS(run_compare({run.dir_a, fake}, out), ConfigError);
}

TEST_CASE("correlation dump covers the protocol span on the half-step grid") {
  const TinyRun& run = tiny_run();
  const std::string dir = scratch("corr");
  run_dump_correlation(run.cfg, dir, 1);
  CHECK(first_line(dir + "/correlation.csv") == "t_fs,re,im");
  const auto rows = detail::read_csv(dir + "/correlation.csv");
  // span 35 + 70 + 35 fs sampled every dt/2 = 0.25 fs.
  REQUIRE(rows.size() == 561);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][1] > 0.0);
  CHECK(rows[0][2] == 0.0);
  CHECK(rows[1][0] == 0.25);
  CHECK_THAT(rows.back()[0], Catch::Matchers::WithinRel(140.0, 1e-12));
}

TEST_CASE("memory norm dump tabulates all three segments") {
  const TinyRun& run = tiny_run();
  const std::string dir = scratch("mem");
  run_dump_memory_norm(run.cfg, dir, 1);
  CHECK(first_line(dir + "/memory_norm.csv") == "segment,tau_fs,mem_fro,full_fro");
  const auto rows = detail::read_csv(dir + "/memory_norm.csv");
  REQUIRE(!rows.empty());
  bool seen[4] = {false, false, false, false};
  for (const auto& row : rows) {
    REQUIRE(row.size() == 4);
    const int seg = static_cast<int>(row[0]);
    REQUIRE(seg >= 1);
    REQUIRE(seg <= 3);
    seen[seg] = true;
    CHECK(row[1] >= 0.0);
    CHECK(std::isfinite(row[2]));
    CHECK(std::isfinite(row[3]));
    CHECK(row[2] >= 0.0);
    CHECK(row[3] >= 0.0);
  }
  CHECK(seen[1]);
  CHECK(seen[2]);
  CHECK(seen[3]);
}

TEST_CASE("coupling calibration lands in a physical range and caches") {
  DimerParams dimer;
  dimer.eps1_cm1 = 12410.0;
  dimer.eps2_cm1 = 12210.0;
  dimer.coupling_cm1 = 5.5;
  dimer.mu1 = 1.0;
  dimer.mu2 = -0.8;
  dimer.temperature_K = 77.0;
  const double s1 = calibrate_coupling_scale(dimer, 0.01, 2.0, 1);
  CHECK(s1 > 0.02);
  CHECK(s1 < 1.5);
  const double s2 = calibrate_coupling_scale(dimer, 0.01, 2.0, 1);
  CHECK(s2 == s1);
}

TEST_CASE("failures record the stage that threw in the manifest") {
  nlohmann::json j = tiny_json();
  j.erase("crosspeak_window");  // default 30 cm^-1 window is empty on 208 cm^-1 bins
  const RunConfig cfg = parse_config(j);
  const std::string dir = scratch("fail");
  CHECK_THROWS_AS(run_simulate(cfg, dir, 1), ConfigError);
  std::ifstream in(dir + "/manifest.json");
  REQUIRE(in.good());
  const nlohmann::json m = nlohmann::json::parse(in);
  CHECK(m.at("failed_stage").get<std::string>() == "analysis");
  CHECK(m.contains("wall_times_s"));
}

TEST_CASE("grid snapping and signal panel round trip") {
  CHECK(detail::nearest_grid_value({0.0, 5.0, 10.0, 15.0}, 100.0) == 15.0);
  CHECK(detail::nearest_grid_value({0.0, 5.0, 10.0, 15.0}, 6.9) == 5.0);
  CHECK(detail::nearest_grid_value({0.0, 5.0, 10.0, 15.0}, 7.6) == 10.0);

  const std::vector<double> t1 = {0.0, 2.0};
  const std::vector<double> t3 = {0.0, 3.0, 6.0};
  Eigen::MatrixXcd panel(2, 3);
  panel << std::complex<double>(0.125, -3.5), std::complex<double>(1e-17, 2.0),
      std::complex<double>(-0.3, 0.7), std::complex<double>(4.0, 0.0),
      std::complex<double>(0.0, -1e8), std::complex<double>(9.25, 1.0 / 3.0);
  const std::string dir = scratch("panel");
  detail::write_signal_panel(dir + "/panel.csv", t1, t3, panel);
  const auto rows = detail::read_csv(dir + "/panel.csv");
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const auto& row = rows[i * 3 + j];
      REQUIRE(row.size() == 4);
      CHECK(row[0] == t1[i]);
      CHECK(row[1] == t3[j]);
      CHECK(row[2] == panel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).real());
      CHECK(row[3] == panel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).imag());
    }
}
