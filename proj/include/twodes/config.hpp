// config.hpp - run configuration: JSON schema, validation, presets, hashing
#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "twodes/bath.hpp"
#include "twodes/dissipator.hpp"
#include "twodes/errors.hpp"
#include "twodes/exciton.hpp"
#include "twodes/spectra.hpp"

namespace twodes {

struct GridConfig {
  double t1_max_fs = 320.0;
  int t1_points = 64;
  double t3_max_fs = 320.0;
  int t3_points = 64;
  std::vector<double> T_list_fs;
};

// Fully resolved run description. Optional inputs (null coupling scale,
// dressing amplitude, window centers) are resolved at load time except the
// bath coupling, whose calibration is deferred to the pipeline.
struct RunConfig {
  DimerParams dimer;
  SpectralDensity bath;
  bool bath_lambda_auto = false;  // true: calibrate lambda before running
  DynamicsMode mode = DynamicsMode::CorrelationAware;
  SegmentVariant variant = SegmentVariant::AsPrinted;
  double pulse_amplitude = 0.01;
  double dressing_amplitude = 0.01;
  GridConfig grids;
  double dt_fs = 0.5;
  CrosspeakWindow window;
  std::vector<double> spectra_T_fs;

  std::vector<double> t1_grid() const {
    std::vector<double> g(static_cast<std::size_t>(grids.t1_points));
    const double step = grids.t1_max_fs / grids.t1_points;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = step * static_cast<double>(k);
    return g;
  }
  std::vector<double> t3_grid() const {
    std::vector<double> g(static_cast<std::size_t>(grids.t3_points));
    const double step = grids.t3_max_fs / grids.t3_points;
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = step * static_cast<double>(k);
    return g;
  }

  void validate() const {
    dimer.validate();
    if (!bath_lambda_auto) bath.validate();
    if (!(pulse_amplitude > 0.0)) throw ConfigError("config: pulse_amplitude must be > 0");
    if (!(dressing_amplitude >= 0.0))
      throw ConfigError("config: dressing_amplitude must be >= 0");
    if (!(dt_fs > 0.0)) throw ConfigError("config: integrator.dt_fs must be > 0");
    if (grids.t1_points < 2 || grids.t3_points < 2)
      throw ConfigError("config: grids.t1_points and grids.t3_points must be >= 2");
    if (!(grids.t1_max_fs > 0.0) || !(grids.t3_max_fs > 0.0))
      throw ConfigError("config: grids.t1_max_fs and grids.t3_max_fs must be > 0");
    auto check_multiple = [&](double value, const char* what) {
      const double x = value / dt_fs;
      if (std::abs(x - std::round(x)) > 1e-9 || value < 0.0)
        throw ConfigError(std::string("config: ") + what + " = " + std::to_string(value) +
                          " fs is not a nonnegative multiple of dt_fs");
    };
    check_multiple(grids.t1_max_fs / grids.t1_points, "t1 grid step");
    check_multiple(grids.t3_max_fs / grids.t3_points, "t3 grid step");
    if (grids.T_list_fs.empty()) throw ConfigError("config: grids.T_list_fs must be nonempty");
    for (std::size_t i = 0; i < grids.T_list_fs.size(); ++i) {
      check_multiple(grids.T_list_fs[i], "T_list entry");
      if (i > 0 && !(grids.T_list_fs[i] > grids.T_list_fs[i - 1]))
        throw ConfigError("config: grids.T_list_fs must be strictly increasing");
    }
    if (!(window.halfwidth_cm1 > 0.0))
      throw ConfigError("config: crosspeak_window.halfwidth_cm1 must be > 0");
    for (double t : spectra_T_fs) {
      bool found = false;
      for (double u : grids.T_list_fs) found = found || std::abs(u - t) < 1e-9;
      if (!found)
        throw ConfigError("config: spectra_T_fs entry " + std::to_string(t) +
                          " is not in grids.T_list_fs");
    }
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const char* where,
                       std::initializer_list<const char*> required,
                       std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  std::string missing;
  for (const char* k : required)
    if (!j.contains(k)) missing += missing.empty() ? k : std::string(", ") + k;
  if (!missing.empty())
    throw ConfigError(std::string(where) + ": missing required field(s): " + missing);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required) known = known || it.key() == k;
    for (const char* k : optional) known = known || it.key() == k;
    if (!known) throw ConfigError(std::string(where) + ": unknown field '" + it.key() + "'");
  }
}

inline double number_at(const json& j, const char* where, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number())
    throw ConfigError(std::string(where) + "." + key + ": expected a number");
  return v.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["dimer"] = {{"eps1_cm1", cfg.dimer.eps1_cm1},       {"eps2_cm1", cfg.dimer.eps2_cm1},
                {"coupling_cm1", cfg.dimer.coupling_cm1}, {"mu1", cfg.dimer.mu1},
                {"mu2", cfg.dimer.mu2},                 {"temperature_K", cfg.dimer.temperature_K},
                {"f_dipole_scale", cfg.dimer.f_dipole_scale}};
  nlohmann::json bath;
  bath["kind"] = cfg.bath.kind == SpectralDensity::Kind::PowerLaw ? "power_law" : "structured";
  if (cfg.bath_lambda_auto)
    bath["lambda"] = nullptr;
  else
    bath["lambda"] = cfg.bath.lambda;
  bath["omega_c_rad_fs"] = cfg.bath.omega_c_rad_fs;
  if (cfg.bath.kind == SpectralDensity::Kind::PowerLaw) {
    bath["s"] = cfg.bath.s;
  } else {
    bath["tail_weight"] = cfg.bath.tail_weight;
    bath["tail_cut_fraction"] = cfg.bath.tail_cut_fraction;
  }
  j["bath"] = bath;
  j["dynamics_mode"] = cfg.mode == DynamicsMode::CorrelationAware    ? "correlation_aware"
                       : cfg.mode == DynamicsMode::FactorizedReset   ? "factorized_reset"
                                                                     : "static_markov";
  j["segment_variant"] =
      cfg.variant == SegmentVariant::AsPrinted ? "as_printed" : "telescoping";
  j["pulse_amplitude"] = cfg.pulse_amplitude;
  j["dressing_amplitude"] = cfg.dressing_amplitude;
  j["grids"] = {{"t1_max_fs", cfg.grids.t1_max_fs},
                {"t1_points", cfg.grids.t1_points},
                {"t3_max_fs", cfg.grids.t3_max_fs},
                {"t3_points", cfg.grids.t3_points},
                {"T_list_fs", cfg.grids.T_list_fs}};
  j["integrator"] = {{"dt_fs", cfg.dt_fs}};
  j["crosspeak_window"] = {{"omega1_center_cm1", cfg.window.omega1_center_cm1},
                           {"omega3_center_cm1", cfg.window.omega3_center_cm1},
                           {"halfwidth_cm1", cfg.window.halfwidth_cm1}};
  j["spectra_T_fs"] = cfg.spectra_T_fs;
  return j;
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::number_at;
  check_keys(j, "config",
             {"dimer", "bath", "dynamics_mode", "pulse_amplitude", "grids", "integrator"},
             {"segment_variant", "dressing_amplitude", "crosspeak_window", "spectra_T_fs"});

  RunConfig cfg;
  const auto& jd = j.at("dimer");
  check_keys(jd, "config.dimer",
             {"eps1_cm1", "eps2_cm1", "coupling_cm1", "mu1", "mu2", "temperature_K"},
             {"f_dipole_scale"});
  cfg.dimer.eps1_cm1 = number_at(jd, "config.dimer", "eps1_cm1");
  cfg.dimer.eps2_cm1 = number_at(jd, "config.dimer", "eps2_cm1");
  cfg.dimer.coupling_cm1 = number_at(jd, "config.dimer", "coupling_cm1");
  cfg.dimer.mu1 = number_at(jd, "config.dimer", "mu1");
  cfg.dimer.mu2 = number_at(jd, "config.dimer", "mu2");
  cfg.dimer.temperature_K = number_at(jd, "config.dimer", "temperature_K");
  if (jd.contains("f_dipole_scale"))
    cfg.dimer.f_dipole_scale = number_at(jd, "config.dimer", "f_dipole_scale");

  const auto& jb = j.at("bath");
  if (!jb.is_object() || !jb.contains("kind"))
    throw ConfigError("config.bath: missing required field(s): kind");
  const std::string kind = jb.at("kind").get<std::string>();
  if (kind == "power_law") {
    check_keys(jb, "config.bath", {"kind", "lambda", "s", "omega_c_rad_fs"}, {});
    cfg.bath.kind = SpectralDensity::Kind::PowerLaw;
    cfg.bath.s = number_at(jb, "config.bath", "s");
  } else if (kind == "structured") {
    check_keys(jb, "config.bath", {"kind", "lambda", "omega_c_rad_fs"},
               {"tail_weight", "tail_cut_fraction"});
    cfg.bath.kind = SpectralDensity::Kind::Structured;
    cfg.bath.s = 1.0;
    if (jb.contains("tail_weight"))
      cfg.bath.tail_weight = number_at(jb, "config.bath", "tail_weight");
    if (jb.contains("tail_cut_fraction"))
      cfg.bath.tail_cut_fraction = number_at(jb, "config.bath", "tail_cut_fraction");
  } else {
    throw ConfigError("config.bath.kind: expected 'power_law' or 'structured', got '" + kind +
                      "'");
  }
  if (jb.at("lambda").is_null()) {
    cfg.bath_lambda_auto = true;
    cfg.bath.lambda = 0.0;
  } else {
    cfg.bath_lambda_auto = false;
    cfg.bath.lambda = number_at(jb, "config.bath", "lambda");
  }
  cfg.bath.omega_c_rad_fs = number_at(jb, "config.bath", "omega_c_rad_fs");

  const std::string mode = j.at("dynamics_mode").get<std::string>();
  if (mode == "correlation_aware")
    cfg.mode = DynamicsMode::CorrelationAware;
  else if (mode == "factorized_reset")
    cfg.mode = DynamicsMode::FactorizedReset;
  else if (mode == "static_markov")
    cfg.mode = DynamicsMode::StaticMarkov;
  else
    throw ConfigError("config.dynamics_mode: expected 'correlation_aware', 'factorized_reset' "
                      "or 'static_markov', got '" + mode + "'");

  if (j.contains("segment_variant")) {
    const std::string variant = j.at("segment_variant").get<std::string>();
    if (variant == "as_printed")
      cfg.variant = SegmentVariant::AsPrinted;
    else if (variant == "telescoping")
      cfg.variant = SegmentVariant::Telescoping;
    else
      throw ConfigError("config.segment_variant: expected 'as_printed' or 'telescoping', got '" +
                        variant + "'");
  }

  cfg.pulse_amplitude = number_at(j, "config", "pulse_amplitude");
  if (j.contains("dressing_amplitude") && !j.at("dressing_amplitude").is_null())
    cfg.dressing_amplitude = number_at(j, "config", "dressing_amplitude");
  else
    cfg.dressing_amplitude = cfg.pulse_amplitude;

  const auto& jg = j.at("grids");
  check_keys(jg, "config.grids", {"t1_max_fs", "t1_points", "t3_max_fs", "t3_points", "T_list_fs"},
             {});
  cfg.grids.t1_max_fs = number_at(jg, "config.grids", "t1_max_fs");
  cfg.grids.t1_points = jg.at("t1_points").get<int>();
  cfg.grids.t3_max_fs = number_at(jg, "config.grids", "t3_max_fs");
  cfg.grids.t3_points = jg.at("t3_points").get<int>();
  if (!jg.at("T_list_fs").is_array())
    throw ConfigError("config.grids.T_list_fs: expected an array");
  cfg.grids.T_list_fs = jg.at("T_list_fs").get<std::vector<double>>();

  const auto& ji = j.at("integrator");
  check_keys(ji, "config.integrator", {"dt_fs"}, {});
  cfg.dt_fs = number_at(ji, "config.integrator", "dt_fs");

  // Window centers default to the exciton energies: excitation on the upper
  // branch, detection on the lower, where relaxation feeds the cross peak.
  const ExcitonBasis basis = diagonalize_dimer(cfg.dimer);
  cfg.window.omega1_center_cm1 = basis.E2_cm1;
  cfg.window.omega3_center_cm1 = basis.E1_cm1;
  if (j.contains("crosspeak_window")) {
    const auto& jw = j.at("crosspeak_window");
    check_keys(jw, "config.crosspeak_window", {},
               {"omega1_center_cm1", "omega3_center_cm1", "halfwidth_cm1"});
    if (jw.contains("omega1_center_cm1") && !jw.at("omega1_center_cm1").is_null())
      cfg.window.omega1_center_cm1 = number_at(jw, "config.crosspeak_window", "omega1_center_cm1");
    if (jw.contains("omega3_center_cm1") && !jw.at("omega3_center_cm1").is_null())
      cfg.window.omega3_center_cm1 = number_at(jw, "config.crosspeak_window", "omega3_center_cm1");
    if (jw.contains("halfwidth_cm1"))
      cfg.window.halfwidth_cm1 = number_at(jw, "config.crosspeak_window", "halfwidth_cm1");
  }

  if (j.contains("spectra_T_fs")) {
    if (!j.at("spectra_T_fs").is_array())
      throw ConfigError("config.spectra_T_fs: expected an array");
    cfg.spectra_T_fs = j.at("spectra_T_fs").get<std::vector<double>>();
  } else if (!cfg.grids.T_list_fs.empty()) {
    cfg.spectra_T_fs = {cfg.grids.T_list_fs.front()};
  }

  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("load_config: '" + path + "' is not valid JSON (" + e.what() +
                      "); required fields: dimer, bath, dynamics_mode, pulse_amplitude, grids, "
                      "integrator");
  }
  return parse_config(j);
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_config: cannot open '" + path + "' for writing");
  out << to_json(cfg).dump(2) << "\n";
}

inline std::string config_hash(const RunConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= static_cast<std::uint64_t>(ch);
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a:") + buf;
}

// The four shipped scenarios. All share the same dimer, grids, and calibrated
// coupling scale; they differ only in bath memory and propagation mode.
inline RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  cfg.dimer.eps1_cm1 = 12410.0;
  cfg.dimer.eps2_cm1 = 12210.0;
  cfg.dimer.coupling_cm1 = 5.5;
  cfg.dimer.mu1 = 1.0;
  cfg.dimer.mu2 = -0.8;
  cfg.dimer.temperature_K = 77.0;
  cfg.bath.lambda = 0.0;
  cfg.bath_lambda_auto = true;
  cfg.bath.omega_c_rad_fs = 0.01;
  cfg.pulse_amplitude = 0.01;
  // Kernel dressing at order-unity pulse area: the dressed memory brackets
  // need a pulse that genuinely promotes ground-state amplitude, while the
  // response extraction stays in the weak-field cubic regime.
  cfg.dressing_amplitude = 1.0;
  cfg.grids.t1_max_fs = 320.0;
  cfg.grids.t1_points = 64;
  cfg.grids.t3_max_fs = 320.0;
  cfg.grids.t3_points = 64;
  cfg.grids.T_list_fs.clear();
  for (int k = 0; k <= 100; ++k) cfg.grids.T_list_fs.push_back(10.0 * k);
  cfg.dt_fs = 0.5;
  cfg.spectra_T_fs = {10.0};
  const ExcitonBasis basis = diagonalize_dimer(cfg.dimer);
  cfg.window.omega1_center_cm1 = basis.E2_cm1;
  cfg.window.omega3_center_cm1 = basis.E1_cm1;
  cfg.window.halfwidth_cm1 = 30.0;

  if (name == "fig2") {
    cfg.mode = DynamicsMode::CorrelationAware;
    cfg.bath.kind = SpectralDensity::Kind::PowerLaw;
    cfg.bath.s = 0.9;
  } else if (name == "fig3") {
    cfg.mode = DynamicsMode::CorrelationAware;
    cfg.bath.kind = SpectralDensity::Kind::PowerLaw;
    cfg.bath.s = 1.0;
  } else if (name == "fig4") {
    cfg.mode = DynamicsMode::FactorizedReset;
    cfg.bath.kind = SpectralDensity::Kind::PowerLaw;
    cfg.bath.s = 0.9;
  } else if (name == "fig5") {
    cfg.mode = DynamicsMode::CorrelationAware;
    cfg.bath.kind = SpectralDensity::Kind::Structured;
    cfg.bath.s = 1.0;
  } else {
    throw ConfigError("preset_config: unknown preset '" + name +
                      "' (expected fig2, fig3, fig4 or fig5)");
  }
  cfg.validate();
  return cfg;
}

}  // namespace twodes
