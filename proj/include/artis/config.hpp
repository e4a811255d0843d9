#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "artis/core.hpp"
#include "artis/fhdof.hpp"
#include "artis/optflow.hpp"
#include "artis/seqmatch.hpp"
#include "artis/tpdf.hpp"

namespace artis {

/// Every pipeline tunable, serializable as key=value text. Each CLI run
/// echoes its effective config next to its outputs.
struct RunConfig {
  int stride = 1;

  int patch = 30;
  double hessian_threshold = 4e-4;
  double flow_sigma = 1.5;
  int flow_poly_n = 7;
  int flow_iterations = 3;
  int flow_smooth_radius = 7;
  int flow_work_width = 0;
  int flow_work_height = 0;

  int pn_grid_w = 64;
  int pn_grid_h = 36;
  int pn_patch = 8;

  int enhance_window = 11;
  int ds = 10;
  double v_min = 0.8;
  double v_max = 1.25;
  double v_step = 0.05;
  double uniqueness_mu = 0.95;
  int window_exclude = 10;

  int tpdf_window = 20;
  std::string tpdf_method = "approx";
  double ranksvm_lambda = 0.01;
  int ranksvm_iterations = 300;
  int gap_max = 20;
  int chain_min_points = 3;
  double chain_min_frac = 0.1;
  int chain_max_rounds = 64;

  double theta_start = 0.0;
  double theta_step = 0.05;
  double theta_end = 1.0;

  int threads = 0;
};

namespace detail {

struct ConfigField {
  const char* key;
  enum { kInt, kDouble, kString } type;
  std::function<void*(RunConfig&)> ptr;
};

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      {"stride", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.stride; }},
      {"patch", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.patch; }},
      {"hessian_threshold", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.hessian_threshold; }},
      {"flow_sigma", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.flow_sigma; }},
      {"flow_poly_n", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.flow_poly_n; }},
      {"flow_iterations", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.flow_iterations; }},
      {"flow_smooth_radius", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.flow_smooth_radius; }},
      {"flow_work_width", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.flow_work_width; }},
      {"flow_work_height", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.flow_work_height; }},
      {"pn_grid_w", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.pn_grid_w; }},
      {"pn_grid_h", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.pn_grid_h; }},
      {"pn_patch", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.pn_patch; }},
      {"enhance_window", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.enhance_window; }},
      {"ds", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.ds; }},
      {"v_min", ConfigField::kDouble, [](RunConfig& c) -> void* { return &c.v_min; }},
      {"v_max", ConfigField::kDouble, [](RunConfig& c) -> void* { return &c.v_max; }},
      {"v_step", ConfigField::kDouble, [](RunConfig& c) -> void* { return &c.v_step; }},
      {"uniqueness_mu", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.uniqueness_mu; }},
      {"window_exclude", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.window_exclude; }},
      {"tpdf_window", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.tpdf_window; }},
      {"tpdf_method", ConfigField::kString,
       [](RunConfig& c) -> void* { return &c.tpdf_method; }},
      {"ranksvm_lambda", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.ranksvm_lambda; }},
      {"ranksvm_iterations", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.ranksvm_iterations; }},
      {"gap_max", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.gap_max; }},
      {"chain_min_points", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.chain_min_points; }},
      {"chain_min_frac", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.chain_min_frac; }},
      {"chain_max_rounds", ConfigField::kInt,
       [](RunConfig& c) -> void* { return &c.chain_max_rounds; }},
      {"theta_start", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.theta_start; }},
      {"theta_step", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.theta_step; }},
      {"theta_end", ConfigField::kDouble,
       [](RunConfig& c) -> void* { return &c.theta_end; }},
      {"threads", ConfigField::kInt, [](RunConfig& c) -> void* { return &c.threads; }},
  };
  return fields;
}

}  // namespace detail

inline void apply_config_kv(RunConfig& cfg, const std::string& key,
                            const std::string& value) {
  for (const auto& field : detail::config_fields()) {
    if (key != field.key) continue;
    void* p = field.ptr(cfg);
    switch (field.type) {
      case detail::ConfigField::kInt: *static_cast<int*>(p) = std::stoi(value); break;
      case detail::ConfigField::kDouble:
        *static_cast<double*>(p) = std::stod(value);
        break;
      case detail::ConfigField::kString: *static_cast<std::string*>(p) = value; break;
    }
    return;
  }
  throw ValidationError("unknown config key: " + key);
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  char buf[128];
  RunConfig& mutable_cfg = const_cast<RunConfig&>(cfg);
  for (const auto& field : detail::config_fields()) {
    void* p = field.ptr(mutable_cfg);
    switch (field.type) {
      case detail::ConfigField::kInt:
        std::snprintf(buf, sizeof(buf), "%s=%d\n", field.key, *static_cast<int*>(p));
        out += buf;
        break;
      case detail::ConfigField::kDouble:
        std::snprintf(buf, sizeof(buf), "%s=%.9g\n", field.key,
                      *static_cast<double*>(p));
        out += buf;
        break;
      case detail::ConfigField::kString:
        out += field.key;
        out += '=';
        out += *static_cast<std::string*>(p);
        out += '\n';
        break;
    }
  }
  return out;
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << serialize_config(cfg);
  if (!os) throw IoError("write failed: " + path);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  RunConfig cfg;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("malformed config line: " + line);
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// per-module parameter builders

inline FlowParams flow_params(const RunConfig& cfg) {
  FlowParams p;
  p.window_sigma = cfg.flow_sigma;
  p.poly_n = cfg.flow_poly_n;
  p.iterations = cfg.flow_iterations;
  p.smoothing_radius = cfg.flow_smooth_radius;
  p.threads = cfg.threads;
  return p;
}

inline FhdofParams fhdof_params(const RunConfig& cfg) {
  FhdofParams p;
  p.patch = cfg.patch;
  p.hessian_threshold = cfg.hessian_threshold;
  p.flow = flow_params(cfg);
  p.flow_work_width = cfg.flow_work_width;
  p.flow_work_height = cfg.flow_work_height;
  p.threads = cfg.threads;
  return p;
}

inline LineSearchParams line_search_params(const RunConfig& cfg) {
  LineSearchParams p;
  p.ds = cfg.ds;
  p.v_min = cfg.v_min;
  p.v_max = cfg.v_max;
  p.v_step = cfg.v_step;
  p.uniqueness_mu = cfg.uniqueness_mu;
  p.window_exclude = cfg.window_exclude;
  p.threads = cfg.threads;
  return p;
}

inline RankSvmParams ranksvm_params(const RunConfig& cfg) {
  RankSvmParams p;
  p.lambda = cfg.ranksvm_lambda;
  p.iterations = cfg.ranksvm_iterations;
  return p;
}

inline ChainParams chain_params(const RunConfig& cfg) {
  ChainParams p;
  p.gap_max = cfg.gap_max;
  p.min_points = cfg.chain_min_points;
  p.min_weight_frac = cfg.chain_min_frac;
  p.max_rounds = cfg.chain_max_rounds;
  return p;
}

inline std::vector<double> coverage_thresholds(const RunConfig& cfg) {
  if (!(cfg.theta_step > 0)) throw ValidationError("theta_step must be positive");
  std::vector<double> out;
  for (double t = cfg.theta_start; t <= cfg.theta_end + 1e-12; t += cfg.theta_step)
    out.push_back(t);
  return out;
}

}  // namespace artis
