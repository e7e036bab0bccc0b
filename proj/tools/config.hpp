#pragma once

#include <string>

#include "causwave/arc1d.hpp"
#include "causwave/field2d.hpp"
#include "causwave/potential.hpp"

namespace causwave::cli {

struct PipelineConfig {
  Model model;
  ArcMethod method = ArcMethod::SE;
  int n1 = 2, n2 = 2;
  int parity = +1;                 // x-parity of the full field
  double e_lo = 0.0, e_hi = 0.0;   // 0 lets the search pick its bracket
  double tol = 1e-3;
  int max_iter = 30;
  CausticTraceOptions trace;
  double h = 0.05;
  double delta_factor = 5.0;
  AmplitudeMode amplitude = AmplitudeMode::Constant;
  double qhje_tol = 1e-6;
  int qhje_max_iter = 60;
  int oracle_nx = 30, oracle_ny = 30;
  int raster_n = 201;
  std::string out_dir = "out";

  /// Throws InvalidArgument naming the offending key.
  void validate() const;
  /// Sorted "section.key = value" lines; the hash is taken over this text.
  std::string canonical() const;
};

/// Reads the sectioned key = value file. Unknown keys are errors so typos
/// do not silently fall back to defaults.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& text);

ArcMethod parse_method(const std::string& s);
std::string sha256_hex(const std::string& bytes);
std::string config_hash(const PipelineConfig& cfg);

}  // namespace causwave::cli
