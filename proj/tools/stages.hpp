#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace causwave::cli {

/// A library failure tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, std::string kind, const std::string& what)
      : std::runtime_error("stage " + stage + ": " + what), stage_(std::move(stage)), kind_(std::move(kind)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string stage_, kind_;
};

/// Run record in <out>/manifest.json. Entries survive only while the config
/// hash is unchanged; every stage lists the files it read and wrote with
/// their SHA-256 so stale or edited artifacts are detected.
class Manifest {
 public:
  Manifest(std::filesystem::path dir, const PipelineConfig& cfg);
  bool fresh(const std::string& stage) const;
  /// Throws IoError when `file` differs from what the stage that wrote it recorded.
  void check_input(const std::string& file) const;
  void record(const std::string& stage, bool converged, nlohmann::json results,
              const std::vector<std::string>& inputs, const std::vector<std::string>& outputs);
  const nlohmann::json& data() const { return j_; }
  void save() const;

 private:
  std::string file_hash(const std::string& file) const;
  std::filesystem::path dir_;
  nlohmann::json j_;
};

enum class StageStatus { Ok, NotConverged, Cached };

const std::vector<std::string>& stage_names();
/// Stages chained by `pipeline`.
const std::vector<std::string>& pipeline_stages();

StageStatus run_stage(const std::string& name, const PipelineConfig& cfg, Manifest& manifest, bool resume);

/// Runs every pipeline stage; returns the process exit code (0 or 2).
int run_pipeline(const PipelineConfig& cfg, bool resume);

}  // namespace causwave::cli
