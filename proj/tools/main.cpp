#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "causwave/errors.hpp"
#include "config.hpp"
#include "stages.hpp"

using namespace causwave;

int main(int argc, char** argv) {
  CLI::App app{"Caustic-based eigenfunction construction for 2D Hamiltonians"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string method;
  std::vector<int> state;
  std::string parity;
  std::string out_dir;
  bool resume = false;
  app.add_option("--config", config_path, "Config file (sectioned key = value)")->check(CLI::ExistingFile);
  app.add_option("--method", method, "se, wkb or qhje")->check(CLI::IsMember({"se", "wkb", "qhje"}));
  app.add_option("--state", state, "Target quantum numbers N1 N2")->expected(2);
  app.add_option("--parity", parity, "x-parity of the full field")->check(CLI::IsMember({"even", "odd"}));
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--resume", resume, "Skip stages whose recorded artifacts are intact");

  std::vector<std::string> names = cli::stage_names();
  names.push_back("pipeline");
  for (const auto& n : names) app.add_subcommand(n, n == "pipeline" ? "Run every stage in order" : "Run the " + n + " stage");

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  std::string stage = "config";
  try {
    cli::PipelineConfig cfg = config_path.empty() ? cli::PipelineConfig{} : cli::load_config(config_path);
    if (!method.empty()) cfg.method = cli::parse_method(method);
    if (!state.empty()) {
      cfg.n1 = state[0];
      cfg.n2 = state[1];
    }
    if (!parity.empty()) cfg.parity = parity == "even" ? +1 : -1;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();

    if (sub == "pipeline") return cli::run_pipeline(cfg, resume);
    stage = sub;
    std::filesystem::create_directories(cfg.out_dir);
    cli::Manifest m(cfg.out_dir, cfg);
    return cli::run_stage(sub, cfg, m, resume) == cli::StageStatus::NotConverged ? 2 : 0;
  } catch (const cli::StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == "NotConverged" ? 2 : 1;
  } catch (const NotConverged& e) {
    std::fprintf(stderr, "error: stage %s: %s\n", stage.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: stage %s: %s\n", stage.c_str(), e.what());
    return 1;
  }
}
