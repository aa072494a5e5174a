#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "patchlab/errors.hpp"
#include "patchlab/experiment.hpp"

namespace {

int report(const char* kind, const std::exception& e, int code) {
  std::fprintf(stderr, "patchlab: %s: %s\n", kind, e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vortex patch contour dynamics and curvature diagnostics"};
  app.set_version_flag("--version", PATCHLAB_VERSION);
  app.require_subcommand(1);

  std::string config_path, snapshot_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_flag("-q,--quiet", quiet, "Print nothing on success");
  auto* validate = app.add_subcommand("validate", "Check a config and print it fully resolved");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();
  auto* describe = app.add_subcommand("describe", "Summarize a curve or intrinsic snapshot");
  describe->add_option("snapshot", snapshot_path, "Snapshot JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      patchlab::ExperimentConfig cfg = patchlab::load_config(config_path);
      std::fputs(patchlab::config_to_json(cfg).c_str(), stdout);
    } else if (*describe) {
      std::fputs(patchlab::describe_snapshot(snapshot_path).c_str(), stdout);
    } else {
      patchlab::ExperimentConfig cfg = patchlab::load_config(config_path);
      patchlab::ExperimentSummary s = patchlab::run_experiment(cfg);
      if (!quiet) {
        for (const auto& l : s.lines) std::printf("%s\n", l.c_str());
        std::printf("wrote %zu files to %s\n", s.files.size() + 1, cfg.output_dir.c_str());
      }
    }
  } catch (const patchlab::InputError& e) {
    return report("input error", e, 2);
  } catch (const patchlab::NumericalError& e) {
    return report("numerical failure", e, 3);
  } catch (const std::bad_alloc& e) {
    return report("out of memory", e, 3);
  } catch (const std::exception& e) {
    return report("error", e, 3);
  }
  return 0;
}
