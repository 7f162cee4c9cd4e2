#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amor/config.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/scenario.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string preset_name = "paper-default";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Options& o) {
  auto* cfg = cmd->add_option("--config", o.config_path, "JSON config file (overlays the preset)");
  cmd->add_option("--preset", o.preset_name, "built-in preset")
      ->check(CLI::IsMember(amor::preset_names()));
  cmd->add_option("--seed", o.seed, "top-level RNG seed");
  cmd->add_option("--set", o.sets, "override, e.g. pump.duty=0.4 (repeatable)")->take_all();
  cmd->add_option("--out", o.out_dir, "output directory")->required();
  cfg->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMOR magnetometer simulator"};
  app.set_version_flag("--version", std::string(amor::kToolVersion));
  app.require_subcommand(1);
  Options opts;
  const char* names[] = {"dc-sweep", "lockin-sweep", "sa-compare", "sensitivity", "temp-scan", "validate"};
  const char* help[] = {"constant-pump rotation versus field",
                        "lock-in output versus field with side resonances",
                        "analyzer traces, coherent and squeezed probe",
                        "noise, response and sensitivity spectra",
                        "cell temperature scan",
                        "oracle self-checks"};
  for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], help[i]), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(amor::ErrorCategory::Usage);
  }

  try {
    amor::Scenario sc;
    sc.name = amor::parse_scenario_name(app.get_subcommands().front()->get_name());
    if (!opts.config_path.empty()) {
      auto base = amor::to_json(amor::preset(opts.preset_name));
      base.merge_patch(nlohmann::json::parse(amor::io::read_file(opts.config_path)));
      sc.config = amor::config_from_json(base);
    } else {
      sc.config = amor::preset(opts.preset_name);
    }
    if (opts.seed) sc.config.detection.rng_seed = *opts.seed;
    sc.overrides = opts.sets;
    sc.output_dir = opts.out_dir;

    const auto manifest = amor::run_scenario(sc);
    std::cout << "scenario " << manifest.scenario << "\n"
              << "config_hash " << manifest.config_hash << "\n";
    for (const auto& f : manifest.files) std::cout << "wrote " << f.name << " " << f.sha256 << "\n";
    const auto out = std::filesystem::path(opts.out_dir);
    for (const char* extra : {"summary.json", "validation.txt", "temp_scan.txt"}) {
      if (std::filesystem::exists(out / extra)) std::cout << amor::io::read_file(out / extra);
    }
    if (!manifest.passed) return static_cast<int>(amor::ErrorCategory::ValidationFailed);
    return 0;
  } catch (const amor::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(amor::ErrorCategory::Config);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(amor::ErrorCategory::Io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(amor::ErrorCategory::Numeric);
  }
}
