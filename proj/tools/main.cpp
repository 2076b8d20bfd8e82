#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"
#include "qgphase/errors.hpp"

namespace qgphase::cli {

namespace {

json resolve_config(const std::string& path, const std::string& preset_name, const std::vector<std::string>& sets) {
  if (path.empty() == preset_name.empty()) throw ConfigError("give exactly one of a config file or --preset");
  json cfg = path.empty() ? preset(preset_name).config : load_config(path);
  for (const auto& s : sets) apply_override(cfg, s);
  validate(cfg);
  return cfg;
}

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalGuardError& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"qgphase: gravitationally induced phases, overlaps and operator checks"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "run a scenario and write report.json plus tables/*.csv");
  run->add_option("config", config_path, "scenario config (JSON)");
  run->add_option("--preset", preset_name, "use a built-in preset instead of a file");
  run->add_option("--set", sets, "override a value, e.g. --set grid.n=64")->allow_extra_args(false);
  run->add_option("--out", out_dir, "output directory (default: the config's output field)");

  std::string check_path;
  auto* check = app.add_subcommand("validate", "validate a config and print it with defaults filled");
  check->add_option("config", check_path, "scenario config (JSON)")->required();
  std::vector<std::string> check_sets;
  check->add_option("--set", check_sets, "override a value")->allow_extra_args(false);

  std::string write_dir;
  auto* list = app.add_subcommand("presets", "list built-in presets");
  list->add_option("--write", write_dir, "write each preset as <dir>/<name>.json");

  app.add_subcommand("schema", "print the config JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  return run_guarded([&] {
    if (*run) {
      const json cfg = resolve_config(config_path, preset_name, sets);
      const std::string out = out_dir.empty() ? cfg["output"].get<std::string>() : out_dir;
      const RunOutput r = run_scenario(cfg, out);
      std::cout << "scenario " << cfg["scenario"].get<std::string>() << " -> " << out << "/report.json\n";
      for (const auto& t : r.tables) std::cout << "  " << t << "\n";
    } else if (*check) {
      std::cout << resolve_config(check_path, "", check_sets).dump(2) << "\n";
    } else if (*list) {
      for (const auto& p : presets()) {
        std::cout << p.name << "\t" << p.description << "\n";
        if (!write_dir.empty()) {
          std::filesystem::create_directories(write_dir);
          const auto path = std::filesystem::path(write_dir) / (p.name + ".json");
          std::ofstream f(path);
          if (!(f << p.config.dump(2) << "\n")) throw IoError("cannot write " + path.string());
        }
      }
    } else {
      std::cout << schema().dump(2) << "\n";
    }
  });
}

}  // namespace qgphase::cli
