#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace wkam;
using namespace wkam::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  out << text;
}

fs::path output_dir(const std::string& from_config, const std::string& from_flag) {
  if (const char* env = std::getenv("WEAKKAM_OUTPUT_DIR"); env && *env) return env;
  if (!from_flag.empty()) return from_flag;
  return from_config;
}

int report_numeric(const std::string& command, const json& config, const std::string& hash, const fs::path& dir,
                   const Error& e) {
  json doc{{"command", command},
           {"version", kVersion},
           {"config", config},
           {"config_hash", hash},
           {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
  std::cerr << e.what() << "\n";
  try {
    fs::create_directories(dir);
    write_file(dir / (command + "_" + hash + ".json"), doc.dump(2) + "\n");
  } catch (const std::exception& w) {
    std::cerr << w.what() << "\n";
  }
  return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak KAM solver for contact Hamilton-Jacobi equations on flat tori"};
  std::string command, config_path, out_flag;
  std::size_t threads = 1;
  bool dump_graph = false, value_iteration = false;
  std::vector<std::string> names;
  for (const auto& [name, fn] : commands()) names.push_back(name);
  app.add_option("command", command, "validate | critical | solve | barrier | mather | vanish | compare")
      ->required()
      ->check(CLI::IsMember(names));
  app.add_option("config", config_path, "experiment config (JSON)")->required();
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", out_flag, "output directory (WEAKKAM_OUTPUT_DIR takes precedence)");
  app.add_flag("--dump-graph", dump_graph, "also write the edge list as graph_<hash>.csv");
  app.add_flag("--value-iteration", value_iteration, "critical: add the value-iteration estimate of c");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  json doc;
  ExperimentConfig cfg;
  json resolved;
  std::string hash;
  try {
    doc = load_json(config_path);
    cfg = parse_config(doc);
    resolved = resolved_json(cfg);
    hash = config_hash(resolved);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::BadGrid) {
      std::cerr << e.what() << "\n";
      return kExitConfig;
    }
    std::string dir = ".";
    if (doc.is_object() && doc.contains("output_dir") && doc["output_dir"].is_string()) dir = doc["output_dir"];
    return report_numeric(command, doc, config_hash(doc), output_dir(dir, out_flag), e);
  } catch (const json::exception& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    return kExitConfig;
  }

  const fs::path dir = output_dir(cfg.output_dir, out_flag);
  try {
    if (!cfg.synthetic) validate_model(cfg.model);
    RunFlags flags{threads, value_iteration};
    Outputs out = commands().at(command)(cfg, flags);
    json result{{"command", command},
                {"version", kVersion},
                {"config", resolved},
                {"config_hash", hash},
                {"result", out.summary}};
    fs::create_directories(dir);
    const std::string stem = command + "_" + hash;
    write_file(dir / (stem + ".csv"), out.csv);
    write_file(dir / (stem + ".json"), result.dump(2) + "\n");
    if (dump_graph) write_file(dir / ("graph_" + hash + ".csv"), graph_csv(cfg.graph()));
    std::cout << (dir / (stem + ".json")).string() << "\n";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) {
      std::cerr << e.what() << "\n";
      return kExitConfig;
    }
    return report_numeric(command, resolved, hash, dir, e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
