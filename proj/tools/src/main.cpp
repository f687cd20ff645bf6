#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qneq/cli/commands.hpp"

namespace fs = std::filesystem;
using namespace qneq;
using namespace qneq::cli;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string events;
};

fs::path output_dir(const RunConfig& config) {
  if (const char* env = std::getenv("QNEQ_OUTPUT_DIR"); env && *env) return env;
  return config.output.directory;
}

fs::path resolve(const RunConfig& config, const std::string& out, const std::string& fallback) {
  const fs::path p = out.empty() ? fs::path(fallback) : fs::path(out);
  return p.is_absolute() ? p : output_dir(config) / p;
}

void write_file(const fs::path& path, const std::string& payload) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << payload;
  if (!f) throw ConfigError("failed writing " + path.string());
}

void emit(const RunConfig& config, const std::string& out, const std::string& fallback, const std::string& payload) {
  if (out == "-") {
    std::cout << payload;
    return;
  }
  write_file(resolve(config, out, fallback), payload);
}

RunConfig load(const Options& o) {
  RunConfig config = o.config.empty() ? parse_config("") : load_config(o.config);
  if (o.seed) config.seed = *o.seed;
  return config;
}

int run(const std::string& command, const Options& o) {
  const RunConfig config = load(o);
  if (command == "predict") {
    emit(config, o.out, "predict.csv", predict_csv(config));
  } else if (command == "simulate") {
    EventFormat format = config.output.events_format == "jsonl" ? EventFormat::Jsonl : EventFormat::Csv;
    if (!o.out.empty() && o.out != "-") format = format_for_path(o.out);
    std::ostringstream buffer;
    simulate(config, buffer, format);
    emit(config, o.out, format == EventFormat::Jsonl ? "events.jsonl" : "events.csv", buffer.str());
  } else if (command == "analyze") {
    std::vector<PhotonEvent> events;
    if (o.events == "-") {
      events = read_events(std::cin);
    } else {
      std::ifstream in(o.events, std::ios::binary);
      if (!in) throw DataError("cannot read events file " + o.events);
      events = read_events(in);
    }
    emit(config, o.out, "report.json", analyze(config, events).dump(2) + "\n");
  } else if (command == "additivity") {
    emit(config, o.out, "additivity.json", additivity(config).dump(2) + "\n");
  } else if (command == "relax") {
    const auto result = relax(config);
    emit(config, o.out, "relax_checkpoints.csv", result.checkpoints_csv);
    fs::path hist = "relax_histogram.csv";
    if (!o.out.empty() && o.out != "-") {
      const fs::path p(o.out);
      hist = p.parent_path() / (p.stem().string() + "_histogram.csv");
    }
    write_file(resolve(config, hist.string(), ""), result.histogram_csv);
  }
  return 0;
}

const char* kind_name(int code) {
  switch (code) {
    case 2: return "config";
    case 3: return "data";
    case 4: return "numeric";
    default: return "internal";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum nonequilibrium hidden-variable simulator"};
  app.require_subcommand(1);
  Options o;
  const std::pair<const char*, const char*> commands[] = {
      {"predict", "exact p+ curve (equilibrium and configured density) as CSV"},
      {"simulate", "photon event stream as CSV or JSONL"},
      {"analyze", "harmonic fit and signature tests as a JSON report"},
      {"additivity", "exact and Monte Carlo expectation additivity as a JSON report"},
      {"relax", "pilot-wave relaxation checkpoints and final histogram as CSV"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "YAML configuration file");
    sub->add_option("--seed", o.seed, "override the configured seed");
    sub->add_option("--out", o.out, "output path ('-' for stdout)");
    if (std::string(name) == "analyze") sub->add_option("--events", o.events, "event file or '-' for stdin")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("config", e.what(), 2);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const bool reads_data = command == "analyze";
  try {
    return run(command, o);
  } catch (const Error& e) {
    const int code = exit_code(e.kind(), reads_data);
    std::cerr << error_json(kind_name(code), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what(), 1);
    return 1;
  }
}
