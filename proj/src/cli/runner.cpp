#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "werate/cli_runner.hpp"

namespace werate::cli {

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

using Command = std::function<CommandResult(Config&, const GlobalOptions&)>;

int execute(const std::string& name, const Command& cmd, const std::string& config_path, GlobalOptions options) {
  if (const char* env = std::getenv("WERATE_OUT"); env && *env) options.out = env;
  const std::string started = utc_now();
  Config config = Config::load(config_path);
  CommandResult result = cmd(config, options);

  const std::filesystem::path dir(options.out);
  std::filesystem::create_directories(dir);
  std::vector<std::string> outputs;
  if (options.format != Format::Csv) {
    const std::string file = name + ".json";
    write_file(dir / file, result.report.dump(2) + "\n");
    outputs.push_back(file);
  }
  if (options.format != Format::Json) {
    for (const auto& t : result.tables) {
      const std::string file = name + "_" + t.name + ".csv";
      write_file(dir / file, t.render());
      outputs.push_back(file);
    }
  }

  Json manifest;
  manifest["command"] = name;
  manifest["config_digest"] = sha256_hex("command=" + name + "\n" + options.canonical() + config.canonical());
  manifest["seed"] = options.seed;
  manifest["tool_version"] = kToolVersion;
  manifest["started"] = started;
  manifest["finished"] = utc_now();
  manifest["outputs"] = outputs;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << result.report.dump(2) << "\n";
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Weighted entropy rates: closed forms, transfer operators and simulation"};
  app.require_subcommand(1);

  GlobalOptions options;
  std::string format = "json";
  std::string base = "nat";
  app.add_option("--seed", options.seed, "Master seed")->capture_default_str();
  app.add_option("--out", options.out, "Output directory (WERATE_OUT overrides)")->capture_default_str();
  app.add_option("--format", format, "json, csv or both")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
  app.add_option("--log-base", base, "nat or bits")->check(CLI::IsMember({"nat", "bits"}))->capture_default_str();
  app.add_option("--threads", options.threads, "Worker cap")->check(CLI::PositiveNumber)->capture_default_str();

  struct Entry {
    const char* name;
    const char* help;
    Command cmd;
  };
  const std::vector<Entry> entries{
      {"iid", "I.i.d. rates and exact WE", cmd_iid},
      {"markov", "Finite Markov chain rates and exact WE", cmd_markov},
      {"gaussian", "Gaussian closed forms with Monte Carlo check", cmd_gaussian},
      {"pressure", "Pressure, twisted chain, variational audit, topological entropy", cmd_pressure},
      {"simulate", "Trajectory convergence experiments", cmd_simulate},
  };
  std::string config_path;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->fallthrough();
    sub->add_option("config", config_path, "Config file (key = value)")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  options.format = format == "json" ? Format::Json : format == "csv" ? Format::Csv : Format::Both;
  options.log_base = base == "bits" ? LogBase::Base2 : LogBase::Natural;

  for (const auto& e : entries) {
    if (!app.got_subcommand(e.name)) continue;
    try {
      return execute(e.name, e.cmd, config_path, options);
    } catch (const SizeGuardError& ex) {
      std::cerr << "werate: size guard: " << ex.what() << "\n";
      return 4;
    } catch (const ValidationError& ex) {
      std::cerr << "werate: invalid input: " << ex.what() << "\n";
      return 2;
    } catch (const InfiniteInformationError& ex) {
      std::cerr << "werate: numeric failure: " << ex.what() << "\n";
      return 3;
    } catch (const NumericError& ex) {
      std::cerr << "werate: numeric failure: " << ex.what() << "\n";
      return 3;
    } catch (const std::exception& ex) {
      std::cerr << "werate: " << ex.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace werate::cli
