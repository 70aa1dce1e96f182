#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "werate/markov_engine.hpp"
#include "werate/model_core.hpp"

namespace werate::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";

/// Flat `key = value` document. `#` starts a comment; matrices use `;`
/// between rows and whitespace or commas between entries.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::optional<std::string>& fallback = {});
  std::string get_choice(const std::string& key, const std::vector<std::string>& choices,
                         const std::optional<std::string>& fallback = {});
  double get_double(const std::string& key, std::optional<double> fallback = {});
  long long get_int(const std::string& key, std::optional<long long> fallback = {});
  bool get_bool(const std::string& key, std::optional<bool> fallback = {});
  std::vector<double> get_vector(const std::string& key,
                                 const std::optional<std::vector<double>>& fallback = {});
  Matrix get_matrix(const std::string& key);

  /// Throws ValidationError naming every key that no getter consumed.
  void reject_unknown() const;

  /// Canonical `key=value` lines of every resolved field (defaults included), sorted by key.
  std::string canonical() const;

 private:
  const std::string* find(const std::string& key);
  void resolve(const std::string& key, std::string canonical_value);

  std::map<std::string, std::string> raw_;
  std::map<std::string, std::string> resolved_;
};

enum class Format { Json, Csv, Both };

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out = "werate_out";
  Format format = Format::Json;
  LogBase log_base = LogBase::Natural;
  int threads = 1;

  std::string canonical() const;
};

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

struct CommandResult {
  Json report;
  std::vector<CsvTable> tables;
};

/// Number with 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

CommandResult cmd_iid(Config& config, const GlobalOptions& options);
CommandResult cmd_markov(Config& config, const GlobalOptions& options);
CommandResult cmd_gaussian(Config& config, const GlobalOptions& options);
CommandResult cmd_pressure(Config& config, const GlobalOptions& options);
CommandResult cmd_simulate(Config& config, const GlobalOptions& options);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Entry point of the command line tool; returns the process exit code.
int run(int argc, char** argv);

}  // namespace werate::cli
