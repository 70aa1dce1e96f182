#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "werate/cli_runner.hpp"

namespace werate::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ValidationError("key '" + key + "': '" + token + "' is not a number");
  }
  if (used != token.size()) throw ValidationError("key '" + key + "': '" + token + "' is not a number");
  return v;
}

std::vector<double> parse_row(const std::string& key, const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(key, tok));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_number(v[i]);
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

Config Config::parse(std::string_view text) {
  Config c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    if (c.raw_.count(key)) throw ValidationError("config key '" + key + "' given twice");
    c.raw_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const std::string* Config::find(const std::string& key) {
  const auto it = raw_.find(key);
  return it == raw_.end() ? nullptr : &it->second;
}

void Config::resolve(const std::string& key, std::string canonical_value) {
  resolved_[key] = std::move(canonical_value);
}

std::string Config::get_string(const std::string& key, const std::optional<std::string>& fallback) {
  const std::string* v = find(key);
  if (!v && !fallback) throw ValidationError("missing required key '" + key + "'");
  std::string out = v ? *v : *fallback;
  resolve(key, out);
  return out;
}

std::string Config::get_choice(const std::string& key, const std::vector<std::string>& choices,
                               const std::optional<std::string>& fallback) {
  const std::string v = get_string(key, fallback);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : "|") + c;
    throw ValidationError("key '" + key + "' must be one of " + list + ", got '" + v + "'");
  }
  return v;
}

double Config::get_double(const std::string& key, std::optional<double> fallback) {
  const std::string* v = find(key);
  if (!v && !fallback) throw ValidationError("missing required key '" + key + "'");
  const double out = v ? parse_double(key, *v) : *fallback;
  resolve(key, format_number(out));
  return out;
}

long long Config::get_int(const std::string& key, std::optional<long long> fallback) {
  const std::string* v = find(key);
  if (!v && !fallback) throw ValidationError("missing required key '" + key + "'");
  long long out = 0;
  if (v) {
    const double d = parse_double(key, *v);
    if (d != std::floor(d) || std::abs(d) > 9.0e15)
      throw ValidationError("key '" + key + "' must be an integer");
    out = static_cast<long long>(d);
  } else {
    out = *fallback;
  }
  resolve(key, std::to_string(out));
  return out;
}

bool Config::get_bool(const std::string& key, std::optional<bool> fallback) {
  const std::string* v = find(key);
  if (!v && !fallback) throw ValidationError("missing required key '" + key + "'");
  bool out = fallback.value_or(false);
  if (v) {
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else throw ValidationError("key '" + key + "' must be true or false");
  }
  resolve(key, out ? "true" : "false");
  return out;
}

std::vector<double> Config::get_vector(const std::string& key,
                                       const std::optional<std::vector<double>>& fallback) {
  const std::string* v = find(key);
  if (!v && !fallback) throw ValidationError("missing required key '" + key + "'");
  std::vector<double> out = v ? parse_row(key, *v) : *fallback;
  if (v && out.empty()) throw ValidationError("key '" + key + "' is empty");
  resolve(key, join(out));
  return out;
}

Matrix Config::get_matrix(const std::string& key) {
  const std::string* v = find(key);
  if (!v) throw ValidationError("missing required key '" + key + "'");
  std::vector<std::vector<double>> rows;
  std::istringstream in(*v);
  std::string row;
  while (std::getline(in, row, ';')) {
    if (trim(row).empty()) continue;
    rows.push_back(parse_row(key, row));
  }
  if (rows.empty()) throw ValidationError("key '" + key + "' is empty");
  const std::size_t cols = rows.front().size();
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  std::string canon;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ValidationError("key '" + key + "': rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) M(i, j) = rows[i][j];
    canon += (i ? "; " : "") + join(rows[i]);
  }
  resolve(key, canon);
  return M;
}

void Config::reject_unknown() const {
  std::string unknown;
  for (const auto& [k, v] : raw_)
    if (!resolved_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw ValidationError("unknown config keys: " + unknown);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : resolved_) out += k + "=" + v + "\n";
  return out;
}

std::string GlobalOptions::canonical() const {
  std::string out = "seed=" + std::to_string(seed) + "\n";
  out += std::string("format=") + (format == Format::Json ? "json" : format == Format::Csv ? "csv" : "both") + "\n";
  out += std::string("log-base=") + (log_base == LogBase::Natural ? "nat" : "bits") + "\n";
  return out;
}

std::string CsvTable::render() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + quote(header[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(row[i]);
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("SHA-256 digest failed");
  std::ostringstream o;
  for (unsigned int i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return o.str();
}

}  // namespace werate::cli
