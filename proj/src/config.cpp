#include "fflab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace fflab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

[[noreturn]] void fail(int line, const std::string& msg) { throw ConfigError(line, msg); }

}  // namespace

ConfigError::ConfigError(int line, const std::string& msg)
    : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + msg
                                  : "config: " + msg),
      line_(line) {}

const char* const kExperimentNames[11] = {
    "perc-event", "char-length", "arm-exponent",    "cone-arm-exponent",
    "origin-burn", "long-path",  "fire-depth",      "cone-count",
    "bounded-cluster", "scaling-check", "snapshot"};

bool known_experiment(const std::string& name) {
  for (const char* e : kExperimentNames)
    if (name == e) return true;
  return false;
}

std::uint64_t parse_u64(const std::string& s, int line, const char* what) {
  std::uint64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) fail(line, std::string(what) + ": expected unsigned integer, got '" + s + "'");
  return v;
}

std::int64_t parse_i64(const std::string& s, int line, const char* what) {
  std::int64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) fail(line, std::string(what) + ": expected integer, got '" + s + "'");
  return v;
}

double parse_real(const std::string& s, int line, const char* what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v))
    fail(line, std::string(what) + ": expected number, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, int line, const char* what) {
  if (s == "true") return true;
  if (s == "false") return false;
  fail(line, std::string(what) + ": expected true or false, got '" + s + "'");
}

double parse_zeta(const std::string& s, int line, const char* what) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  const double z = parse_real(s, line, what);
  if (!(z > 0.0)) fail(line, std::string(what) + ": must be positive or 'inf'");
  return z;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  c.output.clear();
  enum class Section { None, Experiment, Params } section = Section::None;
  bool saw_experiment = false, saw_params = false;
  bool saw_name = false, saw_seed = false, saw_threads = false, saw_output = false,
       saw_assert = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (name == "experiment") {
        if (saw_experiment) fail(line, "duplicate [experiment] section");
        saw_experiment = true;
        section = Section::Experiment;
      } else if (name == "params") {
        if (saw_params) fail(line, "duplicate [params] section");
        saw_params = true;
        section = Section::Params;
      } else {
        fail(line, "unknown section '" + name + "'");
      }
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!valid_key(key)) fail(line, "invalid key '" + key + "'");
    switch (section) {
      case Section::None:
        fail(line, "key outside any section");
      case Section::Experiment:
        if (key == "name") {
          if (saw_name) fail(line, "duplicate key 'name'");
          saw_name = true;
          if (!known_experiment(value)) fail(line, "unknown experiment '" + value + "'");
          c.experiment = value;
        } else if (key == "seed") {
          if (saw_seed) fail(line, "duplicate key 'seed'");
          saw_seed = true;
          c.seed = parse_u64(value, line, "seed");
        } else if (key == "threads") {
          if (saw_threads) fail(line, "duplicate key 'threads'");
          saw_threads = true;
          const std::int64_t t = parse_i64(value, line, "threads");
          if (t < 1 || t > 4096) fail(line, "threads: out of range");
          c.threads = static_cast<int>(t);
        } else if (key == "output") {
          if (saw_output) fail(line, "duplicate key 'output'");
          saw_output = true;
          c.output = value;
        } else if (key == "assert") {
          if (saw_assert) fail(line, "duplicate key 'assert'");
          saw_assert = true;
          c.assert_checks = parse_bool(value, line, "assert");
        } else {
          fail(line, "unknown [experiment] key '" + key + "'");
        }
        break;
      case Section::Params:
        if (c.params.count(key) != 0) fail(line, "duplicate parameter '" + key + "'");
        c.params.emplace(key, value);
        break;
    }
  }
  if (!saw_experiment) fail(0, "missing [experiment] section");
  if (!saw_name) fail(0, "missing experiment name");
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) fail(0, "cannot open '" + path + "'");
  std::string text;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  std::fclose(f);
  return parse_config_text(text);
}

std::string echo_config(const ExperimentConfig& c) {
  std::string out;
  out += "[experiment]\n";
  out += "name = " + c.experiment + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += "threads = " + std::to_string(c.threads) + "\n";
  out += "output = " + c.output + "\n";
  out += std::string("assert = ") + (c.assert_checks ? "true" : "false") + "\n";
  out += "\n[params]\n";
  for (const auto& [k, v] : c.params) out += k + " = " + v + "\n";
  return out;
}

ParamReader::ParamReader(const ExperimentConfig& config, std::vector<std::string> allowed)
    : config_(&config) {
  for (const auto& [k, v] : config.params)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      fail(0, "unknown parameter '" + k + "' for experiment '" + config.experiment + "'");
}

bool ParamReader::has(const std::string& key) const { return config_->params.count(key) != 0; }

const std::string& ParamReader::require(const std::string& key) const {
  auto it = config_->params.find(key);
  if (it == config_->params.end())
    fail(0, "experiment '" + config_->experiment + "' requires parameter '" + key + "'");
  return it->second;
}

std::string ParamReader::str(const std::string& key) const { return require(key); }

std::string ParamReader::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? config_->params.at(key) : fallback;
}

std::int64_t ParamReader::integer(const std::string& key) const {
  return parse_i64(require(key), 0, key.c_str());
}

std::int64_t ParamReader::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

double ParamReader::real(const std::string& key) const {
  return parse_real(require(key), 0, key.c_str());
}

double ParamReader::real_or(const std::string& key, double fallback) const {
  return has(key) ? real(key) : fallback;
}

bool ParamReader::flag_or(const std::string& key, bool fallback) const {
  return has(key) ? parse_bool(config_->params.at(key), 0, key.c_str()) : fallback;
}

double ParamReader::zeta(const std::string& key) const {
  return parse_zeta(require(key), 0, key.c_str());
}

double ParamReader::zeta_or(const std::string& key, double fallback) const {
  return has(key) ? zeta(key) : fallback;
}

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

}  // namespace

std::vector<std::int64_t> ParamReader::int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const std::string& part : split_csv(require(key)))
    out.push_back(parse_i64(part, 0, key.c_str()));
  if (out.empty()) fail(0, key + ": empty list");
  return out;
}

std::vector<std::int64_t> ParamReader::int_list_or(const std::string& key,
                                                   std::vector<std::int64_t> fallback) const {
  return has(key) ? int_list(key) : std::move(fallback);
}

std::vector<double> ParamReader::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& part : split_csv(require(key)))
    out.push_back(parse_real(part, 0, key.c_str()));
  if (out.empty()) fail(0, key + ": empty list");
  return out;
}

std::vector<double> ParamReader::real_list_or(const std::string& key,
                                              std::vector<double> fallback) const {
  return has(key) ? real_list(key) : std::move(fallback);
}

}  // namespace fflab
