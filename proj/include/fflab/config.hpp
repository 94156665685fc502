#pragma once

// Batch-run configuration: a small sectioned key/value file plus typed access
// to experiment parameters. The echoed form is canonical and re-parseable.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fflab {

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output;  // path prefix for CSV/JSON/SVG outputs
  bool assert_checks = false;
  std::map<std::string, std::string> params;

  bool operator==(const ExperimentConfig&) const = default;
};

// Parse or validation failure. line is 1-based; 0 when the error is not tied
// to a specific line of the input.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

extern const char* const kExperimentNames[11];
bool known_experiment(const std::string& name);

// File format: "[experiment]" section with keys name/seed/threads/output/
// assert, then "[params]" with experiment-specific keys. '#' starts a
// full-line comment. Unknown sections, unknown [experiment] keys, duplicate
// keys and malformed lines raise ConfigError with the line number.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical text form; parse_config_text(echo_config(c)) == c.
std::string echo_config(const ExperimentConfig& c);

// Scalar parsers shared by the config layer and CLI overrides.
std::uint64_t parse_u64(const std::string& s, int line, const char* what);
std::int64_t parse_i64(const std::string& s, int line, const char* what);
double parse_real(const std::string& s, int line, const char* what);
bool parse_bool(const std::string& s, int line, const char* what);
// Decimal or the literal "inf".
double parse_zeta(const std::string& s, int line, const char* what);

// Typed view of config.params for one experiment. Construction rejects keys
// outside the allowed set; accessors without a fallback require the key.
class ParamReader {
 public:
  ParamReader(const ExperimentConfig& config, std::vector<std::string> allowed);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  double real(const std::string& key) const;
  double real_or(const std::string& key, double fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  double zeta(const std::string& key) const;
  double zeta_or(const std::string& key, double fallback) const;
  // Comma-separated lists, e.g. "16,32,64".
  std::vector<std::int64_t> int_list(const std::string& key) const;
  std::vector<std::int64_t> int_list_or(const std::string& key,
                                        std::vector<std::int64_t> fallback) const;
  std::vector<double> real_list(const std::string& key) const;
  std::vector<double> real_list_or(const std::string& key,
                                   std::vector<double> fallback) const;

 private:
  const std::string& require(const std::string& key) const;
  const ExperimentConfig* config_;
};

}  // namespace fflab
