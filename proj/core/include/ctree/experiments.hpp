#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctree/limits.hpp"

namespace ctree::lab {

// Flat key-value settings of one experiment. Every key has a default; setting
// an unknown key or reading a malformed value throws Error(ConfigError).
class Settings {
 public:
  Settings() = default;
  explicit Settings(std::vector<std::pair<std::string, std::string>> defaults);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // integer >= 1
  std::vector<double> reals(const std::string& key) const;  // comma separated
  // The master seed. Throws ConfigError when none was given.
  std::uint64_t seed() const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Applies "key = value" lines; blank lines and lines starting with # are skipped.
void apply_config_text(Settings& settings, std::string_view text);

struct Outcome {
  limits::CheckReport report;
  std::vector<std::string> notes;  // diagnostics for humans, one line each
  std::string table;               // CSV data table, may be empty
};

struct Experiment {
  std::string command;  // codings | gw | limits | crt | gh | snake
  std::string name;
  std::string verifies;  // the statement checked, named in words
  int criterion = 0;     // acceptance criterion number, 0 for data exports
  bool stochastic = true;
  std::vector<std::pair<std::string, std::string>> defaults;
  std::function<Outcome(const Settings&)> run;

  Settings settings() const;
};

const std::vector<Experiment>& catalog();
// nullptr when there is no such experiment.
const Experiment* find_experiment(std::string_view command, std::string_view name);
const Experiment* find_criterion(int criterion);

// Report, settings and notes as one JSON document.
std::string outcome_json(const Experiment& e, const Settings& s, const Outcome& o);
// The data table if there is one, otherwise one row per report part.
std::string outcome_csv(const Outcome& o);

}  // namespace ctree::lab
