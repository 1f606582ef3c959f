#pragma once

// Flat key=value run configuration. Values are resolved in three layers:
// per-dataset defaults, then a config file, then command-line overrides.
// The resolved map is written next to every run's outputs and can be fed
// back through --config to replay the run.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hql/analysis.hpp"
#include "hql/circuits.hpp"
#include "hql/dataset.hpp"
#include "hql/multiclass.hpp"

namespace hql::cfg {

using KeyValues = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment, blank lines are
/// skipped. Throws ConfigError on malformed lines or duplicate keys.
KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

class RunConfig {
 public:
  /// Defaults for every documented key, given the overrides that select the
  /// dataset and architecture. Unknown override keys throw ConfigError.
  static RunConfig resolve(const KeyValues& overrides);

  const KeyValues& values() const { return values_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// Comma-separated list; empty text gives an empty list.
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  data::DatasetName dataset() const;
  pqc::ArchId arch() const;
  pqc::CircuitTemplate circuit() const;
  data::ColumnCrop crop() const;
  std::filesystem::path data_dir() const { return text("data_dir"); }
  std::filesystem::path out_dir() const { return text("out"); }
  int threads() const;

  mc::TaskConfig task() const;
  analysis::LandscapeConfig landscape() const;
  analysis::RobustnessConfig robustness() const;
  analysis::TimingInputs timing() const;

  /// Sorted "key=value" lines.
  std::string to_text() const;

 private:
  KeyValues values_;
};

/// Every documented key with a one-line description, in display order.
const std::vector<std::pair<std::string, std::string>>& documented_keys();

}  // namespace hql::cfg
