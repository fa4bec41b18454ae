#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kvwave/common.hpp"

namespace kvwave::cli {

using Json = nlohmann::json;

/// Malformed configuration: unknown kind, missing or invalid field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tol = 0.0;
};

struct RunResult {
  std::vector<Check> checks;
  Json summary;
  std::vector<std::filesystem::path> files;  ///< everything written, in order

  [[nodiscard]] bool passed() const;
  /// 0 when every check passes, 2 otherwise.
  [[nodiscard]] int exit_code() const { return passed() ? 0 : 2; }
};

const std::vector<std::string>& experiment_kinds();

Json load_config(const std::filesystem::path& path);

/// Applies `key.path=value`; the value is parsed as JSON when possible and
/// kept as a string otherwise. Intermediate objects are created as needed.
void apply_override(Json& config, const std::string& assignment);

/// Runs one experiment and writes summary.json plus the kind's CSV and SVG
/// files into `out_dir`. Configuration problems raise ConfigError.
RunResult run_experiment(const std::string& kind, const Json& config, const std::filesystem::path& out_dir,
                         unsigned jobs = 1);

}  // namespace kvwave::cli
