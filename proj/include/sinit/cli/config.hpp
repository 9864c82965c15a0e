#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sinit::cli {

/// Flat key=value configuration. Lines are `key = value`; `#` starts a
/// comment; blank lines are ignored. Keys are unique: a repeated key in one
/// file is an error.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<text>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }

  [[nodiscard]] const std::string& text(const std::string& key) const;
  [[nodiscard]] std::uint64_t u64(const std::string& key) const;
  [[nodiscard]] std::size_t count(const std::string& key) const;
  [[nodiscard]] double real(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> list(const std::string& key) const;
  [[nodiscard]] std::vector<std::size_t> count_list(const std::string& key) const;
  [[nodiscard]] std::vector<double> real_list(const std::string& key) const;

  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }
  [[nodiscard]] nlohmann::ordered_json to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

/// A subcommand's configuration after defaults, the config file and flag
/// overrides have been applied, in that order.
struct ExperimentConfig {
  std::string subcommand;
  Config values;
  /// Where outputs go: output_dir, placed under $SINIT_OUTPUT_ROOT when that
  /// is set and output_dir is relative.
  std::filesystem::path output_dir;

  [[nodiscard]] std::uint64_t seed() const { return values.u64("seed"); }
};

std::vector<std::string> subcommands();

/// Default values for `subcommand`; also the set of keys it accepts.
Config defaults_for(const std::string& subcommand);

/// Throws Errc::config for an unknown subcommand, an unknown key, or a value
/// that does not parse as the type the subcommand expects.
ExperimentConfig resolve_config(const std::string& subcommand,
                                const std::optional<std::filesystem::path>& config_file,
                                const std::vector<std::pair<std::string, std::string>>& overrides);

inline constexpr const char* kOutputRootEnv = "SINIT_OUTPUT_ROOT";

}  // namespace sinit::cli
