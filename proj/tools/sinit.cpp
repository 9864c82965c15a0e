// sinit <subcommand> [--config FILE] [--key=value | --key value ...]

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sinit/cli/config.hpp"
#include "sinit/cli/experiments.hpp"
#include "sinit/error.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

int report_error(std::string_view code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return 2;
}

const std::map<std::string, std::string> kDescriptions = {
    {"init-dump", "Write one initialized weight matrix and its statistics"},
    {"skew-table", "Percentage of skewed neurons per scheme and alpha"},
    {"activation-map", "Binary activation map per scheme as PGM"},
    {"threshold-mc", "Monte Carlo check of the row-sum threshold rule"},
    {"depth-propagation", "Row-sum histograms and skew rank correlation by layer"},
    {"train-bench", "Train a small MLP per scheme, optimizer and seed"},
    {"oui", "Output uniformity index per scheme"},
};

std::string key_listing(const std::string& subcommand) {
  std::string out = "Keys (set in the config file or with --key=value):\n";
  const sinit::cli::Config defaults = sinit::cli::defaults_for(subcommand);
  for (const auto& [key, value] : defaults.entries())
    out += "  " + key + " = " + value + "\n";
  return out;
}

Overrides parse_overrides(const std::vector<std::string>& args) {
  Overrides out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    sinit::require(arg.size() > 2 && arg.starts_with("--"), sinit::Errc::config,
                   "unexpected argument '" + arg + "'");
    if (const auto eq = arg.find('='); eq != std::string::npos) {
      out.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } else {
      sinit::require(i + 1 < args.size(), sinit::Errc::config, "missing value for " + arg);
      out.emplace_back(arg.substr(2), args[++i]);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weight-initialization experiments"};
  app.require_subcommand(1);

  std::string config_file;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : sinit::cli::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->allow_extras();
    sub->add_option("--config", config_file, "key=value config file");
    sub->footer(key_listing(name));
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      std::optional<std::filesystem::path> file;
      if (!config_file.empty()) file = config_file;
      const auto config =
          sinit::cli::resolve_config(name, file, parse_overrides(sub->remaining()));
      for (const auto& path : sinit::cli::run(config).files) std::cout << path.string() << '\n';
    }
  } catch (const sinit::Error& e) {
    return report_error(sinit::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
