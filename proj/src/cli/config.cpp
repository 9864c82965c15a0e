#include "sinit/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sinit/error.hpp"

namespace sinit::cli {

namespace {

enum class Kind { text, u64, count, real, text_list, count_list, real_list };

struct KeySpec {
  const char* key;
  Kind kind;
  const char* default_value;
};

// Scheme parameters shared by every subcommand that builds weights.
constexpr KeySpec kSchemeKeys[] = {
    {"gain", Kind::real, "1"},
    {"std", Kind::real, "0.01"},
    {"lo", Kind::real, "-0.05"},
    {"hi", Kind::real, "0.05"},
    {"cutoff", Kind::real, "2"},
    {"lsuv_tol", Kind::real, "0.01"},
    {"lsuv_max_iters", Kind::count, "10"},
    {"lsuv_probe_size", Kind::count, "256"},
};

// The MLP used by the activation-statistics experiments.
constexpr KeySpec kMlpKeys[] = {
    {"input_dim", Kind::count, "784"},
    {"widths", Kind::count_list, "512,512,512"},
    {"input", Kind::text, "normal"},
};

struct Subcommand {
  const char* name;
  std::vector<KeySpec> keys;
  bool scheme_keys;
  bool mlp_keys;
};

const std::vector<Subcommand>& registry() {
  static const std::vector<Subcommand> table = {
      {"init-dump",
       {{"scheme", Kind::text, "sinusoidal"},
        {"m", Kind::count, "8"},
        {"n", Kind::count, "64"},
        {"input", Kind::text, "normal"}},
       true,
       false},
      {"skew-table",
       {{"schemes", Kind::text_list, "glorot_normal,he_normal,orthogonal,lsuv,sinusoidal"},
        {"layer", Kind::count, "0"},
        {"alphas", Kind::real_list, "0.1,0.3"},
        {"mc_samples", Kind::count, "20000"}},
       true,
       true},
      {"activation-map",
       {{"schemes", Kind::text_list, "glorot_normal,he_normal,orthogonal,lsuv,sinusoidal"},
        {"layer", Kind::count, "2"},
        {"samples", Kind::count, "768"},
        {"sample_limit", Kind::count, "250"},
        {"neuron_limit", Kind::count, "250"}},
       true,
       true},
      {"threshold-mc",
       {{"n_grid", Kind::count_list, "16,64,256,1024"},
        {"alphas", Kind::real_list, "0.3"},
        {"neurons", Kind::count, "2000"},
        {"mc_samples", Kind::count, "20000"},
        {"sigma_schedule", Kind::text, "constant"},
        {"sigma_low", Kind::real, "0.5"},
        {"sigma_high", Kind::real, "1.5"}},
       false,
       false},
      {"depth-propagation",
       {{"input_dim", Kind::count, "784"},
        {"widths", Kind::count_list, "512,512,512,512"},
        {"input", Kind::text, "normal"},
        {"layer_schemes", Kind::text_list, "glorot_normal"},
        {"alpha", Kind::real, "0.3"},
        {"mc_samples", Kind::count, "20000"},
        {"bins", Kind::count, "30"}},
       true,
       false},
      {"train-bench",
       {{"schemes", Kind::text_list, "sinusoidal,he_normal"},
        {"optimizers", Kind::text_list, "adamw"},
        {"seeds", Kind::count_list, "1,2,3,4,5"},
        {"classes", Kind::count, "10"},
        {"dim", Kind::count, "64"},
        {"samples", Kind::count, "10000"},
        {"spread", Kind::real, "1.5"},
        {"hidden", Kind::count_list, "256,256"},
        {"activation", Kind::text, "relu"},
        {"epochs", Kind::count, "40"},
        {"batch_size", Kind::count, "64"},
        {"lr", Kind::real, "0.001"},
        {"weight_decay", Kind::real, "0.001"}},
       true,
       false},
      {"oui",
       {{"schemes", Kind::text_list, "glorot_normal,he_normal,orthogonal,lsuv,sinusoidal"},
        {"layer", Kind::count, "2"},
        {"samples", Kind::count, "768"}},
       true,
       true},
  };
  return table;
}

const Subcommand& find_subcommand(const std::string& name) {
  for (const auto& s : registry())
    if (name == s.name) return s;
  fail(Errc::config, "unknown subcommand '" + name + "'");
}

std::vector<KeySpec> keys_of(const Subcommand& sub) {
  std::vector<KeySpec> keys = {{"seed", Kind::u64, "0"}};
  keys.push_back({"output_dir", Kind::text, ""});
  if (sub.mlp_keys)
    for (const auto& k : kMlpKeys) keys.push_back(k);
  if (sub.scheme_keys)
    for (const auto& k : kSchemeKeys) keys.push_back(k);
  keys.insert(keys.end(), sub.keys.begin(), sub.keys.end());
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  require(ec == std::errc{} && ptr == end, Errc::config,
          "config key '" + key + "': '" + value + "' is not a non-negative integer");
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double out = std::strtod(value.c_str(), &end);
  require(!value.empty() && end == value.c_str() + value.size() && std::isfinite(out),
          Errc::config, "config key '" + key + "': '" + value + "' is not a finite number");
  return out;
}

void check_kind(const KeySpec& spec, const Config& cfg) {
  const std::string key = spec.key;
  switch (spec.kind) {
    case Kind::text:
      return;
    case Kind::u64:
      (void)cfg.u64(key);
      return;
    case Kind::count:
      (void)cfg.count(key);
      return;
    case Kind::real:
      (void)cfg.real(key);
      return;
    case Kind::text_list:
      require(!cfg.list(key).empty(), Errc::config, "config key '" + key + "' must not be empty");
      return;
    case Kind::count_list:
      require(!cfg.count_list(key).empty(), Errc::config,
              "config key '" + key + "' must not be empty");
      return;
    case Kind::real_list:
      require(!cfg.real_list(key).empty(), Errc::config,
              "config key '" + key + "' must not be empty");
      return;
  }
}

}  // namespace

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    require(eq != std::string::npos, Errc::config, where + ": expected key = value");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    require(!key.empty(), Errc::config, where + ": empty key");
    require(!cfg.has(key), Errc::config, where + ": duplicate key '" + key + "'");
    cfg.set(key, trim(std::string_view(content).substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::io, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void Config::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

const std::string& Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  require(it != values_.end(), Errc::config, "missing config key '" + key + "'");
  return it->second;
}

std::uint64_t Config::u64(const std::string& key) const {
  return parse_integer<std::uint64_t>(key, text(key));
}

std::size_t Config::count(const std::string& key) const {
  return parse_integer<std::size_t>(key, text(key));
}

double Config::real(const std::string& key) const { return parse_real(key, text(key)); }

std::vector<std::string> Config::list(const std::string& key) const {
  return split_list(text(key));
}

std::vector<std::size_t> Config::count_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : list(key)) out.push_back(parse_integer<std::size_t>(key, item));
  return out;
}

std::vector<double> Config::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) out.push_back(parse_real(key, item));
  return out;
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

std::vector<std::string> subcommands() {
  std::vector<std::string> out;
  for (const auto& s : registry()) out.emplace_back(s.name);
  return out;
}

Config defaults_for(const std::string& subcommand) {
  const Subcommand& sub = find_subcommand(subcommand);
  Config cfg;
  for (const auto& k : keys_of(sub)) cfg.set(k.key, k.default_value);
  cfg.set("output_dir", "out/" + subcommand);
  return cfg;
}

ExperimentConfig resolve_config(const std::string& subcommand,
                                const std::optional<std::filesystem::path>& config_file,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
  const Subcommand& sub = find_subcommand(subcommand);
  ExperimentConfig out;
  out.subcommand = subcommand;
  out.values = defaults_for(subcommand);

  auto apply = [&](const std::string& key, const std::string& value, const std::string& source) {
    require(out.values.has(key), Errc::config,
            "unknown key '" + key + "' for " + subcommand + " (from " + source + ")");
    out.values.set(key, value);
  };
  if (config_file) {
    const Config file = Config::load(*config_file);
    for (const auto& [k, v] : file.entries()) apply(k, v, config_file->string());
  }
  for (const auto& [k, v] : overrides) apply(k, v, "--" + k);

  for (const auto& k : keys_of(sub)) check_kind(k, out.values);

  std::filesystem::path dir = out.values.text("output_dir");
  require(!dir.empty(), Errc::config, "output_dir must not be empty");
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && dir.is_relative())
    dir = std::filesystem::path(root) / dir;
  out.output_dir = dir;
  return out;
}

}  // namespace sinit::cli
