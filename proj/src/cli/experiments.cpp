#include "sinit/cli/experiments.hpp"

#include <algorithm>
#include <string>

#include "json.hpp"
#include "sinit/cli/io.hpp"
#include "sinit/diagnostics.hpp"
#include "sinit/error.hpp"
#include "sinit/stats.hpp"
#include "sinit/training.hpp"

namespace sinit::cli {

namespace {

using nlohmann::ordered_json;

std::string name_of(InitTag tag) { return std::string(to_string(tag)); }

std::vector<InitTag> schemes_of(const Config& cfg, const std::string& key) {
  std::vector<InitTag> out;
  for (const auto& name : cfg.list(key)) out.push_back(parse_init_tag(name));
  return out;
}

Rng stream(const ExperimentConfig& config, std::string_view label) {
  return Rng(config.seed()).child(label);
}

struct Writer {
  const ExperimentConfig& config;
  RunResult result;

  std::filesystem::path path(const std::string& name) const { return config.output_dir / name; }

  void csv(const std::string& name, const CsvTable& table) {
    write_csv(path(name), table);
    result.files.push_back(path(name));
  }
  void pgm(const std::string& name, const GrayImage& image) {
    write_pgm(path(name), image);
    result.files.push_back(path(name));
  }
  void matrix(const std::string& name, const Matrix& m) {
    write_matrix_csv(path(name), m);
    result.files.push_back(path(name));
  }
  void json(const std::string& name, const ordered_json& j) {
    write_text(path(name), j.dump(2) + "\n");
    result.files.push_back(path(name));
  }
};

InputSampler experiment_sampler(const Config& cfg) {
  return distribution_sampler(parse_input_distribution(cfg.text("input")),
                              cfg.count("input_dim"));
}

std::size_t checked_layer(const Config& cfg, const MlpSpec& spec) {
  const std::size_t layer = cfg.count("layer");
  require(layer < spec.linear_layers(), Errc::config,
          "layer " + std::to_string(layer) + " out of range for a network with " +
              std::to_string(spec.linear_layers()) + " linear layers");
  return layer;
}

std::string count_text(std::size_t x) { return std::to_string(x); }

}  // namespace

InitScheme scheme_from_config(InitTag tag, const Config& cfg) {
  InitScheme s = InitScheme::of(tag);
  s.gain = cfg.real("gain");
  s.std = cfg.real("std");
  s.lo = cfg.real("lo");
  s.hi = cfg.real("hi");
  s.cutoff = cfg.real("cutoff");
  s.lsuv_tol = cfg.real("lsuv_tol");
  s.lsuv_max_iters = cfg.count("lsuv_max_iters");
  validate(s);
  return s;
}

MlpSpec experiment_mlp(const Config& cfg, const InitScheme& scheme) {
  std::vector<std::size_t> sizes = {cfg.count("input_dim")};
  for (std::size_t w : cfg.count_list("widths")) sizes.push_back(w);
  MlpSpec spec = make_mlp_spec(std::move(sizes), Activation::relu, scheme, true);
  spec.probe_distribution = parse_input_distribution(cfg.text("input"));
  spec.lsuv_probe_size = cfg.count("lsuv_probe_size");
  validate(spec);
  return spec;
}

RunResult run(const ExperimentConfig& config) {
  using Runner = RunResult (*)(const ExperimentConfig&);
  static const std::pair<const char*, Runner> table[] = {
      {"init-dump", run_init_dump},
      {"skew-table", run_skew_table},
      {"activation-map", run_activation_map},
      {"threshold-mc", run_threshold_mc},
      {"depth-propagation", run_depth_propagation},
      {"train-bench", run_train_bench},
      {"oui", run_oui},
  };
  for (const auto& [name, runner] : table) {
    if (config.subcommand != name) continue;
    Writer w{config, {}};
    ordered_json sidecar;
    sidecar["subcommand"] = config.subcommand;
    sidecar["config"] = config.values.to_json();
    w.json("config.resolved.json", sidecar);
    RunResult r = runner(config);
    w.result.files.insert(w.result.files.end(), r.files.begin(), r.files.end());
    return w.result;
  }
  fail(Errc::config, "unknown subcommand '" + config.subcommand + "'");
}

RunResult run_init_dump(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const InitTag tag = parse_init_tag(cfg.text("scheme"));
  const InitScheme scheme = scheme_from_config(tag, cfg);
  const LayerShape shape{.fan_in = cfg.count("n"), .fan_out = cfg.count("m")};
  validate(shape);
  Rng rng = stream(config, "init");

  ordered_json meta;
  meta["scheme"] = name_of(tag);
  meta["m"] = shape.fan_out;
  meta["n"] = shape.fan_in;
  meta["seed"] = config.seed();

  Matrix weights;
  meta["a"] = nullptr;
  switch (tag) {
    case InitTag::sinusoidal: {
      SinusoidalLayer layer = sinusoidal_layer(shape.fan_out, shape.fan_in);
      meta["a"] = layer.amplitude;
      meta["unit_variance"] = layer.unit_variance;
      meta["degenerate_rows"] = layer.degenerate_rows;
      weights = std::move(layer.weights);
      break;
    }
    case InitTag::arcsine_random:
      meta["a"] = arcsine_random_amplitude(shape);
      weights = arcsine_random_matrix(shape, rng);
      break;
    case InitTag::lsuv: {
      Rng probe_rng = rng.child("lsuv-probe");
      const Matrix probe = sample_inputs(parse_input_distribution(cfg.text("input")), probe_rng,
                                         cfg.count("lsuv_probe_size"), shape.fan_in);
      LsuvResult adjusted = lsuv_adjust(orthogonal_matrix(shape, rng, scheme.gain), probe,
                                        scheme.lsuv_tol, scheme.lsuv_max_iters);
      meta["lsuv_iterations"] = adjusted.iterations;
      meta["lsuv_output_variance"] = adjusted.achieved_variance;
      weights = std::move(adjusted.weights);
      break;
    }
    default:
      weights = initialize(scheme, shape, rng);
  }
  const SummaryStats stats = population_stats(weights);
  meta["achieved_variance"] = stats.population_variance;
  meta["mean"] = stats.mean;
  meta["min"] = stats.min;
  meta["max"] = stats.max;

  Writer w{config, {}};
  w.matrix("weights.csv", weights);
  w.json("metadata.json", meta);
  return w.result;
}

RunResult run_skew_table(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const auto tags = schemes_of(cfg, "schemes");
  const auto alphas = cfg.real_list("alphas");
  const std::size_t mc = cfg.count("mc_samples");
  const InputSampler sampler = experiment_sampler(cfg);

  Writer w{config, {}};
  CsvTable table;
  table.header.push_back("alpha");
  for (InitTag t : tags) table.header.push_back(name_of(t));
  table.rows.assign(alphas.size(), {});
  for (std::size_t a = 0; a < alphas.size(); ++a) table.rows[a].push_back(format_short(alphas[a]));

  for (InitTag tag : tags) {
    const MlpSpec spec = experiment_mlp(cfg, scheme_from_config(tag, cfg));
    const std::size_t layer = checked_layer(cfg, spec);
    Rng model_rng = stream(config, "model");
    const MlpState model = build_mlp(spec, model_rng);
    const SkewTable result = skew_table(model, layer, sampler, alphas, mc, stream(config, "mc"));
    for (std::size_t a = 0; a < alphas.size(); ++a)
      table.rows[a].push_back(format_real(100.0 * result.skewed_fraction[a]));

    CsvTable report;
    report.header = {"neuron", "S", "p_positive"};
    for (double a : alphas) report.header.push_back("skewed@" + format_short(a));
    std::vector<SkewClassification> flags;
    for (double a : alphas) flags.push_back(classify_skewed(result.p_positive, a));
    for (std::size_t i = 0; i < result.s_values.size(); ++i) {
      std::vector<std::string> row = {count_text(i), format_real(result.s_values[i]),
                                      format_real(result.p_positive[i])};
      for (const auto& f : flags) row.push_back(count_text(f.is_skewed[i]));
      report.rows.push_back(std::move(row));
    }
    w.csv("skew_report_" + name_of(tag) + ".csv", report);
  }
  w.csv("skew_table.csv", table);
  return w.result;
}

RunResult run_activation_map(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const InputSampler sampler = experiment_sampler(cfg);
  Rng sample_rng = stream(config, "samples");
  const Matrix inputs = sampler.draw(sample_rng, cfg.count("samples"));

  Writer w{config, {}};
  for (InitTag tag : schemes_of(cfg, "schemes")) {
    const MlpSpec spec = experiment_mlp(cfg, scheme_from_config(tag, cfg));
    const std::size_t layer = checked_layer(cfg, spec);
    Rng model_rng = stream(config, "model");
    const MlpState model = build_mlp(spec, model_rng);
    const ForwardResult fwd = forward_capture(model, inputs);
    w.pgm("activation_" + name_of(tag) + ".pgm",
          activation_bitmap(fwd.trace, layer, cfg.count("sample_limit"),
                            cfg.count("neuron_limit")));
  }
  return w.result;
}

RunResult run_threshold_mc(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const std::string schedule = cfg.text("sigma_schedule");
  require(schedule == "constant" || schedule == "alternating", Errc::config,
          "sigma_schedule must be 'constant' or 'alternating'");

  CsvTable table;
  table.header = {"n",         "alpha",           "lambda",           "agreement",
                  "empirical_skewed", "predicted_skewed", "neurons", "mc_samples",
                  "sigma_schedule"};
  for (std::size_t n : cfg.count_list("n_grid")) {
    require(n >= 1, Errc::config, "n_grid entries must be >= 1");
    std::vector<double> scales;
    if (schedule == "alternating")
      scales = alternating_scales(n, cfg.real("sigma_low"), cfg.real("sigma_high"));
    for (double alpha : cfg.real_list("alphas")) {
      const ThresholdParams params{.n = n,
                                   .theta = std::sqrt(2.0 / static_cast<double>(n)),
                                   .mu = kRectifiedMean,
                                   .sigma = std::sqrt(kRectifiedVariance),
                                   .alpha = alpha};
      const Rng rng = stream(config, "n=" + std::to_string(n) + ",alpha=" + format_short(alpha));
      const ThresholdMcResult r = threshold_equivalence_mc(params, cfg.count("neurons"),
                                                           cfg.count("mc_samples"), rng, scales);
      table.rows.push_back({count_text(n), format_short(alpha), format_real(r.lambda),
                            format_real(r.agreement), format_real(r.empirical_skewed),
                            format_real(r.predicted_skewed), count_text(r.neurons),
                            count_text(r.mc_samples), schedule});
    }
  }
  Writer w{config, {}};
  w.csv("threshold_mc.csv", table);
  return w.result;
}

RunResult run_depth_propagation(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const auto widths = cfg.count_list("widths");
  auto names = cfg.list("layer_schemes");
  if (names.size() == 1) names.assign(widths.size(), names.front());
  require(names.size() == widths.size(), Errc::config,
          "layer_schemes needs one entry, or one per layer in widths");
  std::vector<InitScheme> schemes;
  for (const auto& n : names) schemes.push_back(scheme_from_config(parse_init_tag(n), cfg));

  MlpSpec spec = depth_spec(cfg.count("input_dim"), widths, schemes);
  spec.probe_distribution = parse_input_distribution(cfg.text("input"));
  spec.lsuv_probe_size = cfg.count("lsuv_probe_size");
  Rng model_rng = stream(config, "model");
  const MlpState model = build_mlp(spec, model_rng);
  const auto layers = depth_propagation(model, experiment_sampler(cfg), cfg.real("alpha"),
                                        cfg.count("mc_samples"), stream(config, "mc"));

  Writer w{config, {}};
  CsvTable summary;
  summary.header = {"layer", "scheme", "neurons", "skewed_fraction", "rank_correlation"};
  for (const auto& ls : layers) {
    const SHistogram h = s_histogram(ls.s_values, ls.is_skewed, cfg.count("bins"));
    CsvTable hist;
    hist.header = {"bin_lo", "bin_hi", "skewed", "non_skewed"};
    for (std::size_t b = 0; b < h.skewed.size(); ++b)
      hist.rows.push_back({format_real(h.edges[b]), format_real(h.edges[b + 1]),
                           count_text(h.skewed[b]), count_text(h.balanced[b])});
    w.csv("s_hist_layer" + std::to_string(ls.layer + 1) + ".csv", hist);
    summary.rows.push_back({count_text(ls.layer + 1), names[ls.layer],
                            count_text(ls.s_values.size()), format_real(ls.skewed_fraction),
                            format_real(ls.rank_correlation)});
  }
  w.csv("depth_summary.csv", summary);
  return w.result;
}

RunResult run_train_bench(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const std::size_t classes = cfg.count("classes");
  const std::size_t dim = cfg.count("dim");
  Rng data_rng(config.seed());
  const Dataset data =
      synthetic_blobs(classes, dim, cfg.count("samples"), cfg.real("spread"), data_rng);

  std::vector<std::size_t> sizes = {dim};
  for (std::size_t h : cfg.count_list("hidden")) sizes.push_back(h);
  sizes.push_back(classes);
  const Activation act = parse_activation(cfg.text("activation"));

  TrainConfig train_cfg;
  train_cfg.epochs = cfg.count("epochs");
  train_cfg.batch_size = cfg.count("batch_size");
  train_cfg.optimizer.lr = cfg.real("lr");
  train_cfg.optimizer.weight_decay = cfg.real("weight_decay");
  require(train_cfg.epochs >= 1, Errc::config, "train-bench needs epochs >= 1");

  Writer w{config, {}};
  CsvTable summary;
  summary.header = {"scheme", "optimizer", "seed", "acc@1", "acc@10", "max_acc", "auc"};
  for (InitTag tag : schemes_of(cfg, "schemes")) {
    const MlpSpec spec = make_mlp_spec(sizes, act, scheme_from_config(tag, cfg));
    for (const auto& opt_name : cfg.list("optimizers")) {
      train_cfg.optimizer.kind = parse_optimizer(opt_name);
      for (std::size_t seed : cfg.count_list("seeds")) {
        Rng rng(seed);
        const TrainRecord rec = train(spec, data, train_cfg, rng);

        CsvTable curve;
        curve.header = {"epoch", "loss", "val_accuracy"};
        for (std::size_t e = 0; e < rec.epochs(); ++e)
          curve.rows.push_back(
              {count_text(e + 1), format_real(rec.loss[e]), format_real(rec.val_accuracy[e])});
        w.csv("train_" + name_of(tag) + "_" + opt_name + "_seed" + count_text(seed) + ".csv",
              curve);

        const auto& acc = rec.val_accuracy;
        const double at10 = acc[std::min<std::size_t>(10, acc.size()) - 1];
        summary.rows.push_back({name_of(tag), opt_name, count_text(seed), format_real(acc[0]),
                                format_real(at10),
                                format_real(*std::max_element(acc.begin(), acc.end())),
                                format_real(auc(rec))});
      }
    }
  }
  w.csv("summary.csv", summary);
  return w.result;
}

RunResult run_oui(const ExperimentConfig& config) {
  const Config& cfg = config.values;
  const InputSampler sampler = experiment_sampler(cfg);
  Rng sample_rng = stream(config, "samples");
  const Matrix inputs = sampler.draw(sample_rng, cfg.count("samples"));

  CsvTable table;
  table.header = {"scheme", "layer", "samples", "neurons", "oui"};
  for (InitTag tag : schemes_of(cfg, "schemes")) {
    const MlpSpec spec = experiment_mlp(cfg, scheme_from_config(tag, cfg));
    const std::size_t layer = checked_layer(cfg, spec);
    Rng model_rng = stream(config, "model");
    const MlpState model = build_mlp(spec, model_rng);
    const ForwardResult fwd = forward_capture(model, inputs);
    const OuiReport r = oui(fwd.trace.states[layer], layer);
    table.rows.push_back({name_of(tag), count_text(r.layer), count_text(r.samples),
                          count_text(r.neurons), format_real(r.value)});
  }
  Writer w{config, {}};
  w.csv("oui.csv", table);
  return w.result;
}

}  // namespace sinit::cli
