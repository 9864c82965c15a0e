#include "sinit/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sinit/error.hpp"

namespace sinit {

namespace {

std::size_t digits_needed(std::size_t classes) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < classes) ++d;
  return d;
}

std::size_t lattice_base(std::size_t classes, std::size_t digits) {
  if (digits == 0) return 1;
  std::size_t base = 2;
  for (;;) {
    std::size_t reach = 1;
    for (std::size_t k = 0; k < digits && reach < classes; ++k) reach *= base;
    if (reach >= classes) return base;
    ++base;
  }
}

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), src.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto from = src.row(rows[r]);
    std::copy(from.begin(), from.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

Matrix blob_means(std::size_t classes, std::size_t dim) {
  require(classes >= 1 && dim >= 1, Errc::invalid_parameter,
          "blob_means: classes and dim must be >= 1");
  const std::size_t digits = std::min(dim, digits_needed(classes));
  const std::size_t base = lattice_base(classes, digits);
  const double centre = 0.5 * static_cast<double>(base - 1);
  Matrix means(classes, dim);
  if (digits == 0) return means;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> coords(digits);
    std::size_t rest = c;
    for (std::size_t k = 0; k < digits; ++k) {
      coords[k] = static_cast<double>(rest % base) - centre;
      rest /= base;
    }
    for (std::size_t j = 0; j < dim; ++j) means(c, j) = coords[j % digits];
  }
  return means;
}

double min_mean_separation(std::size_t classes, std::size_t dim) {
  const Matrix means = blob_means(classes, dim);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < classes; ++a)
    for (std::size_t b = a + 1; b < classes; ++b) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = means(a, j) - means(b, j);
        d2 += d * d;
      }
      best = std::min(best, std::sqrt(d2));
    }
  return best;
}

Dataset synthetic_blobs(std::size_t classes, std::size_t dim, std::size_t samples, double spread,
                        Rng& rng) {
  require(classes >= 1 && dim >= 1 && samples >= 1, Errc::invalid_parameter,
          "synthetic_blobs: counts must be >= 1");
  require(std::isfinite(spread) && spread >= 0.0, Errc::invalid_parameter,
          "synthetic_blobs: spread must be non-negative");
  const Matrix means = blob_means(classes, dim);

  Rng noise = rng.child("noise");
  Matrix x(samples, dim);
  std::vector<std::size_t> y(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    y[s] = s % classes;
    auto row = x.row(s);
    const auto mean = means.row(y[s]);
    for (std::size_t j = 0; j < dim; ++j) row[j] = mean[j] + spread * noise.normal();
  }

  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split = rng.child("split");
  shuffle(order, split);
  const std::size_t n_train = (samples * 4) / 5;

  Dataset data;
  data.classes = classes;
  const std::span<const std::size_t> all(order);
  data.train_x = gather_rows(x, all.first(n_train));
  data.val_x = gather_rows(x, all.subspan(n_train));
  for (std::size_t i = 0; i < n_train; ++i) data.train_y.push_back(y[order[i]]);
  for (std::size_t i = n_train; i < samples; ++i) data.val_y.push_back(y[order[i]]);
  return data;
}

std::vector<std::size_t> predict(const MlpState& state, const Matrix& inputs) {
  const Matrix logits = forward(state, inputs);
  std::vector<std::size_t> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(const MlpState& state, const Matrix& inputs, std::span<const std::size_t> labels) {
  require(labels.size() == inputs.rows(), Errc::shape_mismatch,
          "accuracy: label count does not match input rows");
  if (labels.empty()) return 0.0;
  const auto pred = predict(state, inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

TrainRecord train_state(MlpState& state, const Dataset& data, const TrainConfig& config,
                        Rng& rng) {
  validate(config.optimizer);
  require(data.train_x.rows() >= 1, Errc::empty_input, "train: empty training split");
  require(data.train_y.size() == data.train_x.rows() && data.val_y.size() == data.val_x.rows(),
          Errc::shape_mismatch, "train: labels do not match samples");
  require(config.batch_size >= 1, Errc::invalid_parameter, "train: batch size must be >= 1");

  TrainRecord record;
  record.initial_accuracy = accuracy(state, data.val_x, data.val_y);

  const std::size_t n = data.train_x.rows();
  std::vector<std::size_t> order(n);
  Rng shuffles = rng.child("shuffle");
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng epoch_rng = shuffles.child(static_cast<std::uint64_t>(epoch));
    shuffle(order, epoch_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const Matrix batch = gather_rows(data.train_x, idx);
      std::vector<std::size_t> labels(count);
      for (std::size_t i = 0; i < count; ++i) labels[i] = data.train_y[idx[i]];
      const Gradients grads = backward(state, batch, labels);
      loss_sum += grads.loss * static_cast<double>(count);
      optimizer_step(state, grads, config.optimizer);
    }
    record.loss.push_back(loss_sum / static_cast<double>(n));
    record.val_accuracy.push_back(accuracy(state, data.val_x, data.val_y));
  }
  return record;
}

TrainRecord train(const MlpSpec& spec, const Dataset& data, const TrainConfig& config, Rng& rng) {
  require(data.train_x.rows() >= 1, Errc::empty_input, "train: empty training split");
  Rng init = rng.child("init");
  MlpState state = build_mlp(spec, init);
  return train_state(state, data, config, rng);
}

double auc(const TrainRecord& record) {
  require(!record.val_accuracy.empty(), Errc::empty_input, "auc: empty training record");
  const auto& acc = record.val_accuracy;
  double area = 0.0;
  for (std::size_t e = 1; e < acc.size(); ++e) area += 0.5 * (acc[e - 1] + acc[e]);
  return area;
}

}  // namespace sinit
