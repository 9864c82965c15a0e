#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sinit/error.hpp"
#include "sinit/initializers.hpp"
#include "sinit/network.hpp"
#include "sinit/stats.hpp"

using namespace sinit;

namespace {

template <typename F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected sinit::Error");
  return Errc::io;
}

double variance(const Matrix& m) { return population_stats(m).population_variance; }

double arcsine_cdf(double x, double a) {
  const double t = std::clamp(x / a, -1.0, 1.0);
  return 0.5 + std::asin(t) / std::numbers::pi;
}

struct CapturedWarnings {
  std::vector<Warning> seen;
  WarningHandler previous;
  CapturedWarnings() {
    previous = set_warning_handler([this](const Warning& w) { seen.push_back(w); });
  }
  ~CapturedWarnings() { set_warning_handler(previous); }
};

}  // namespace

TEST_CASE("sinusoidal 1x4 by hand") {
  const SinusoidalLayer layer = sinusoidal_layer(1, 4);
  CHECK(layer.unit_variance == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(layer.amplitude - std::sqrt(0.8)) <= 1e-12);
  const double a = std::sqrt(0.8);
  const std::vector<double> expected = {a, 0.0, -a, 0.0};
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(layer.weights(0, j) - expected[j]) <= 1e-12);
}

TEST_CASE("sinusoidal rows cancel and variance is 2/(m+n)") {
  const std::vector<std::pair<std::size_t, std::size_t>> grid = {
      {8, 64}, {64, 64}, {127, 256}, {768, 768}, {100, 101}, {3, 5}, {300, 7}};
  for (auto [m, n] : grid) {
    CAPTURE(m);
    CAPTURE(n);
    const SinusoidalLayer layer = sinusoidal_layer(m, n);
    const double a = layer.amplitude;
    for (std::size_t i = 1; i <= m; ++i) {
      if (i % n == 0) continue;
      double s = 0.0;
      for (double w : layer.weights.row(i - 1)) s += w;
      REQUIRE(std::abs(s) <= 1e-9 * static_cast<double>(n) * a);
    }
    const double target = 2.0 / static_cast<double>(m + n);
    CHECK(std::abs(variance(layer.weights) - target) <= 1e-12 * target);
  }
}

TEST_CASE("sinusoidal degenerate rows are reported and warned about") {
  {
    CapturedWarnings captured;
    const SinusoidalLayer layer = sinusoidal_layer(8, 64);
    CHECK(layer.degenerate_rows.empty());
    CHECK(captured.seen.empty());
  }
  {
    CapturedWarnings captured;
    const SinusoidalLayer layer = sinusoidal_layer(10, 4);
    CHECK(layer.degenerate_rows == std::vector<std::size_t>{4, 8});
    REQUIRE(captured.seen.size() == 1);
    CHECK(captured.seen[0].code == "sinusoidal_degenerate_rows");
    // Row i = n is the constant a·sin(2πi/m).
    for (double w : layer.weights.row(3))
      CHECK(w == doctest::Approx(layer.amplitude * std::sin(2.0 * std::numbers::pi * 4.0 / 10.0)));
  }
  CHECK(error_code([] { (void)sinusoidal_layer(1, 1); }) == Errc::degenerate_spec);
  CHECK(error_code([] { (void)sinusoidal_layer(0, 4); }) == Errc::invalid_parameter);
}

TEST_CASE("sinusoidal entries follow the arcsine law") {
  const SinusoidalLayer layer = sinusoidal_layer(256, 257);
  std::vector<double> v(layer.weights.values().begin(), layer.weights.values().end());
  std::sort(v.begin(), v.end());
  const double a = layer.amplitude;
  CHECK(ks_statistic(v, [a](double x) { return arcsine_cdf(x, a); }) <= 0.05);
}

TEST_CASE("sinusoidal is deterministic") {
  CHECK(sinusoidal_matrix(33, 17) == sinusoidal_matrix(33, 17));
  Rng r1(1), r2(2);
  CHECK(initialize(InitScheme::of(InitTag::sinusoidal), {17, 33}, r1) ==
        initialize(InitScheme::of(InitTag::sinusoidal), {17, 33}, r2));
  CHECK(is_deterministic(InitTag::sinusoidal));
  CHECK_FALSE(is_deterministic(InitTag::he_normal));
}

TEST_CASE("compute_amplitude") {
  CHECK(std::abs(compute_amplitude(1, 4, 0.5) - 0.894427190999916) <= 1e-12);
  CHECK(compute_amplitude(10, 10, 2.0 / 20.0) == doctest::Approx(1.0));
  CHECK(compute_amplitude(3, 5, 0.25) == doctest::Approx(1.0));
  CHECK(error_code([] { (void)compute_amplitude(3, 5, 0.0); }) == Errc::degenerate_spec);
  CHECK(error_code([] { (void)compute_amplitude(3, 5, -1.0); }) == Errc::degenerate_spec);
}

TEST_CASE("random_matrix variance rules") {
  Rng rng(3);
  CHECK(std::abs(variance(random_matrix(InitScheme::of(InitTag::glorot_normal), {100, 100}, rng)) -
                 0.01) <= 0.05 * 0.01);
  CHECK(std::abs(variance(random_matrix(InitScheme::of(InitTag::he_normal), {200, 100}, rng)) -
                 0.01) <= 0.05 * 0.01);

  const Matrix gu = random_matrix(InitScheme::of(InitTag::glorot_uniform), {300, 200}, rng);
  CHECK(std::abs(variance(gu) - 2.0 / 500.0) <= 0.05 * 2.0 / 500.0);
  CHECK(population_stats(gu).max <= std::sqrt(6.0 / 500.0));

  const Matrix hu = random_matrix(InitScheme::of(InitTag::he_uniform), {300, 200}, rng);
  CHECK(std::abs(variance(hu) - 2.0 / 300.0) <= 0.05 * 2.0 / 300.0);
  CHECK(population_stats(hu).max <= std::sqrt(6.0 / 300.0));

  InitScheme plain = InitScheme::of(InitTag::plain_uniform);
  plain.lo = 0.5;
  plain.hi = 0.5;
  CHECK(random_matrix(plain, {3, 2}, rng) == Matrix(2, 3, 0.5));

  InitScheme trunc = InitScheme::of(InitTag::truncated_normal);
  trunc.std = 0.1;
  const SummaryStats ts = population_stats(random_matrix(trunc, {200, 200}, rng));
  CHECK(ts.max <= 0.2);
  CHECK(ts.min >= -0.2);

  CHECK(error_code([] {
          Rng r(1);
          (void)random_matrix(InitScheme::of(InitTag::orthogonal), {4, 4}, r);
        }) == Errc::invalid_parameter);
  CHECK(error_code([] {
          Rng r(1);
          (void)random_matrix(InitScheme::of(InitTag::sinusoidal), {4, 4}, r);
        }) == Errc::invalid_parameter);
}

TEST_CASE("orthogonal_matrix") {
  Rng rng(4);
  const Matrix w = orthogonal_matrix({8, 4}, rng);
  REQUIRE(w.rows() == 4);
  REQUIRE(w.cols() == 8);
  CHECK(max_abs_diff(matmul_nt(w, w), identity(4)) <= 1e-9);

  Matrix four = identity(4);
  four *= 4.0;
  const Matrix g = orthogonal_matrix({8, 4}, rng, 2.0);
  CHECK(max_abs_diff(matmul_nt(g, g), four) <= 1e-9);

  const Matrix tall = orthogonal_matrix({3, 7}, rng);
  CHECK(max_abs_diff(matmul_tn(tall, tall), identity(3)) <= 1e-9);

  Rng r1(9), r2(9);
  CHECK(orthogonal_matrix({6, 5}, r1) == orthogonal_matrix({6, 5}, r2));
}

TEST_CASE("arcsine_random_matrix") {
  Rng rng(8);
  const Matrix w = arcsine_random_matrix({100, 100}, rng);
  CHECK(std::abs(variance(w) - 0.01) <= 0.05 * 0.01);
  CHECK(arcsine_random_amplitude({100, 100}) == doctest::Approx(std::sqrt(4.0 / 200.0)));

  const LayerShape shape{256, 257};
  Rng big(2);
  const Matrix r = arcsine_random_matrix(shape, big);
  std::vector<double> v(r.values().begin(), r.values().end());
  std::sort(v.begin(), v.end());
  const double a = arcsine_random_amplitude(shape);
  CHECK(ks_statistic(v, [a](double x) { return arcsine_cdf(x, a); }) <= 0.02);
}

TEST_CASE("lsuv_adjust") {
  Rng rng(10);
  const Matrix probe = sample_inputs(InputDistribution::standard_normal, rng, 512, 128);
  const Matrix start = orthogonal_matrix({128, 128}, rng, 3.0);
  const LsuvResult r = lsuv_adjust(start, probe, 0.01, 10);
  CHECK(r.achieved_variance >= 0.99);
  CHECK(r.achieved_variance <= 1.01);
  CHECK(r.iterations >= 1);
  CHECK(variance(matmul_nt(probe, r.weights)) == doctest::Approx(r.achieved_variance));

  const LsuvResult again = lsuv_adjust(r.weights, probe, 0.01, 10);
  CHECK(again.iterations == 0);
  CHECK(again.weights == r.weights);

  const LsuvResult frozen = lsuv_adjust(start, probe, 0.01, 0);
  CHECK(frozen.iterations == 0);
  CHECK(frozen.weights == start);
  CHECK(frozen.achieved_variance == doctest::Approx(variance(matmul_nt(probe, start))));

  CHECK(error_code([&] { (void)lsuv_adjust(Matrix(4, 128, 0.0), probe, 0.01, 10); }) ==
        Errc::degenerate_batch);
  CHECK(error_code([&] { (void)lsuv_adjust(Matrix(4, 3, 1.0), probe, 0.01, 10); }) ==
        Errc::shape_mismatch);
  CHECK(error_code([] {
          Rng r(1);
          (void)initialize(InitScheme::of(InitTag::lsuv), {4, 4}, r);
        }) == Errc::invalid_parameter);
}

TEST_CASE("flatten_conv_shape") {
  const LayerShape a = flatten_conv_shape(64, 3, 7, 7);
  CHECK(a.fan_out == 64);
  CHECK(a.fan_in == 147);
  const LayerShape b = flatten_conv_shape(32, 32, 1, 1);
  CHECK(b.fan_out == 32);
  CHECK(b.fan_in == 32);
  const LayerShape c = flatten_conv_shape(16, 8, 3, 3);
  CHECK(c.fan_out == 16);
  CHECK(c.fan_in == 72);
  CHECK(error_code([] { (void)flatten_conv_shape(0, 3, 3, 3); }) == Errc::invalid_parameter);
}

TEST_CASE("init tags round-trip through their names") {
  for (InitTag t : all_init_tags()) CHECK(parse_init_tag(to_string(t)) == t);
  CHECK(error_code([] { (void)parse_init_tag("xavier_magic"); }) == Errc::config);
}

TEST_CASE("stochastic schemes are reproducible per seed") {
  for (InitTag t : all_init_tags()) {
    if (t == InitTag::lsuv || is_deterministic(t)) continue;
    CAPTURE(to_string(t));
    Rng r1(5), r2(5), r3(6);
    const Matrix a = initialize(InitScheme::of(t), {20, 10}, r1);
    CHECK(a == initialize(InitScheme::of(t), {20, 10}, r2));
    CHECK_FALSE(a == initialize(InitScheme::of(t), {20, 10}, r3));
  }
}
