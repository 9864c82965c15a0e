#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "sinit/error.hpp"
#include "sinit/initializers.hpp"
#include "sinit/linalg.hpp"
#include "sinit/matrix.hpp"
#include "sinit/rng.hpp"
#include "sinit/sampling.hpp"
#include "sinit/special.hpp"
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

double sample_variance(const Matrix& m) { return population_stats(m).population_variance; }

// Composite Simpson rule.
template <typename F>
double integrate(F f, double lo, double hi, int intervals = 20000) {
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int k = 1; k < intervals; ++k) acc += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double bisect_quantile(double p) {
  if (p > 0.5) return -bisect_quantile(1.0 - p);
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("rng is reproducible and children are independent streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  const Rng root(7);
  CHECK(root.child(1).seed() == Rng(7).child(1).seed());
  CHECK(root.child(1).seed() != root.child(2).seed());
  CHECK(root.child("model").seed() == root.child(fnv1a("model")).seed());
  CHECK(root.child("model").seed() != root.child("mc").seed());
  CHECK(Rng(8).child(1).seed() != root.child(1).seed());

  Rng c = root.child(3), d = root.child(4);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += c.next_u64() == d.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("rng uniform, below and normal") {
  Rng rng(123);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform_open_low();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);

  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("sample_normal") {
  Rng rng(42);
  const Matrix m = sample_normal(rng, 0.0, 1.0, {1, 1000000});
  const SummaryStats s = population_stats(m);
  CHECK(std::abs(s.mean) <= 0.01);
  CHECK(std::abs(s.population_variance - 1.0) <= 0.01);

  Rng any(3);
  CHECK(sample_normal(any, 0.0, 0.0, {3, 3}) == Matrix(3, 3, 0.0));

  Rng r1(7), r2(7);
  CHECK(sample_normal(r1, 0.0, 1.0, {5, 6}) == sample_normal(r2, 0.0, 1.0, {5, 6}));

  CHECK(error_code([] {
          Rng r(1);
          (void)sample_normal(r, 0.0, -1.0, {2, 2});
        }) == Errc::invalid_parameter);
}

TEST_CASE("sample_uniform") {
  Rng rng(1);
  const SummaryStats s = population_stats(sample_uniform(rng, -1.0, 1.0, {1, 1000000}));
  CHECK(std::abs(s.mean) <= 0.005);
  CHECK(std::abs(s.population_variance - 1.0 / 3.0) <= 0.01);
  CHECK(s.min >= -1.0);
  CHECK(s.max < 1.0);

  CHECK(sample_uniform(rng, 2.5, 2.5, {2, 3}) == Matrix(2, 3, 2.5));

  Rng r1(9), r2(9);
  CHECK(sample_uniform(r1, -3.0, 1.0, {4, 4}) == sample_uniform(r2, -3.0, 1.0, {4, 4}));

  CHECK(error_code([] {
          Rng r(1);
          (void)sample_uniform(r, 1.0, -1.0, {2, 2});
        }) == Errc::invalid_parameter);
}

TEST_CASE("sample_truncated_normal against the integrated variance") {
  const double mass = normal_cdf(2.0) - normal_cdf(-2.0);
  const double oracle =
      integrate([](double x) { return x * x * normal_pdf(x); }, -2.0, 2.0) / mass;
  CHECK(oracle == doctest::Approx(0.7737).epsilon(1e-4));

  Rng rng(5);
  const Matrix m = sample_truncated_normal(rng, 1.0, 2.0, {1, 1000000});
  const SummaryStats s = population_stats(m);
  CHECK(s.min >= -2.0);
  CHECK(s.max <= 2.0);
  CHECK(std::abs(s.population_variance - oracle) <= 0.01);

  Rng wide(6);
  CHECK(std::abs(sample_variance(sample_truncated_normal(wide, 1.0, 1e6, {1, 200000})) - 1.0) <=
        0.01);
}

TEST_CASE("population_stats") {
  const SummaryStats s = population_stats(Matrix::from_rows({{1, -1}, {1, -1}}));
  CHECK(s.mean == 0.0);
  CHECK(s.population_variance == 1.0);
  CHECK(s.count == 4);

  const SummaryStats c = population_stats(Matrix::from_rows({{3.25}}));
  CHECK(c.mean == 3.25);
  CHECK(c.population_variance == 0.0);

  const SinusoidalLayer layer = sinusoidal_layer(8, 64);
  Matrix unit = layer.weights;
  unit *= 1.0 / layer.amplitude;
  CHECK(std::abs(population_stats(unit).mean) <= 1e-12);

  CHECK(error_code([] { (void)population_stats(std::span<const double>{}); }) ==
        Errc::invalid_parameter);
}

TEST_CASE("normal_cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));
  for (double x : {0.1, 0.5, 1.0, 2.5, 4.0, 7.5}) CHECK(std::abs(normal_cdf(-x) - (1.0 - normal_cdf(x))) <= 1e-12);

  const double integrated = 0.5 + integrate(normal_pdf, 0.0, 1.959964);
  CHECK(std::abs(integrated - normal_cdf(1.959964)) <= 1e-10);

  CHECK(error_code([] { (void)normal_cdf(std::nan("")); }) == Errc::domain);
}

TEST_CASE("normal_quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(normal_quantile(0.8) - 0.841621) <= 1e-5);
  CHECK(std::abs(normal_quantile(0.975) - 1.959964) <= 1e-5);

  for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.65, 0.8, 0.975, 0.999, 1.0 - 1e-9})
    CHECK(std::abs(normal_quantile(p) - bisect_quantile(p)) <= 1e-9);

  for (double p : {0.0, 1.0, -0.1, 1.5})
    CHECK(error_code([p] { (void)normal_quantile(p); }) == Errc::domain);
}

TEST_CASE("qr_orthonormal") {
  Rng rng(11);
  const Matrix q = qr_orthonormal(rng, 4, 4);
  CHECK(max_abs_diff(matmul_tn(q, q), identity(4)) <= 1e-10);

  const Matrix tall = qr_orthonormal(rng, 8, 4);
  CHECK(tall.rows() == 8);
  CHECK(tall.cols() == 4);
  CHECK(max_abs_diff(matmul_tn(tall, tall), identity(4)) <= 1e-10);

  Rng r1(5), r2(5);
  CHECK(qr_orthonormal(r1, 6, 3) == qr_orthonormal(r2, 6, 3));
}

TEST_CASE("ks_statistic") {
  const std::size_t n = 1000;
  std::vector<double> exact(n);
  for (std::size_t i = 0; i < n; ++i) exact[i] = (static_cast<double>(i) + 0.5) / n;
  CHECK(ks_statistic(exact, [](double x) { return x; }) == doctest::Approx(0.5 / n));

  Rng rng(17);
  std::vector<double> u(100000);
  for (double& x : u) x = rng.uniform();
  std::sort(u.begin(), u.end());
  CHECK(ks_statistic(u, [](double x) { return x; }) <= 0.006);

  const std::vector<double> zeros(50, 0.0);
  CHECK(ks_statistic(zeros, [](double x) { return normal_cdf(x); }) == doctest::Approx(0.5));

  CHECK(error_code([] { (void)ks_statistic({}, [](double x) { return x; }); }) ==
        Errc::invalid_parameter);
}

TEST_CASE("ks_two_sample, ranks and spearman") {
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2}, {5, 6}) == 1.0);

  const std::vector<double> v = {10, 30, 20, 20};
  const std::vector<double> r = ranks(v);
  CHECK(r == std::vector<double>{1.0, 4.0, 2.5, 2.5});

  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 4, 8, 16, 32};
  const std::vector<double> z = {5, 4, 3, 2, 1};
  CHECK(spearman(x, y) == doctest::Approx(1.0));
  CHECK(spearman(x, z) == doctest::Approx(-1.0));
  const std::vector<double> flat(5, 1.0);
  CHECK(spearman(x, flat) == 0.0);
}

TEST_CASE("matrix products match a hand multiply") {
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Matrix b = Matrix::from_rows({{7, 8}, {9, 10}, {11, 12}});
  CHECK(matmul(a, b) == Matrix::from_rows({{58, 64}, {139, 154}}));
  CHECK(matmul_nt(a, b.transposed()) == matmul(a, b));
  CHECK(matmul_tn(a.transposed(), b) == matmul(a, b));

  CHECK(error_code([&] { (void)matmul(a, a); }) == Errc::shape_mismatch);
  CHECK(error_code([] { (void)Matrix(2, 2, std::vector<double>{1, 2, 3}); }) ==
        Errc::shape_mismatch);
  CHECK(error_code([] { (void)Matrix(1, 1, std::vector<double>{INFINITY}); }) ==
        Errc::invalid_parameter);
}
