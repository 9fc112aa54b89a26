#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "linkfun.hpp"
#include "rng.hpp"

using statecal::Rng;

namespace {

// Regularized lower incomplete gamma P(a, x) by series / continued fraction
// (independent of the generator under test).
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  // Lentz continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - log_gamma_a) * h;
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

// 1% critical value of the KS statistic for large n.
double ks_critical_1pct(int n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST_CASE("identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42), d(43);
  int differ = 0;
  for (int i = 0; i < 64; ++i) differ += c.next_u64() != d.next_u64();
  CHECK(differ > 60);
}

TEST_CASE("substreams are reproducible and mutually distinct") {
  Rng a = Rng::for_stream(7, 0);
  Rng b = Rng::for_stream(7, 0);
  Rng c = Rng::for_stream(7, 1);
  bool same_ab = true, same_ac = true;
  for (int i = 0; i < 256; ++i) {
    const std::uint64_t va = a.next_u64();
    same_ab &= va == b.next_u64();
    same_ac &= va == c.next_u64();
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
}

TEST_CASE("uniform lies in the open unit interval with the right mean") {
  Rng rng(1);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);

  Rng r2(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = r2.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v <= 3.0);
  }
}

TEST_CASE("normal draws pass a KS test against the normal CDF") {
  Rng rng(11);
  std::vector<double> xs(20000);
  for (double& x : xs) x = rng.normal();
  const double d =
      ks_statistic(xs, [](double x) { return statecal::linkfun::norm_cdf(x); });
  CHECK(d < ks_critical_1pct(static_cast<int>(xs.size())));
}

TEST_CASE("gamma draws pass a KS test for several shapes") {
  struct Case {
    double shape, rate;
  };
  for (const Case c : {Case{5.0, 5.0}, Case{0.5, 2.0}, Case{12.5, 7.0}}) {
    CAPTURE(c.shape);
    Rng rng(101 + static_cast<std::uint64_t>(c.shape * 8));
    std::vector<double> xs(10000);
    for (double& x : xs) {
      x = rng.gamma(c.shape, c.rate);
      CHECK(x > 0.0);
    }
    const double d = ks_statistic(
        xs, [&](double x) { return gamma_p(c.shape, c.rate * x); });
    CHECK(d < ks_critical_1pct(static_cast<int>(xs.size())));
  }
}

TEST_CASE("gamma moments match shape/rate within Monte Carlo error") {
  Rng rng(77);
  const double shape = 12.5, rate = 5.0;
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gamma(shape, rate);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double true_mean = shape / rate;
  const double true_var = shape / (rate * rate);
  CHECK(std::abs(mean - true_mean) < 3.0 * std::sqrt(true_var / n));
  // var(x^2)-based bound, generous by a factor of ~2.
  CHECK(std::abs(var - true_var) < 6.0 * true_var / std::sqrt(double(n)));
}

TEST_CASE("beta_one matches its closed-form CDF") {
  Rng rng(31);
  const double b = 0.2;
  std::vector<double> xs(10000);
  for (double& x : xs) {
    x = rng.beta_one(b);
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  const double d = ks_statistic(
      xs, [&](double x) { return 1.0 - std::pow(1.0 - x, b); });
  CHECK(d < ks_critical_1pct(static_cast<int>(xs.size())));
}
