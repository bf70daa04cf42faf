#include <cmath>
#include <vector>

#include "doctest.h"
#include "kgibbs/rng.hpp"
#include "kgibbs/stats.hpp"

using namespace kgibbs;

TEST_CASE("mean and line fits") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanEstimate m = mean_estimate(v);
  CHECK(m.mean == 2.5);
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto [slope, intercept] = fit_line(x, y);
  CHECK(slope == doctest::Approx(2.0));
  CHECK(intercept == doctest::Approx(1.0));
}

TEST_CASE("Kolmogorov survival function") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  // reference values of the asymptotic distribution
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(2e-3));
  CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098).epsilon(5e-3));
}

TEST_CASE("two-sample test edge cases") {
  const std::vector<double> a{0.1, 0.4, 0.7, 0.2};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p_value == 1.0);
  const std::vector<double> b{2.1, 2.5, 2.9};
  CHECK(ks_two_sample(a, b).statistic == 1.0);
  const std::vector<double> empty;
  CHECK_THROWS(ks_two_sample(empty, a));
}

TEST_CASE("two-sample null calibration") {
  RngStream rng(11, 0);
  int below = 0;
  std::vector<double> a(10000), b(10000);
  for (int rep = 0; rep < 200; ++rep) {
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = rng.uniform();
    if (ks_two_sample(a, b).p_value < 0.05) ++below;
  }
  const double fraction = below / 200.0;
  CHECK(fraction >= 0.02);
  CHECK(fraction <= 0.09);
}

TEST_CASE("one-sample test") {
  RngStream rng(12, 0);
  std::vector<double> z(5000);
  for (auto& x : z) x = rng.normal();
  CHECK(ks_one_sample(z, [](double x) { return normal_cdf(x); }).p_value > 0.01);
  CHECK(ks_one_sample(z, [](double x) { return normal_cdf(x, 0.2); }).p_value < 1e-6);
  CHECK(normal_cdf(0.0) == 0.5);
}
