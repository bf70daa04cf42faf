#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kgibbs/errors.hpp"
#include "kgibbs/random_field.hpp"

using namespace kgibbs;

TEST_CASE("random streams are reproducible and separated") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 5; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
  }
  CHECK(RngStream(42, 7).substream(3).normal() == RngStream(42, 7).substream(3).normal());
  CHECK(RngStream(42, 7).substream(3).normal() != RngStream(42, 7).substream(4).normal());
}

TEST_CASE("increment moments") {
  const FrequencyGrid g(4, 1);
  RngStream rng(1, 0);
  std::vector<double> power, real_part, cross;
  for (int i = 0; i < 12500; ++i) {  // 8 modes per table: 1e5 increments
    const IncrementTable t = sample_increments(g, rng);
    for (Eigen::Index j = 0; j < t.increments.size(); ++j) {
      power.push_back(std::norm(t.increments[j]));
      real_part.push_back(t.increments[j].real());
    }
    cross.push_back((std::conj(t.increments[0]) * t.increments[1]).real());
  }
  const MeanEstimate p = mean_estimate(power);
  CHECK(std::abs(p.mean - 0.25) < 3 * p.std_error);
  const MeanEstimate m = mean_estimate(real_part);
  CHECK(std::abs(m.mean) < 3 * m.std_error);
  const MeanEstimate c = mean_estimate(cross);
  CHECK(std::abs(c.mean) < 3 * c.std_error);
}

TEST_CASE("bridge refinement") {
  const FrequencyGrid coarse(4, 2), fine(32, 2);
  RngStream rng(2, 0);
  const IncrementTable base = sample_increments(coarse, rng);

  CHECK(refine_increments(base, coarse, rng).increments == base.increments);

  const IncrementTable refined = refine_increments(base, fine, rng);
  const IncrementTable back = aggregate_increments(refined, coarse);
  CHECK((back.increments - base.increments).cwiseAbs().maxCoeff() < 1e-12 * base.increments.cwiseAbs().maxCoeff() + 1e-15);

  CHECK_THROWS_AS(refine_increments(refined, coarse, rng), PreconditionError);
  CHECK_THROWS_AS(refine_increments(base, FrequencyGrid(32, 3), rng), PreconditionError);

  SUBCASE("refined increments keep the unconditional variance") {
    std::vector<double> power;
    for (int i = 0; i < 2000; ++i) {
      const IncrementTable r = refine_increments(sample_increments(coarse, rng), fine, rng);
      for (Eigen::Index j = 0; j < r.increments.size(); ++j) power.push_back(std::norm(r.increments[j]));
    }
    const MeanEstimate p = mean_estimate(power);
    CHECK(std::abs(p.mean - 1.0 / 32.0) < 3 * p.std_error);
  }
}

TEST_CASE("phi coefficients") {
  const FrequencyGrid g(2, 2);
  RngStream rng(3, 0);
  const IncrementTable t = sample_increments(g, rng);
  const SpectralField phi = build_phi(t);
  CHECK(phi.mode(0) == t.at(0));

  std::vector<double> a2;
  std::vector<double> at_zero, at_edge;
  for (int i = 0; i < 20000; ++i) {
    const SpectralField f = build_phi(sample_increments(g, rng));
    a2.push_back(std::norm(f.mode(2)));
    const Eigen::VectorXcd s = synthesize(f);
    at_zero.push_back(std::norm(s[g.collocation_size() / 2]));
    at_edge.push_back(std::norm(s[3]));
  }
  const MeanEstimate e = mean_estimate(a2);
  CHECK(std::abs(e.mean - 0.25) < 3 * e.std_error);
  // stationarity: the same variance everywhere on the grid
  const MeanEstimate z = mean_estimate(at_zero), w = mean_estimate(at_edge);
  const double pv = pointwise_variance(g);
  CHECK(std::abs(z.mean - pv) < 3 * z.std_error);
  CHECK(std::abs(w.mean - pv) < 3 * w.std_error);
}

TEST_CASE("pointwise variance sums") {
  CHECK(pointwise_variance(FrequencyGrid(1, 1)) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(std::abs(pointwise_variance(FrequencyGrid(1 << 10, 1)) - std::numbers::pi / 2) < 2e-3);
  CHECK(std::abs(pointwise_variance(FrequencyGrid(1 << 10, 1 << 10)) - std::numbers::pi) < 5e-3);
}

TEST_CASE("direct evaluation matches synthesis") {
  const FrequencyGrid g(4, 3);
  RngStream rng(4, 0);
  const SpectralField u = build_phi(sample_increments(g, rng));
  const Eigen::VectorXcd s = synthesize(u);
  for (Eigen::Index m : {0, 17, 95}) CHECK(std::abs(evaluate_at(u, g.point(m)) - s[m]) < 1e-12);
}

TEST_CASE("coupled refinement distance") {
  const std::vector<int> levels{2, 3, 4, 5};
  const RngStream rng(5, 0);
  CHECK_THROWS_AS(cauchy_rate(levels, 6, 1, 0.0, 99, rng), PreconditionError);
  CHECK_THROWS_AS(cauchy_rate(levels, 4, 1, 0.0, 200, rng), PreconditionError);

  const std::vector<int> with_top{2, 3, 6};
  const CauchyRateReport rep = cauchy_rate(with_top, 6, 1, 0.5, 400, rng);
  CHECK(rep.rms.back() == 0.0);

  SUBCASE("Monte Carlo matches the exact coupled variance") {
    const CauchyRateReport r = cauchy_rate(levels, 7, 1, 1.0, 4000, rng);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double exact = std::sqrt(cauchy_rate_exact_variance(levels[i], 7, 1, 1.0));
      CHECK(std::abs(r.rms[i] - exact) < 4 * r.std_error[i]);
    }
  }

  SUBCASE("exact variance: frozen values") {
    // Independent oracle: E|sum_i (c_i - c_{l(i)}) delta_i|^2 with
    // c_i = (1 + (i/2^n)^2)^{-1/2} e^{i i x / 2^n}, summed here in long double.
    auto oracle = [](int m, int n, int cutoff, double x) {
      const long double nf = std::ldexp(1.0L, n), nc = std::ldexp(1.0L, m);
      long double sum = 0;
      for (long long i = -(1LL << n) * cutoff; i < (1LL << n) * cutoff; ++i) {
        const long long l = static_cast<long long>(std::floor(static_cast<long double>(i) / (1LL << (n - m))));
        const long double fi = i / nf, fl = l / nc;
        const long double ai = 1 / std::sqrt(1 + fi * fi), al = 1 / std::sqrt(1 + fl * fl);
        const long double re = ai * std::cos(fi * x) - al * std::cos(fl * x);
        const long double im = ai * std::sin(fi * x) - al * std::sin(fl * x);
        sum += re * re + im * im;
      }
      return static_cast<double>(sum / nf);
    };
    for (int m : {2, 4}) {
      CHECK(cauchy_rate_exact_variance(m, 8, 2, 0.0) == doctest::Approx(oracle(m, 8, 2, 0.0)).epsilon(1e-12));
      CHECK(cauchy_rate_exact_variance(m, 8, 2, 4.0) == doctest::Approx(oracle(m, 8, 2, 4.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("window mass profile") {
  const std::vector<double> radii{0.0, 1.0, 2.0, 4.0};
  const MassProfile p = l2_mass_profile(3, radii, 3000, RngStream(6, 0));
  CHECK(p.mean[0] == 0.0);
  for (std::size_t i = 1; i < radii.size(); ++i) {
    CHECK(std::abs(p.mean[i] - 2.0 * radii[i] * p.pointwise_variance) < 3 * p.std_error[i]);
  }
  const std::vector<double> too_wide{100.0};
  CHECK_THROWS_AS(l2_mass_profile(3, too_wide, 10, RngStream(6, 0)), PreconditionError);
}
