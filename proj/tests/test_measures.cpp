#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kgibbs/errors.hpp"
#include "kgibbs/measures.hpp"
#include "kgibbs/random_field.hpp"

using namespace kgibbs;

namespace {
const WeightFunction unit_box = WeightFunction::indicator({{-1.0, 1.0}});
}

TEST_CASE("measure spec lattice") {
  const MeasureSpec s(3, unit_box);
  CHECK(s.density() == 8);
  CHECK(s.cutoff() == 3);
  CHECK(s.grid().mode_count() == 48);
  CHECK(s.cell() == doctest::Approx(2.0 * std::numbers::pi * 8 / 192));
  CHECK_THROWS_AS(MeasureSpec(0, unit_box), PreconditionError);
}

TEST_CASE("Gaussian measure sampling") {
  const MeasureSpec s(3, unit_box);
  const RngStream rng(1, 0);
  std::vector<double> p8, hc, direct_u0, phi_u0;
  for (int i = 0; i < 20000; ++i) {
    RngStream a = rng.substream(i);
    const SpectralField u = sample_mu_k(s, a);
    p8.push_back(std::norm(u.mode(8)));
    const Eigen::VectorXd lambda = bessel_multiplier<double>(s.grid(), 2.0);
    hc.push_back(s.density() * lambda.dot(u.coeffs().cwiseAbs2()));
    direct_u0.push_back(std::abs(u.mode(0)));
    RngStream b = rng.substream(100000 + i);
    phi_u0.push_back(std::abs(build_phi(sample_increments(s.grid(), b)).mode(0)));
  }
  const MeanEstimate m8 = mean_estimate(p8);
  CHECK(std::abs(m8.mean - 1.0 / 16.0) < 3 * m8.std_error);
  const MeanEstimate mh = mean_estimate(hc);
  CHECK(std::abs(mh.mean - 48.0) < 3 * mh.std_error);
  CHECK(ks_two_sample(direct_u0, phi_u0).p_value >= 0.01);
}

TEST_CASE("Gibbs weight") {
  const MeasureSpec s(2, unit_box);
  CHECK(gibbs_weight(SpectralField(s.grid()), s) == 1.0);

  RngStream rng(2, 0);
  const SpectralField u = sample_mu_k(s, rng);
  CHECK(gibbs_weight(u, s.with_weight(WeightFunction::zero())) == 1.0);
  const double w = gibbs_weight(u, s);
  CHECK(w > 0.0);
  CHECK(w <= 1.0);

  SUBCASE("constant field against the closed form") {
    // The cell quadrature of the box is exact up to the grid points that fall
    // on or inside [-1, 1]; the closed form exp(-2c^4 / 4pi) holds to that
    // accuracy.
    SpectralField c(s.grid());
    c.mode(0) = 1.3;
    const double closed = std::exp(-2.0 * std::pow(1.3, 4) / (4.0 * std::numbers::pi));
    int inside = 0;
    for (Eigen::Index m = 0; m < s.grid().collocation_size(); ++m) inside += std::abs(s.grid().point(m)) <= 1.0;
    const double quadrature = std::exp(-inside * s.cell() * std::pow(1.3, 4) / (4.0 * std::numbers::pi));
    CHECK(gibbs_weight(c, s) == doctest::Approx(quadrature).epsilon(1e-13));
    CHECK(std::abs(gibbs_weight(c, s) - closed) < 0.05);
    const MeasureSpec fine(2, unit_box, 4096);
    SpectralField cf(fine.grid());
    cf.mode(0) = 1.3;
    CHECK(std::abs(gibbs_weight(cf, fine) - closed) < 2e-3);
  }
}

TEST_CASE("rejection sampling") {
  const MeasureSpec s(3, unit_box);
  const RngStream rng(3, 0);

  SUBCASE("zero weight accepts every proposal") {
    const MeasureSpec free = s.with_weight(WeightFunction::zero());
    for (const auto& g : sample_rho_k_batch(free, 50, rng)) {
      CHECK(g.proposals == 1);
      CHECK(g.weight == 1.0);
    }
  }

  SUBCASE("acceptance rate agrees with the direct normalisation estimate") {
    std::size_t proposals = 0;
    const std::size_t n = 3000;
    for (const auto& g : sample_rho_k_batch(s, n, rng.substream(1))) {
      CHECK(g.accepted);
      CHECK(g.weight > 0.0);
      CHECK(g.weight <= 1.0);
      proposals += g.proposals;
    }
    const double rate = static_cast<double>(n) / proposals;
    // number of proposals per acceptance is geometric with mean 1/Gamma
    const double rate_se = rate * std::sqrt((1.0 - rate) / n);
    const MeanEstimate gamma = estimate_gamma_k(s, 6000, rng.substream(2));
    CHECK(std::abs(rate - gamma.mean) < 3 * std::hypot(rate_se, gamma.std_error));

    std::size_t strong = 0;
    for (const auto& g : sample_rho_k_batch(s.with_weight(WeightFunction::indicator({{-1.0, 1.0}}, 5.0)), n, rng.substream(3)))
      strong += g.proposals;
    CHECK(static_cast<double>(n) / strong < rate);
  }

  SUBCASE("the proposal cap raises a diagnostic") {
    RngStream r = rng.substream(4);
    CHECK_THROWS_AS(rejection_sample([&s](RngStream& q) { return sample_mu_k(s, q); },
                                     [](const SpectralField&) { return 0.0; }, r, 10),
                    NumericalError);
  }
}

TEST_CASE("normalisation estimates") {
  const RngStream rng(4, 0);
  const MeanEstimate free = estimate_gamma_k(MeasureSpec(3, WeightFunction::zero()), 200, rng);
  CHECK(free.mean == 1.0);
  CHECK(free.std_error == 0.0);
  CHECK_THROWS_AS(estimate_gamma_k(MeasureSpec(3, unit_box), 99, rng), PreconditionError);

  const MeanEstimate g2 = estimate_gamma_k(MeasureSpec(2, unit_box), 8000, rng.substream(1));
  const MeanEstimate g3 = estimate_gamma_k(MeasureSpec(3, unit_box), 8000, rng.substream(2));
  CHECK(g2.mean > 0.0);
  CHECK(g2.mean <= 1.0);
  CHECK(g3.mean > 0.0);
  CHECK(g3.mean <= 1.0);
  // same stream, same estimate
  CHECK(estimate_gamma_k(MeasureSpec(3, unit_box), 8000, rng.substream(2)).mean == g3.mean);
}

TEST_CASE("tail survival") {
  const MeasureSpec s(3, unit_box);
  const std::vector<double> lambdas{0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
  const TailReport r = tail_survival(s, unit_box, 2, 2, lambdas, 2000, RngStream(5, 0));
  CHECK(r.survival.front() == 1.0);
  CHECK(r.monotone);
  for (std::size_t i = 1; i < r.survival.size(); ++i) CHECK(r.survival[i] <= r.survival[i - 1]);

  SUBCASE("statistic for a constant field against its closed form") {
    // |L(tau) c|^2 = c^2 for the zero mode; the inner integral is the box
    // quadrature of c^{2p}, constant in tau.
    SpectralField c(s.grid());
    c.mode(0) = 0.8;
    const Eigen::VectorXd xi = unit_box.sample(s.grid());
    const double inner = s.cell() * xi.sum() * std::pow(0.8, 4);
    const double expected = std::pow(2.0 * std::pow(inner, 1.0), 1.0 / 4.0);
    CHECK(tail_statistic(c, xi, s.cell(), 2, 2) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(tail_survival(s, unit_box, 0, 2, lambdas, 200, RngStream(5, 0)), PreconditionError);
}
