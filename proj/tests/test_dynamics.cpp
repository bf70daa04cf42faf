#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "kgibbs/dynamics.hpp"
#include "kgibbs/errors.hpp"

using namespace kgibbs;
using cd = std::complex<double>;

namespace {

const WeightFunction unit_box = WeightFunction::indicator({{-1.0, 1.0}});

SpectralField draw(const MeasureSpec& s, std::uint64_t seed) {
  RngStream r(seed, 0);
  return sample_mu_k(s, r);
}

double relative(const SpectralField& a, const SpectralField& b) {
  return (a.coeffs() - b.coeffs()).norm() / b.coeffs().norm();
}

// Central differences of the quadrature potential in (Re u_j, Im u_j).
Eigen::VectorXcd potential_gradient(const SpectralField& u, const MeasureSpec& s, double h) {
  Eigen::VectorXcd g(u.coeffs().size());
  auto hp = [&](const SpectralField& f) { return hamiltonian(f, s).potential; };
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    SpectralField a = u, b = u, c = u, d = u;
    a.coeffs()[j] += h;
    b.coeffs()[j] -= h;
    c.coeffs()[j] += cd(0.0, h);
    d.coeffs()[j] -= cd(0.0, h);
    g[j] = cd((hp(a) - hp(b)) / (2 * h), (hp(c) - hp(d)) / (2 * h));
  }
  return g;
}

}  // namespace

TEST_CASE("linear flow") {
  const MeasureSpec s(3, unit_box);
  const SpectralField u = draw(s, 1);
  CHECK(linear_flow(u, 0.0).coeffs() == u.coeffs());
  SpectralField zero_mode(s.grid());
  zero_mode.mode(0) = 2.0;
  CHECK(std::abs(linear_flow(zero_mode, 0.7).mode(0) - 2.0 * std::polar(1.0, -0.7)) < 1e-15);
  for (double order : {0.0, 1.0, -0.5}) {
    const double before = full_domain_seminorm(u, order);
    CHECK(std::abs(full_domain_seminorm(linear_flow(u, 7.3), order) - before) / before < 1e-12);
  }
  CHECK(relative(linear_flow(linear_flow(u, 0.4), 1.1), linear_flow(u, 1.5)) < 1e-14);
}

TEST_CASE("nonlinear term") {
  const MeasureSpec s(2, unit_box);
  CHECK(nonlinear_term(SpectralField(s.grid()), s).coeffs().cwiseAbs().maxCoeff() == 0.0);
  const SpectralField u = draw(s, 2);
  CHECK(nonlinear_term(u, s.with_weight(WeightFunction::zero())).coeffs().cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("constant weight on the grid and a constant field") {
    const MeasureSpec flat(1, WeightFunction::indicator({{-100.0, 100.0}}));
    SpectralField c(flat.grid());
    c.mode(0) = 0.7;
    const SpectralField g = nonlinear_term(c, flat);
    CHECK(std::abs(g.mode(0) - cd(0.7 * 0.7 * 0.7)) < 1e-14);
    double rest = 0.0;
    for (int j = flat.grid().min_mode(); j <= flat.grid().max_mode(); ++j)
      if (j != 0) rest = std::max(rest, std::abs(g.mode(j)));
    CHECK(rest < 1e-14);
  }

  SUBCASE("two-mode field against a direct convolution") {
    // chi = 1 on the whole grid, so the output is D^{-1} Pi_k (Re u)^3.
    const MeasureSpec flat(1, WeightFunction::indicator({{-100.0, 100.0}}));
    const FrequencyGrid& g = flat.grid();
    SpectralField u(g);
    u.mode(0) = cd(0.3, 0.1);
    u.mode(1) = cd(-0.2, 0.4);
    // Re u = sum_j (u_j e_j + conj(u_j) e_{-j}) / 2 as a mode dictionary.
    std::vector<std::pair<int, cd>> re;
    for (int j : {0, 1}) {
      re.push_back({j, 0.5 * u.mode(j)});
      re.push_back({-j, 0.5 * std::conj(u.mode(j))});
    }
    SpectralField oracle(g);
    for (auto [a, ca] : re)
      for (auto [b, cb] : re)
        for (auto [c, cc] : re)
          if (g.contains_mode(a + b + c)) oracle.mode(a + b + c) += ca * cb * cc;
    oracle = apply_bessel_power(oracle, -1.0);
    CHECK((nonlinear_term(u, flat).coeffs() - oracle.coeffs()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("nonlinear term is the gradient of the quadrature potential") {
  for (int k : {1, 2}) {
    const MeasureSpec s(k, unit_box);
    const SpectralField u = draw(s, 3 + k);
    const Eigen::VectorXcd grad = potential_gradient(u, s, 1e-5);
    const Eigen::VectorXd scale = bessel_multiplier<double>(s.grid(), 1.0) * (2.0 * s.density());
    const Eigen::VectorXcd predicted = grad.cwiseQuotient(scale.cast<cd>());
    CHECK((nonlinear_term(u, s).coeffs() - predicted).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("Hamiltonian parts") {
  const MeasureSpec s(2, unit_box);
  const HamiltonianParts zero = hamiltonian(SpectralField(s.grid()), s);
  CHECK(zero.total == 0.0);
  SpectralField single(s.grid());
  single.mode(4) = 1.0;
  CHECK(hamiltonian(single, s).kinetic == doctest::Approx(8.0).epsilon(1e-15));
  const SpectralField u = draw(s, 6);
  const HamiltonianParts free = hamiltonian(u, s.with_weight(WeightFunction::zero()));
  CHECK(free.total == free.kinetic);
  CHECK(free.potential == 0.0);
}

TEST_CASE("truncated flow") {
  const MeasureSpec s(3, unit_box);
  const SpectralField u0 = draw(s, 7);

  SUBCASE("zero weight reduces to the linear flow") {
    const MeasureSpec free = s.with_weight(WeightFunction::zero());
    const TrajectoryRecord r = evolve_psi_k(u0, free, FlowConfig{1e-3, 2.0});
    CHECK(relative(r.final_state(), linear_flow(u0, 2.0)) < 1e-12);
  }

  SUBCASE("conservation at the default step") {
    const TrajectoryRecord r = evolve_psi_k(u0, s, FlowConfig{1e-3, 1.0});
    CHECK(r.max_relative_drift <= 1e-8);
    CHECK_FALSE(r.flagged);
    CHECK(r.steps == 1000);
  }

  SUBCASE("fourth-order global error under step refinement") {
    const MeasureSpec s2(2, unit_box);
    const SpectralField v0 = 2.0 * draw(s2, 8);
    const SpectralField ref = flow_map(v0, s2, 0.5, 0.05 / 8);
    std::vector<double> err;
    for (double dt : {0.1, 0.05}) err.push_back((flow_map(v0, s2, 0.5, dt).coeffs() - ref.coeffs()).norm());
    CHECK(std::log2(err[0] / err[1]) == doctest::Approx(4.0).epsilon(0.3 / 4.0));
  }

  SUBCASE("halving until the drift tolerance holds") {
    FlowConfig cfg{0.25, 1.0, 1e-9};
    const TrajectoryRecord r = evolve_psi_k(u0, s, cfg);
    CHECK(r.halvings > 0);
    CHECK(r.max_relative_drift <= 1e-9);
    cfg.max_halvings = 0;
    CHECK(evolve_psi_k(u0, s, cfg).flagged);
  }

  SUBCASE("records") {
    FlowConfig cfg{1e-2, 0.5};
    cfg.record_stride = 10;
    const TrajectoryRecord r = evolve_psi_k(u0, s, cfg);
    CHECK(r.times.size() == 6);
    CHECK(r.total.size() == 51);
    CHECK(evolve_psi_k(u0, s, FlowConfig{1e-3, 0.0}).final_state().coeffs() == u0.coeffs());
  }

  SUBCASE("overflow is reported") {
    const MeasureSpec hard(1, WeightFunction::indicator({{-1.0, 1.0}}, 1e300));
    SpectralField big(hard.grid());
    big.mode(0) = 1e100;
    CHECK_THROWS_AS(evolve_fixed_step(big, hard, 0.1, 0.2), NumericalError);
  }

  CHECK_THROWS_AS(FlowConfig({-1.0, 1.0}).validate(), PreconditionError);
  CHECK_THROWS_AS(FlowConfig({2.0, 1.0}).validate(), PreconditionError);
}

TEST_CASE("Picard iteration") {
  const MeasureSpec s(2, unit_box);
  const SpectralField u0 = draw(s, 9);

  SUBCASE("zero weight converges at once") {
    const PicardResult r = picard_solve(u0, s.with_weight(WeightFunction::zero()), 0.5);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    for (const auto& v : r.correction) CHECK(v.coeffs().cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("fixed point matches the integrator") {
    const PicardResult r = picard_solve(u0, s, 0.5);
    CHECK(r.converged);
    CHECK(r.contraction < 1.0);
    const SpectralField integrated = flow_map(u0, s, 0.5, 1e-3) - linear_flow(u0, 0.5);
    CHECK(full_domain_seminorm(r.correction.back() - integrated, 1.0) < 1e-6);
  }

  SUBCASE("contraction factor shrinks with the horizon") {
    const PicardHorizon h = picard_horizon(u0, s, 1.0, 4);
    CHECK(h.monotone);
    CHECK(h.contractive_horizon == 1.0);
    CHECK(h.lambda > 0.0);
    CHECK(h.constant > 0.0);
  }

  SUBCASE("large data on a long horizon fails to contract and says so") {
    const MeasureSpec strong = s.with_weight(WeightFunction::indicator({{-4.0, 4.0}}, 5.0));
    try {
      const PicardResult r = picard_solve(6.0 * u0, strong, 8.0, 20);
      CHECK_FALSE(r.converged);
      CHECK(r.contraction >= 1.0);
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("diverged") != std::string::npos);
    }
  }
}

TEST_CASE("energy functional") {
  const MeasureSpec s(2, unit_box);
  const SpectralField u0 = draw(s, 10);
  FlowConfig cfg{1e-3, 1.0};
  cfg.record_stride = 10;
  const TrajectoryRecord r = evolve_psi_k(u0, s, cfg);
  const EnergyReport e = energy_monitor(r, u0, s);
  CHECK(e.energy.front() == 0.0);
  CHECK(e.floor_holds);
  for (std::size_t i = 0; i < e.times.size(); ++i) CHECK(e.energy[i] - e.kinetic_floor[i] >= 0.0);
  const EnergyReport reports[] = {e};
  const GronwallFit fit = fit_gronwall(reports);
  CHECK(fit.c1 > 0.0);
  CHECK(gronwall_excess(e, fit) == doctest::Approx(1.0));
}

TEST_CASE("Liouville volume") {
  const MeasureSpec s(1, unit_box);
  const SpectralField u = draw(s, 11);
  const LiouvilleResult at_zero = liouville_check(u, s, 0.0);
  CHECK(at_zero.determinant == 1.0);
  CHECK(at_zero.deviation == 0.0);
  CHECK(liouville_check(u, s.with_weight(WeightFunction::zero()), 0.3).deviation <= 1e-9);
  CHECK(liouville_check(u, s, 0.1, 1e-5).deviation <= 1e-4);
  const MeasureSpec wide(5, unit_box);
  CHECK_THROWS_AS(liouville_check(draw(wide, 1), wide, 0.1), PreconditionError);
}

TEST_CASE("cross-level distance") {
  const MeasureSpec s(2, unit_box);
  const SpectralField u0 = draw(s, 12);
  CHECK(cross_k_convergence(u0, unit_box, 3, 3, 0.25, 1.5).distance == 0.0);
  CHECK(cross_k_convergence(u0, WeightFunction::zero(), 2, 4, 0.25, 1.5).distance < 1e-12);
  const CrossKResult a = cross_k_convergence(u0, unit_box, 2, 4, 0.25, 1.5);
  CHECK(a.distance > 0.0);
  CHECK(a.tail_bound > 0.0);
  CHECK_THROWS_AS(cross_k_convergence(u0, unit_box, 4, 3, 0.25, 1.5), PreconditionError);
}

TEST_CASE("finite propagation speed") {
  const MeasureSpec s(5, unit_box);
  const SpectralField bump = project_bump(s.grid(), 4.0);
  const ConeResult still = propagation_cone_check(bump, 4.0, 0.0, 0.0);
  // at t = 0 the leakage is the band-limiting spill of the bump itself
  const Eigen::VectorXd sq = real_samples(bump).array().square().matrix();
  const double total = s.cell() * sq.sum();
  CHECK(still.leakage == doctest::Approx((total - window_weights(s.grid(), 4.0).dot(sq)) / total).epsilon(1e-12));
  const ConeResult moved = propagation_cone_check(bump, 4.0, 2.0, 1.0);
  CHECK(moved.leakage <= 1e-3);
  CHECK(propagation_cone_check(bump, 4.0, 2.0, 4.0).leakage <= moved.leakage);
  CHECK_THROWS_AS(propagation_cone_check(bump, 4.0, 100.0, 1.0), PreconditionError);
}
