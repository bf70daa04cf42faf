#include "kgibbs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "kgibbs/errors.hpp"
#include "kgibbs/parallel.hpp"

namespace kgibbs {

using cd = std::complex<double>;

namespace {

Eigen::VectorXd dispersion(const FrequencyGrid& grid) { return bessel_multiplier<double>(grid, 1.0); }

Eigen::VectorXcd phase(const Eigen::VectorXd& omega, double t) {
  Eigen::VectorXcd p(omega.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::polar(1.0, -t * omega[i]);
  return p;
}

double relative_gap(double value, double reference) {
  const double scale = std::abs(reference);
  return scale > 0.0 ? std::abs(value - reference) / scale : std::abs(value - reference);
}

bool finite(const SpectralField& u) { return u.coeffs().allFinite(); }

void require_grid(const SpectralField& u, const MeasureSpec& spec, const char* who) {
  if (!(u.grid() == spec.grid())) throw PreconditionError(std::string(who) + ": field is not on the spec grid");
}

// One Lawson RK4 step for u' = -i Omega u - i G(u).
class LawsonStepper {
 public:
  LawsonStepper(const MeasureSpec& spec, double h)
      : spec_(spec), h_(h), full_(phase(dispersion(spec.grid()), h)), half_(phase(dispersion(spec.grid()), 0.5 * h)) {}

  void step(SpectralField& u) const {
    const Eigen::VectorXcd& c = u.coeffs();
    const Eigen::VectorXcd k1 = force(c);
    const Eigen::VectorXcd k2 = force(half_.cwiseProduct(c + 0.5 * h_ * k1));
    const Eigen::VectorXcd k3 = force(half_.cwiseProduct(c) + 0.5 * h_ * k2);
    const Eigen::VectorXcd k4 = force(full_.cwiseProduct(c) + h_ * half_.cwiseProduct(k3));
    u.coeffs() = full_.cwiseProduct(c + (h_ / 6.0) * k1) + (h_ / 3.0) * half_.cwiseProduct(k2 + k3) + (h_ / 6.0) * k4;
  }

 private:
  Eigen::VectorXcd force(const Eigen::VectorXcd& c) const {
    return cd(0.0, -1.0) * nonlinear_term(SpectralField(spec_.grid(), c), spec_).coeffs();
  }

  const MeasureSpec& spec_;
  double h_;
  Eigen::VectorXcd full_;
  Eigen::VectorXcd half_;
};

// sum_m h chi |w|^6 over the fundamental domain, for a precomputed weight.
double l6_norm(const SpectralField& u, const Eigen::VectorXd& weight) {
  const Eigen::ArrayXd a2 = synthesize(u).cwiseAbs2().array();
  return std::pow((weight.array() * a2.cube()).sum(), 1.0 / 6.0);
}

}  // namespace

void FlowConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("FlowConfig: dt must be positive");
  if (!std::isfinite(horizon)) throw PreconditionError("FlowConfig: horizon must be finite");
  if (horizon > 0.0 && dt > horizon) throw PreconditionError("FlowConfig: dt must not exceed the horizon");
  if (!(drift_tolerance > 0.0)) throw PreconditionError("FlowConfig: drift tolerance must be positive");
  if (max_halvings < 0) throw PreconditionError("FlowConfig: max_halvings must be >= 0");
  if (record_stride < 0) throw PreconditionError("FlowConfig: record_stride must be >= 0");
}

SpectralField linear_flow(const SpectralField& u, double t) {
  if (t == 0.0) return u;
  return SpectralField(u.grid(), phase(dispersion(u.grid()), t).cwiseProduct(u.coeffs()));
}

SpectralField nonlinear_term(const SpectralField& u, const MeasureSpec& spec) {
  require_grid(u, spec, "nonlinear_term");
  if (spec.weight().is_zero()) return SpectralField(spec.grid());
  const Eigen::ArrayXd re = real_samples(u).array();
  const Eigen::VectorXd cubic = (spec.weight_samples().array() * re.cube()).matrix();
  return apply_bessel_power(analyze<double>(cubic, spec.grid()), -1.0);
}

HamiltonianParts hamiltonian(const SpectralField& u, const MeasureSpec& spec) {
  require_grid(u, spec, "hamiltonian");
  const Eigen::VectorXd lambda = bessel_multiplier<double>(spec.grid(), 2.0);
  HamiltonianParts h;
  h.kinetic = spec.density() * lambda.dot(u.coeffs().cwiseAbs2());
  h.potential = quartic_quadrature(u, spec) / (4.0 * std::numbers::pi);
  h.total = h.kinetic + h.potential;
  return h;
}

TrajectoryRecord evolve_fixed_step(const SpectralField& u0, const MeasureSpec& spec, double dt, double horizon,
                                   int record_stride) {
  require_grid(u0, spec, "evolve");
  if (!(dt > 0.0)) throw PreconditionError("evolve: dt must be positive");
  const long steps = horizon == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(horizon) / dt - 1e-9));
  const double h = steps == 0 ? 0.0 : horizon / static_cast<double>(steps);

  TrajectoryRecord rec;
  rec.dt_used = std::abs(h);
  rec.steps = steps;
  SpectralField u = u0;
  auto log_energy = [&](double t) {
    const HamiltonianParts e = hamiltonian(u, spec);
    rec.step_times.push_back(t);
    rec.total.push_back(e.total);
    rec.kinetic.push_back(e.kinetic);
    rec.potential.push_back(e.potential);
    rec.max_relative_drift = std::max(rec.max_relative_drift, relative_gap(e.total, rec.total.front()));
  };
  rec.times.push_back(0.0);
  rec.states.push_back(u);
  log_energy(0.0);

  const LawsonStepper stepper(spec, h);
  for (long n = 1; n <= steps; ++n) {
    stepper.step(u);
    if (!finite(u)) throw NumericalError("evolve: non-finite state at step " + std::to_string(n));
    const double t = h * static_cast<double>(n);
    log_energy(t);
    if (n == steps || (record_stride > 0 && n % record_stride == 0)) {
      rec.times.push_back(t);
      rec.states.push_back(u);
    }
  }
  return rec;
}

TrajectoryRecord evolve_psi_k(const SpectralField& u0, const MeasureSpec& spec, const FlowConfig& cfg) {
  cfg.validate();
  double dt = cfg.dt;
  // Record stride refers to the base step and doubles with every halving.
  int stride = cfg.record_stride;
  for (int halvings = 0;; ++halvings) {
    TrajectoryRecord rec = evolve_fixed_step(u0, spec, dt, cfg.horizon, stride);
    rec.halvings = halvings;
    if (rec.max_relative_drift <= cfg.drift_tolerance) return rec;
    if (halvings == cfg.max_halvings) {
      rec.flagged = true;
      return rec;
    }
    dt *= 0.5;
    stride *= 2;
  }
}

SpectralField flow_map(const SpectralField& u0, const MeasureSpec& spec, double t, double dt) {
  require_grid(u0, spec, "flow_map");
  const long steps = t == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(t) / dt - 1e-9));
  if (steps == 0) return u0;
  const LawsonStepper stepper(spec, t / static_cast<double>(steps));
  SpectralField u = u0;
  for (long n = 0; n < steps; ++n) stepper.step(u);
  if (!finite(u)) throw NumericalError("flow_map: non-finite state");
  return u;
}

PicardResult picard_solve(const SpectralField& u0, const MeasureSpec& spec, double horizon, int max_iter,
                          double tolerance) {
  require_grid(u0, spec, "picard_solve");
  if (!(horizon > 0.0)) throw PreconditionError("picard_solve: horizon must be positive");
  if (max_iter < 1) throw PreconditionError("picard_solve: max_iter must be >= 1");
  constexpr int intervals = 64;
  constexpr int nodes = intervals + 1;
  const double h = horizon / intervals;

  PicardResult res;
  std::vector<SpectralField> free_flow;
  for (int i = 0; i < nodes; ++i) {
    res.times.push_back(h * i);
    free_flow.push_back(linear_flow(u0, h * i));
  }
  res.correction.assign(nodes, SpectralField(spec.grid()));
  std::vector<Eigen::VectorXcd> integrand(nodes);
  std::vector<SpectralField> next(nodes, SpectralField(spec.grid()));

  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < nodes; ++i) {
      integrand[i] = linear_flow(nonlinear_term(free_flow[i] + res.correction[i], spec), -res.times[i]).coeffs();
    }
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(spec.grid().mode_count());
    Eigen::VectorXcd even = acc;
    double gap = 0.0;
    double size = 0.0;
    for (int i = 0; i < nodes; ++i) {
      if (i == 0) {
        acc.setZero();
      } else if (i % 2 == 0) {
        even += (h / 3.0) * (integrand[i - 2] + 4.0 * integrand[i - 1] + integrand[i]);
        acc = even;
      } else if (i == 1) {
        acc = (h / 12.0) * (5.0 * integrand[0] + 8.0 * integrand[1] - integrand[2]);
      } else {
        acc = even + (h / 12.0) * (-integrand[i - 2] + 8.0 * integrand[i - 1] + 5.0 * integrand[i]);
      }
      next[i] = linear_flow(SpectralField(spec.grid(), cd(0.0, -1.0) * acc), res.times[i]);
      gap = std::max(gap, full_domain_seminorm(next[i] - res.correction[i], 1.0));
      size = std::max(size, full_domain_seminorm(next[i], 1.0));
    }
    if (!std::isfinite(gap)) throw NumericalError("picard_solve: iterate diverged");
    std::swap(res.correction, next);
    res.gaps.push_back(gap);
    res.iterations = it;
    if (gap <= tolerance * std::max(1.0, size)) {
      res.converged = true;
      break;
    }
  }

  // Ratios below this floor are dominated by round-off.
  double scale = 0.0;
  for (const auto& v : res.correction) scale = std::max(scale, full_domain_seminorm(v, 1.0));
  const double floor = 1e-11 * std::max(1.0, scale);
  for (std::size_t n = 1; n < res.gaps.size(); ++n) {
    if (res.gaps[n - 1] > floor && res.gaps[n] > floor) {
      res.contraction = std::max(res.contraction, res.gaps[n] / res.gaps[n - 1]);
    }
  }
  if (!res.converged && res.contraction < 1.0 && res.gaps.size() >= 2 && res.gaps.back() >= res.gaps.front()) {
    res.contraction = std::max(res.contraction, 1.0);
  }
  return res;
}

double linear_space_time_norm(const SpectralField& u0, const MeasureSpec& spec) {
  constexpr int nodes = 33;
  const Eigen::VectorXd weight = spec.cell() * spec.weight_samples().array().square().matrix();
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double tau = -1.0 + 2.0 * i / (nodes - 1);
    const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    sum += w * std::pow(l6_norm(linear_flow(u0, tau), weight), 6.0);
  }
  return std::pow(sum * 2.0 / (nodes - 1), 1.0 / 6.0);
}

PicardHorizon picard_horizon(const SpectralField& u0, const MeasureSpec& spec, double max_horizon, int levels,
                             int max_iter) {
  if (levels < 2) throw PreconditionError("picard_horizon: need at least two horizons");
  PicardHorizon out;
  out.lambda = linear_space_time_norm(u0, spec);
  double best_size = 0.0;
  for (int i = 0; i < levels; ++i) {
    const double T = max_horizon * std::ldexp(1.0, -i);
    const PicardResult r = picard_solve(u0, spec, T, max_iter);
    out.horizons.push_back(T);
    out.contraction.push_back(r.contraction);
    out.converged.push_back(r.converged);
    if (out.contractive_horizon == 0.0 && r.converged && r.contraction < 1.0) {
      out.contractive_horizon = T;
      for (const auto& v : r.correction) best_size = std::max(best_size, full_domain_seminorm(v, 1.0));
    }
  }
  // horizons decrease along the grid, so factors must not increase
  for (std::size_t i = 1; i < out.contraction.size(); ++i) {
    if (out.contraction[i] > out.contraction[i - 1]) out.monotone = false;
  }
  if (out.contractive_horizon > 0.0) {
    const double lambda = std::max(out.lambda, 1.0);
    out.epsilon = best_size / lambda;
    out.constant = out.epsilon * out.epsilon / (out.contractive_horizon * std::pow(lambda, 4));
  }
  return out;
}

EnergyReport energy_monitor(const TrajectoryRecord& traj, const SpectralField& u0, const MeasureSpec& spec) {
  require_grid(u0, spec, "energy_monitor");
  EnergyReport rep;
  const Eigen::VectorXd domain = Eigen::VectorXd::Constant(spec.grid().collocation_size(), spec.cell());
  double i1 = 0.0;
  double i3 = 0.0;
  double prev_t = 0.0;
  double prev_norm = 0.0;
  for (std::size_t n = 0; n < traj.times.size(); ++n) {
    const double t = traj.times[n];
    const SpectralField free = linear_flow(u0, t);
    const SpectralField v = traj.states[n] - free;
    const double p1 = full_domain_seminorm(v, 1.0);
    const double e = 0.5 * p1 * p1 + 0.25 * quartic_quadrature(v, spec);
    const double norm = l6_norm(free, domain);
    if (n > 0) {
      i1 += 0.5 * (t - prev_t) * (norm + prev_norm);
      i3 += 0.5 * (t - prev_t) * (std::pow(norm, 3) + std::pow(prev_norm, 3));
    }
    prev_t = t;
    prev_norm = norm;
    rep.times.push_back(t);
    rep.energy.push_back(e);
    rep.kinetic_floor.push_back(0.5 * p1 * p1);
    rep.l6_integral.push_back(i1);
    rep.l6_cubed_integral.push_back(i3);
    if (e < 0.5 * p1 * p1) rep.floor_holds = false;
  }
  return rep;
}

GronwallFit fit_gronwall(std::span<const EnergyReport> reports, double c2) {
  GronwallFit fit;
  fit.c2 = c2;
  for (const auto& r : reports) {
    for (std::size_t n = 0; n < r.times.size(); ++n) {
      const double denom = r.l6_cubed_integral[n] * std::exp(c2 * r.l6_integral[n]);
      if (denom > 0.0) fit.c1 = std::max(fit.c1, std::sqrt(r.energy[n]) / denom);
    }
  }
  return fit;
}

double gronwall_excess(const EnergyReport& r, const GronwallFit& fit) {
  double worst = 0.0;
  for (std::size_t n = 0; n < r.times.size(); ++n) {
    const double bound = fit.c1 * r.l6_cubed_integral[n] * std::exp(fit.c2 * r.l6_integral[n]);
    const double h = std::sqrt(r.energy[n]);
    if (bound > 0.0) {
      worst = std::max(worst, h / bound);
    } else if (h > 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

LiouvilleResult liouville_check(const SpectralField& u, const MeasureSpec& spec, double t, double step, double dt) {
  require_grid(u, spec, "liouville_check");
  if (!(step > 0.0)) throw PreconditionError("liouville_check: finite-difference step must be positive");
  const Eigen::Index modes = spec.grid().mode_count();
  const Eigen::Index dim = 2 * modes;
  if (dim > 256) throw PreconditionError("liouville_check: dense Jacobian limited to 256 real dimensions");

  LiouvilleResult res;
  if (t == 0.0) {
    res.jacobian = Eigen::MatrixXd::Identity(dim, dim);
    return res;
  }
  auto to_real = [modes](const SpectralField& f) {
    Eigen::VectorXd x(2 * modes);
    x.head(modes) = f.coeffs().real();
    x.tail(modes) = f.coeffs().imag();
    return x;
  };
  res.jacobian.resize(dim, dim);
  parallel_for(static_cast<std::size_t>(dim), [&](std::size_t col) {
    const auto c = static_cast<Eigen::Index>(col);
    const cd delta = c < modes ? cd(step, 0.0) : cd(0.0, step);
    SpectralField plus = u;
    SpectralField minus = u;
    plus.coeffs()[c % modes] += delta;
    minus.coeffs()[c % modes] -= delta;
    res.jacobian.col(c) = (to_real(flow_map(plus, spec, t, dt)) - to_real(flow_map(minus, spec, t, dt))) / (2.0 * step);
  });
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(res.jacobian);
  res.determinant = lu.determinant();
  if (!std::isfinite(res.determinant) || res.determinant == 0.0) {
    throw NumericalError("liouville_check: singular finite-difference Jacobian");
  }
  res.deviation = std::abs(res.determinant - 1.0);
  return res;
}

CrossKResult cross_k_convergence(const SpectralField& u0, const WeightFunction& chi, int k, int k_ref, double t,
                                 double alpha, double dt) {
  if (k_ref < k) throw PreconditionError("cross_k_convergence: reference level must be >= k");
  if (!(alpha > 0.5)) throw PreconditionError("cross_k_convergence: alpha must exceed 1/2");
  if (k_ref == k) return {};
  const MeasureSpec coarse(k, chi);
  const MeasureSpec fine(k_ref, chi);
  const SpectralField coarse_end = flow_map(embed(u0, coarse.grid()), coarse, t, dt);
  const SpectralField fine_end = flow_map(embed(u0, fine.grid()), fine, t, dt);
  const SpectralField diff = apply_bessel_power(fine_end - embed(coarse_end, fine.grid()), 0.75);

  const FrequencyGrid& g = fine.grid();
  const Eigen::VectorXd sq = synthesize(diff).cwiseAbs2();
  const Eigen::VectorXd decay = (1.0 + g.points().array().square()).pow(-alpha).matrix();
  // One full period of |D^{3/4} diff|^2 per block [inner + nP, inner + (n+1)P].
  const double period_mass = std::pow(full_domain_seminorm(diff, 0.0), 2);
  auto tail = [&](double inner) {
    const double period = g.period();
    constexpr long blocks = 100000;
    double sum = 0.0;
    for (long n = 0; n < blocks; ++n) {
      const double x = inner + n * period;
      sum += std::pow(1.0 + x * x, -alpha);
    }
    sum += std::pow(period, -2.0 * alpha) * std::pow(static_cast<double>(blocks - 1), 1.0 - 2.0 * alpha) /
           (2.0 * alpha - 1.0);
    return std::sqrt(2.0 * sum * period_mass);
  };

  CrossKResult res;
  const double inner = coarse.grid().half_period();
  res.distance = std::sqrt(window_weights(g, inner).cwiseProduct(decay).dot(sq));
  res.tail_bound = tail(inner);
  return res;
}

SpectralField project_bump(const FrequencyGrid& grid, double half_width) {
  if (!(half_width > 0.0)) throw PreconditionError("project_bump: half width must be positive");
  Eigen::VectorXd f(grid.collocation_size());
  for (Eigen::Index m = 0; m < f.size(); ++m) {
    const double y = grid.point(m) / half_width;
    f[m] = std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
  }
  return analyze<double>(f, grid);
}

ConeResult propagation_cone_check(const SpectralField& u0, double half_width, double t, double margin) {
  const FrequencyGrid& g = u0.grid();
  const double reach = half_width + std::abs(t) + margin;
  if (!(half_width > 0.0) || margin < 0.0) throw PreconditionError("propagation_cone_check: bad bump or margin");
  if (!(reach < g.half_period())) {
    throw PreconditionError("propagation_cone_check: a + |t| + margin must stay below pi N");
  }
  const Eigen::VectorXd sq = real_samples(linear_flow(u0, t)).array().square().matrix();
  ConeResult res;
  res.total_mass = g.spacing() * sq.sum();
  res.outside_mass = std::max(0.0, res.total_mass - window_weights(g, reach).dot(sq));
  res.leakage = res.total_mass > 0.0 ? res.outside_mass / res.total_mass : 0.0;
  return res;
}

}  // namespace kgibbs
