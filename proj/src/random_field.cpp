#include "kgibbs/random_field.hpp"

#include <algorithm>
#include <cmath>

#include "kgibbs/errors.hpp"
#include "kgibbs/parallel.hpp"

namespace kgibbs {

IncrementTable sample_increments(const FrequencyGrid& grid, RngStream& rng) {
  IncrementTable table{grid, Eigen::VectorXcd(grid.mode_count())};
  const double second_moment = 1.0 / grid.density();
  for (Eigen::Index i = 0; i < table.increments.size(); ++i) table.increments[i] = rng.complex_normal(second_moment);
  return table;
}

IncrementTable refine_increments(const IncrementTable& coarse, const FrequencyGrid& fine, RngStream& rng) {
  const FrequencyGrid& cg = coarse.grid;
  if (fine.density() < cg.density()) throw PreconditionError("refine_increments: fine level below coarse level");
  if (fine.density() % cg.density() != 0 || fine.cutoff() != cg.cutoff()) {
    throw PreconditionError("refine_increments: fine lattice must refine the coarse one with the same cutoff");
  }
  if (fine.density() == cg.density()) return IncrementTable{fine, coarse.increments};

  const int split = fine.density() / cg.density();
  const double second_moment = 1.0 / fine.density();
  IncrementTable out{fine, Eigen::VectorXcd(fine.mode_count())};
  Eigen::VectorXcd block(split);
  for (int l = cg.min_mode(); l <= cg.max_mode(); ++l) {
    for (int j = 0; j < split; ++j) block[j] = rng.complex_normal(second_moment);
    // Conditioning iid Gaussians on their sum: subtract the mean defect.
    const std::complex<double> defect = (block.sum() - coarse.at(l)) / static_cast<double>(split);
    for (int j = 0; j < split; ++j) out.increments[fine.slot(split * l + j)] = block[j] - defect;
  }
  return out;
}

IncrementTable aggregate_increments(const IncrementTable& fine, const FrequencyGrid& coarse) {
  const FrequencyGrid& fg = fine.grid;
  if (fg.density() % coarse.density() != 0) {
    throw PreconditionError("aggregate_increments: fine lattice must refine the coarse one");
  }
  const int split = fg.density() / coarse.density();
  IncrementTable out{coarse, Eigen::VectorXcd::Zero(coarse.mode_count())};
  for (int l = coarse.min_mode(); l <= coarse.max_mode(); ++l) {
    std::complex<double> sum = 0.0;
    for (int j = 0; j < split; ++j) {
      const int i = split * l + j;
      if (!fg.contains_mode(i)) throw PreconditionError("aggregate_increments: coarse band exceeds fine band");
      sum += fine.at(i);
    }
    out.increments[coarse.slot(l)] = sum;
  }
  return out;
}

SpectralField build_phi(const IncrementTable& table) {
  const Eigen::VectorXd m = bessel_multiplier<double>(table.grid, -1.0);
  return SpectralField(table.grid, table.increments.cwiseProduct(m.cast<std::complex<double>>()));
}

double pointwise_variance(const FrequencyGrid& grid) {
  const double n = grid.density();
  double sum = 0.0;
  for (int j = grid.min_mode(); j <= grid.max_mode(); ++j) {
    const double xi = j / n;
    sum += 1.0 / (n * (1.0 + xi * xi));
  }
  return sum;
}

std::complex<double> evaluate_at(const SpectralField& u, double x) {
  const FrequencyGrid& g = u.grid();
  const std::complex<double> step = std::polar(1.0, x / g.density());
  std::complex<double> phase = std::polar(1.0, g.min_mode() * x / g.density());
  std::complex<double> sum = 0.0;
  // Recurrence drifts slowly; re-anchor every 256 modes.
  for (int j = g.min_mode(); j <= g.max_mode(); ++j) {
    if ((j - g.min_mode()) % 256 == 0) phase = std::polar(1.0, j * x / g.density());
    sum += u.mode(j) * phase;
    phase *= step;
  }
  return sum;
}

double cauchy_rate_exact_variance(int level, int fine_level, int cutoff, double probe) {
  if (level > fine_level) throw PreconditionError("cauchy_rate: level above the fine level");
  const double nf = std::ldexp(1.0, fine_level);
  const double nc = std::ldexp(1.0, level);
  const int split = 1 << (fine_level - level);
  const long long lo = -static_cast<long long>(nf) * cutoff;
  const long long hi = static_cast<long long>(nf) * cutoff;
  auto coefficient = [probe](double freq) { return std::polar(1.0 / std::sqrt(1.0 + freq * freq), freq * probe); };
  double sum = 0.0;
  for (long long i = lo; i < hi; ++i) {
    const long long l = (i >= 0) ? i / split : -((-i + split - 1) / split);
    sum += std::norm(coefficient(i / nf) - coefficient(l / nc));
  }
  return sum / nf;
}

CauchyRateReport cauchy_rate(std::span<const int> levels, int fine_level, int cutoff, double probe, int samples,
                             const RngStream& rng) {
  if (samples < 100) throw PreconditionError("cauchy_rate: at least 100 samples are required");
  if (levels.empty()) throw PreconditionError("cauchy_rate: empty level list");
  if (cutoff <= 0) throw PreconditionError("cauchy_rate: cutoff must be positive");
  std::vector<int> sorted(levels.begin(), levels.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0 || sorted.back() > fine_level) {
    throw PreconditionError("cauchy_rate: levels must lie in [0, fine level]");
  }

  const int base = sorted.front();
  const std::size_t count = sorted.size();
  // squared distances, row-major [sample][level]
  std::vector<double> sq(static_cast<std::size_t>(samples) * count);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    RngStream stream = rng.substream(s);
    IncrementTable table = sample_increments(FrequencyGrid(1 << base, cutoff), stream);
    std::vector<std::complex<double>> value(static_cast<std::size_t>(fine_level + 1));
    std::vector<bool> wanted(static_cast<std::size_t>(fine_level + 1), false);
    for (int m : sorted) wanted[static_cast<std::size_t>(m)] = true;
    for (int level = base;; ++level) {
      if (wanted[static_cast<std::size_t>(level)] || level == fine_level) {
        value[static_cast<std::size_t>(level)] = evaluate_at(build_phi(table), probe);
      }
      if (level == fine_level) break;
      table = refine_increments(table, FrequencyGrid(1 << (level + 1), cutoff), stream);
    }
    for (std::size_t c = 0; c < count; ++c) {
      sq[s * count + c] = std::norm(value[static_cast<std::size_t>(fine_level)] -
                                    value[static_cast<std::size_t>(sorted[c])]);
    }
  });

  CauchyRateReport report;
  report.levels = sorted;
  report.fine_level = fine_level;
  report.cutoff = cutoff;
  report.probe = probe;
  report.samples = samples;
  std::vector<double> fit_x, fit_y;
  std::vector<double> column(static_cast<std::size_t>(samples));
  for (std::size_t c = 0; c < count; ++c) {
    for (int s = 0; s < samples; ++s) column[static_cast<std::size_t>(s)] = sq[static_cast<std::size_t>(s) * count + c];
    const MeanEstimate ms = mean_estimate(column);
    const double rms = std::sqrt(ms.mean);
    report.rms.push_back(rms);
    // delta method: se(sqrt(X)) = se(X) / (2 sqrt(X))
    report.std_error.push_back(rms > 0.0 ? ms.std_error / (2.0 * rms) : 0.0);
    if (rms > 0.0) {
      fit_x.push_back(sorted[c]);
      fit_y.push_back(std::log2(rms));
      report.rate_constant =
          std::max(report.rate_constant, rms * std::ldexp(1.0, sorted[c]) / std::sqrt(1.0 + probe * probe));
    }
  }
  if (fit_x.size() >= 2) std::tie(report.slope, report.intercept) = fit_line(fit_x, fit_y);
  return report;
}

MassProfile l2_mass_profile(int k, std::span<const double> radii, int samples, const RngStream& rng) {
  if (k < 1) throw PreconditionError("l2_mass_profile: k must be >= 1");
  if (samples < 2) throw PreconditionError("l2_mass_profile: need at least two samples");
  const FrequencyGrid grid(1 << k, k);
  std::vector<Eigen::VectorXd> windows;
  for (double r : radii) {
    if (r < 0.0 || r > grid.half_period() * (1.0 + 1e-12)) {
      throw PreconditionError("l2_mass_profile: radius must lie in [0, pi N_k]");
    }
    windows.push_back(r == 0.0 ? Eigen::VectorXd::Zero(grid.collocation_size()) : window_weights(grid, r));
  }
  const std::size_t nr = radii.size();
  std::vector<double> mass(static_cast<std::size_t>(samples) * nr);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    RngStream stream = rng.substream(s);
    const Eigen::VectorXd sq = synthesize(build_phi(sample_increments(grid, stream))).cwiseAbs2();
    for (std::size_t r = 0; r < nr; ++r) mass[s * nr + r] = windows[r].dot(sq);
  });

  MassProfile out;
  out.k = k;
  out.radii.assign(radii.begin(), radii.end());
  out.pointwise_variance = pointwise_variance(grid);
  std::vector<double> column(static_cast<std::size_t>(samples));
  for (std::size_t r = 0; r < nr; ++r) {
    for (int s = 0; s < samples; ++s) column[static_cast<std::size_t>(s)] = mass[static_cast<std::size_t>(s) * nr + r];
    const MeanEstimate m = mean_estimate(column);
    out.mean.push_back(m.mean);
    out.std_error.push_back(m.std_error);
  }
  if (nr >= 2) std::tie(out.slope, out.intercept) = fit_line(out.radii, out.mean);
  return out;
}

}  // namespace kgibbs
