#include "rankdyn/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "rankdyn/errors.hpp"
#include "rankdyn/parallel.hpp"
#include "rankdyn/quadrature.hpp"
#include "rankdyn/summaries.hpp"

namespace rankdyn::sim {

namespace {

constexpr double kGridTol = 1e-12;

struct BasisSums {
  double scale;       // sqrt(sum sigma_k^2 psi_k^2)
  double centered;    // sum (xi_k - mu_k) psi_k
  double mean_slope;  // sum mu_k psi'_k
  double cross;       // sum sigma_k^2 psi_k psi'_k
  double slope;       // sum xi_k psi'_k
};

BasisSums basis_sums(const SimModel& model, const Eigen::Ref<const Eigen::VectorXd>& xi, double t) {
  BasisSums s{0.0, 0.0, 0.0, 0.0, 0.0};
  double var = 0.0;
  for (int k = 0; k < 5; ++k) {
    const BasisValue b = basis_eval(k + 1, t);
    const double mu = model.mu[static_cast<std::size_t>(k)];
    const double s2 = model.sigma[static_cast<std::size_t>(k)] * model.sigma[static_cast<std::size_t>(k)];
    var += s2 * b.psi * b.psi;
    s.centered += (xi(k) - mu) * b.psi;
    s.mean_slope += mu * b.psi_prime;
    s.cross += s2 * b.psi * b.psi_prime;
    s.slope += xi(k) * b.psi_prime;
  }
  s.scale = std::sqrt(var);
  return s;
}

Bandwidths pick_best(const std::vector<Bandwidths>& pairs, const std::vector<double>& score) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const bool better = score[k] < score[best] ||
                        (score[k] == score[best] &&
                         (pairs[k].h_t < pairs[best].h_t ||
                          (pairs[k].h_t == pairs[best].h_t && pairs[k].h_y < pairs[best].h_y)));
    if (better) best = k;
  }
  return pairs[best];
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

BasisValue basis_eval(int k, double t) {
  using std::numbers::pi;
  switch (k) {
    case 1: {
      if (t <= 0.5) return {0.0, 0.0};
      const double d = t - 0.5;
      return {6.0 * d * d, 12.0 * d};
    }
    case 2: {
      const double z = (t - 0.5) / 0.09;
      const double phi = normal_pdf(z);
      return {0.4 + 0.7 / 0.09 * phi, -0.7 / (0.09 * 0.09) * z * phi};
    }
    case 3:
      return {0.6 * std::cos(8.0 * pi * t), -4.8 * pi * std::sin(8.0 * pi * t)};
    case 4:
      return {std::sin(2.0 * pi * t) + 1.0, 2.0 * pi * std::cos(2.0 * pi * t)};
    case 5: {
      const double z = (t - 0.2) / 0.05;
      const double phi = normal_pdf(z);
      return {0.4 / 0.05 * phi, -0.4 / (0.05 * 0.05) * z * phi};
    }
    default:
      throw std::out_of_range("basis index " + std::to_string(k) + " outside 1..5");
  }
}

SimSample generate_sample(const SimModel& model, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw DomainError("simulation needs n >= 1");
  if (model.m < 2) throw DomainError("simulation needs m >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SimSample out;
  out.seed = seed;
  out.xi.resize(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < 5; ++k) {
      out.xi(i, k) = model.mu[static_cast<std::size_t>(k)] + model.sigma[static_cast<std::size_t>(k)] * normal(rng);
    }
  }
  const Eigen::Index points = model.m + 1;
  Eigen::VectorXd grid(points);
  Eigen::MatrixXd basis(points, 5);
  for (Eigen::Index j = 0; j < points; ++j) {
    grid(j) = static_cast<double>(j) / static_cast<double>(model.m);
    for (int k = 0; k < 5; ++k) basis(j, k) = basis_eval(k + 1, grid(j)).psi;
  }
  std::vector<Subject> subjects;
  subjects.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    subjects.push_back({"s" + std::to_string(i), TimeGrid{grid}, basis * out.xi.row(i).transpose()});
  }
  out.sample = FunctionalSample(std::move(subjects), GridCheck::Permissive);
  return out;
}

TrueValues true_values(const SimModel& model, const Eigen::Ref<const Eigen::VectorXd>& xi, double t) {
  if (xi.size() != 5) throw DimensionError("xi must have 5 entries");
  const BasisSums s = basis_sums(model, xi, t);
  const double z = s.centered / s.scale;
  const double phi = normal_pdf(z);
  const double scale3 = s.scale * s.scale * s.scale;
  const double c1 = (-s.mean_slope / s.scale - s.centered * s.cross / scale3) * phi;
  const double c2 = s.slope / s.scale * phi;
  return {normal_cdf(z), c1, c2};
}

SmoothedSample exact_curves(const SimSample& sim, const Eigen::Ref<const Eigen::VectorXd>& grid) {
  Eigen::MatrixXd basis(grid.size(), 5);
  Eigen::MatrixXd slopes(grid.size(), 5);
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    for (int k = 0; k < 5; ++k) {
      const BasisValue b = basis_eval(k + 1, grid(j));
      basis(j, k) = b.psi;
      slopes(j, k) = b.psi_prime;
    }
  }
  SmoothedSample out;
  out.ids = sim.sample.ids();
  out.eval_grid = grid;
  out.values = sim.xi * basis.transpose();
  out.derivatives = sim.xi * slopes.transpose();
  out.bandwidth = 0.0;
  return out;
}

double reference_pooled_sd(const SimModel& model) {
  const int points = model.m + 1;
  double mean_sq = 0.0;
  double mean = 0.0;
  for (int j = 0; j < points; ++j) {
    const double t = static_cast<double>(j) / model.m;
    double e = 0.0;
    double v = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double psi = basis_eval(k + 1, t).psi;
      e += model.mu[static_cast<std::size_t>(k)] * psi;
      v += model.sigma[static_cast<std::size_t>(k)] * model.sigma[static_cast<std::size_t>(k)] * psi * psi;
    }
    mean += e / points;
    mean_sq += (v + e * e) / points;
  }
  return std::sqrt(mean_sq - mean * mean);
}

MiseValue mise(const DecompositionResult& estimates, const SimModel& model,
               const Eigen::Ref<const Eigen::MatrixXd>& xi, double h_max) {
  const Eigen::VectorXd& grid = estimates.trimmed_grid;
  if (xi.rows() != estimates.n() || xi.cols() != 5) throw DimensionError("xi does not match the estimates");
  if (grid.size() < 2 || grid(0) > h_max + kGridTol || grid(grid.size() - 1) < 1.0 - h_max - kGridTol) {
    throw DimensionError("estimates do not cover [" + std::to_string(h_max) + ", " +
                         std::to_string(1.0 - h_max) + "]");
  }
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    if (grid(k) >= h_max - kGridTol && grid(k) <= 1.0 - h_max + kGridTol) cols.push_back(k);
  }
  const auto g = static_cast<Eigen::Index>(cols.size());
  Eigen::VectorXd t(g);
  Eigen::MatrixXd e1(estimates.n(), g);
  Eigen::MatrixXd e2(estimates.n(), g);
  for (Eigen::Index k = 0; k < g; ++k) {
    const Eigen::Index col = cols[static_cast<std::size_t>(k)];
    t(k) = grid(col);
    for (Eigen::Index i = 0; i < estimates.n(); ++i) {
      const TrueValues truth = true_values(model, xi.row(i).transpose(), t(k));
      e1(i, k) = estimates.c1(i, col) - truth.c1;
      e2(i, k) = estimates.c2(i, col) - truth.c2;
    }
  }
  return {trapezoid_rows(t, e1.cwiseAbs2()).mean(), trapezoid_rows(t, e2.cwiseAbs2()).mean()};
}

namespace {

// The uniform grid plus h_max and 1 - h_max, so the MISE interval is covered exactly.
Eigen::VectorXd with_trim_points(const Eigen::VectorXd& grid, double h_max) {
  std::vector<double> points(grid.data(), grid.data() + grid.size());
  for (double t : {h_max, 1.0 - h_max}) {
    const bool present = std::any_of(points.begin(), points.end(), [&](double p) { return std::abs(p - t) <= kGridTol; });
    if (!present) points.push_back(t);
  }
  std::sort(points.begin(), points.end());
  return Eigen::Map<const Eigen::VectorXd>(points.data(), static_cast<Eigen::Index>(points.size()));
}

}  // namespace

MonteCarloReport run_monte_carlo(const SimModel& model, const std::vector<Eigen::Index>& n_list, int runs,
                                 const BandwidthGrid& grid, std::uint64_t base_seed,
                                 const MonteCarloOptions& options) {
  if (runs < 1) throw DomainError("runs must be >= 1");
  grid.validate();
  const double h_max = grid.h_max();
  const Eigen::VectorXd eval_grid = with_trim_points(uniform_grid(0.0, 1.0, options.eval_points), h_max);
  const Eigen::VectorXd truth_grid = uniform_grid(0.0, 1.0, options.truth_points);

  MonteCarloReport report;
  const std::size_t tasks = static_cast<std::size_t>(runs) * n_list.size();
  report.rows.resize(tasks);
  parallel_for(tasks, options.threads, [&](std::size_t task) {
    const int run = static_cast<int>(task / n_list.size());
    const Eigen::Index n = n_list[task % n_list.size()];
    const SimSample sim = generate_sample(model, n, base_seed + static_cast<std::uint64_t>(run));
    const SmoothedSample curves = exact_curves(sim, eval_grid);

    DecomposeOptions decompose_options;
    decompose_options.trim = h_max;
    std::vector<MiseValue> errors;
    std::vector<double> totals;
    for (const auto& bw : grid.pairs) {
      const CdfEstimator estimator(sim.sample, bw, options.kernel);
      errors.push_back(mise(decompose(estimator, curves, decompose_options), model, sim.xi, h_max));
      totals.push_back(errors.back().total());
    }
    const Bandwidths opt = pick_best(grid.pairs, totals);
    const CvReport cv = select_bandwidths(sim.sample, grid, options.kernel);
    const auto index_of = [&](const Bandwidths& bw) {
      return static_cast<std::size_t>(std::find(grid.pairs.begin(), grid.pairs.end(), bw) - grid.pairs.begin());
    };

    // Summary statistics at the CV pick against their closed-form values.
    const CdfEstimator estimator(sim.sample, cv.best, options.kernel);
    const RankTrajectories ranks = smooth_ranks(estimator, curves);
    const DecompositionResult decomp = decompose(estimator, curves, decompose_options);
    const auto summaries = subject_summaries(ranks, decomp);
    const double t_left = decomp.trimmed_grid(0);
    const double t_right = decomp.trimmed_grid(decomp.trimmed_grid.size() - 1);
    double se_rho = 0.0;
    double se_nu = 0.0;
    double se_zeta = 0.0;
    Eigen::VectorXd true_r(truth_grid.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd xi = sim.xi.row(i).transpose();
      for (Eigen::Index k = 0; k < truth_grid.size(); ++k) true_r(k) = true_values(model, xi, truth_grid(k)).r;
      const double rho = trapezoid(truth_grid, true_r);
      const double nu = trapezoid(truth_grid, (true_r.array() - rho).square().matrix());
      const double zeta = true_values(model, xi, t_right).r - true_values(model, xi, t_left).r;
      const auto& est = summaries[static_cast<std::size_t>(i)];
      se_rho += (est.rho - rho) * (est.rho - rho) / static_cast<double>(n);
      se_nu += (est.nu - nu) * (est.nu - nu) / static_cast<double>(n);
      se_zeta += (est.zeta - zeta) * (est.zeta - zeta) / static_cast<double>(n);
    }

    report.rows[task] = {run,  n, cv.best, opt, errors[index_of(cv.best)], errors[index_of(opt)],
                         se_rho, se_nu, se_zeta};
  });
  return report;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace rankdyn::sim
