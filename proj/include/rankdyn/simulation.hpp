#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "rankdyn/bandwidth_cv.hpp"
#include "rankdyn/functional_sample.hpp"
#include "rankdyn/kernels.hpp"
#include "rankdyn/rank_dynamics.hpp"

namespace rankdyn::sim {

/// Standard normal density and distribution function.
double normal_pdf(double x);
double normal_cdf(double x);

/// Five-basis Gaussian model Y(t) = sum_k xi_k psi_k(t), xi_k ~ N(mu_k, sigma_k^2).
struct SimModel {
  std::array<double, 5> mu{1.4, 1.0, 0.0, 0.8, 0.4};
  std::array<double, 5> sigma{1.7, 0.6, 0.5, 0.4, 0.2};
  int m = 31;  // observation grid {j/m : j = 0..m}
};

struct BasisValue {
  double psi;
  double psi_prime;
};

/// psi_k(t) and its derivative, k in 1..5. Throws std::out_of_range for other k.
BasisValue basis_eval(int k, double t);

struct SimSample {
  FunctionalSample sample;
  Eigen::MatrixXd xi;  // n x 5
  std::uint64_t seed = 0;
};

/// Deterministic per seed. Subject ids are "s0", "s1", ...
SimSample generate_sample(const SimModel& model, Eigen::Index n, std::uint64_t seed);

struct TrueValues {
  double r;
  double c1;
  double c2;
};

/// Closed-form rank R_i(t) and components C1_i(t), C2_i(t) for scores xi.
TrueValues true_values(const SimModel& model, const Eigen::Ref<const Eigen::VectorXd>& xi, double t);

/// Exact curve values and derivatives of every subject on `grid`, packaged
/// like a presmoothed sample.
SmoothedSample exact_curves(const SimSample& sim, const Eigen::Ref<const Eigen::VectorXd>& grid);

/// Pooled standard deviation of Y over the model's observation grid, in closed form.
double reference_pooled_sd(const SimModel& model);

struct MiseValue {
  double c1;
  double c2;
  double total() const { return c1 + c2; }
};

/// n^-1 sum_i int_{h_max}^{1-h_max} (C~_li - C_li)^2 dt for l = 1, 2, by
/// trapezoid over the decomposition's grid points inside that interval.
MiseValue mise(const DecompositionResult& estimates, const SimModel& model,
               const Eigen::Ref<const Eigen::MatrixXd>& xi, double h_max);

struct MonteCarloOptions {
  /// Uniform evaluation grid size; h_max and 1 - h_max are added when missing.
  Eigen::Index eval_points = 101;
  KernelSpec kernel{};
  unsigned threads = 1;
  /// Grid resolution for the closed-form rho, nu integrals.
  Eigen::Index truth_points = 1001;
};

struct MonteCarloRow {
  int run;
  Eigen::Index n;
  Bandwidths cv;
  Bandwidths opt;
  MiseValue mise_cv;
  MiseValue mise_opt;
  // Mean squared errors over subjects of the smooth-rank summaries at the CV pick.
  double se_rho;
  double se_nu;
  double se_zeta;
};

struct MonteCarloReport {
  std::vector<MonteCarloRow> rows;  // run-major, then n in input order
};

/// For each run r (seed base_seed + r) and each n: generate a sample, pick the
/// MISE-optimal pair and the CV pair from `grid`, and record both MISEs plus the
/// summary-statistic errors at the CV pick.
MonteCarloReport run_monte_carlo(const SimModel& model, const std::vector<Eigen::Index>& n_list, int runs,
                                 const BandwidthGrid& grid, std::uint64_t base_seed,
                                 const MonteCarloOptions& options = {});

/// Linear-interpolation quantile (type 7) of a copy of `values`.
double quantile(std::vector<double> values, double p);

}  // namespace rankdyn::sim
