#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "rankdyn/functional_sample.hpp"
#include "rankdyn/rank_estimation.hpp"

namespace rankdyn {

/// Per-subject rank-derivative components on the boundary-trimmed grid.
/// rprime == c1 + c2 elementwise.
struct DecompositionResult {
  std::vector<std::string> ids;
  Eigen::VectorXd trimmed_grid;
  Eigen::MatrixXd c1;      // population component, n x G'
  Eigen::MatrixXd c2;      // individual component, n x G'
  Eigen::MatrixXd rprime;  // n x G'

  struct Failure {
    Eigen::Index subject;
    double t;
    std::string reason;
  };
  /// Points that could not be estimated in lenient mode; their entries are NaN.
  std::vector<Failure> failures;

  Eigen::Index n() const { return c1.rows(); }
};

struct ComponentContributions {
  double lambda1;
  double lambda2;
};

struct DecomposeOptions {
  /// Half-width of the removed boundary strips; defaults to the h_T in use.
  std::optional<double> trim;
  /// Abort on the first failing (subject, t) instead of marking it.
  bool strict = true;
  unsigned threads = 1;
};

/// (D~1, D~2) at (y, t): the exact t- and y-partials of F~_t(y).
Partials estimate_partials(const CdfEstimator& estimator, double y, double t);

/// Eval grid points of `grid` inside [trim, 1 - trim].
Eigen::VectorXd trimmed_grid(const Eigen::Ref<const Eigen::VectorXd>& grid, double trim);

/// C~1_i(t) = D~1(Y^_i(t), t), C~2_i(t) = D~2(Y^_i(t), t) Y^'_i(t) on the trimmed
/// part of the smoothed sample's grid.
DecompositionResult decompose(const CdfEstimator& estimator, const SmoothedSample& smoothed,
                              const DecomposeOptions& options = {});

/// Lambda1 = int mean|C1| / (int mean|C1| + int mean|C2|), trapezoid rule; Lambda2 = 1 - Lambda1.
ComponentContributions contributions(const DecompositionResult& decomp);

}  // namespace rankdyn
