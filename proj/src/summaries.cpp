#include "rankdyn/summaries.hpp"

#include <cmath>

#include "rankdyn/errors.hpp"
#include "rankdyn/quadrature.hpp"

namespace rankdyn {

namespace {

Eigen::Index locate(const Eigen::VectorXd& grid, double t) {
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    if (std::abs(grid(k) - t) <= 1e-12) return k;
  }
  throw DimensionError("trimmed grid point t = " + std::to_string(t) + " is not on the rank grid");
}

}  // namespace

std::vector<SubjectSummary> subject_summaries(const RankTrajectories& ranks,
                                              const DecompositionResult& decomp) {
  const Eigen::Index n = ranks.ranks.rows();
  if (decomp.n() != n) {
    throw DimensionError("rank trajectories have " + std::to_string(n) + " subjects, decomposition has " +
                         std::to_string(decomp.n()));
  }
  if (ranks.ranks.cols() != ranks.eval_grid.size()) throw DimensionError("rank matrix and grid disagree");
  if (decomp.trimmed_grid.size() == 0) throw DimensionError("empty trimmed grid");
  for (Eigen::Index k = 0; k < decomp.trimmed_grid.size(); ++k) locate(ranks.eval_grid, decomp.trimmed_grid(k));
  const Eigen::Index left = locate(ranks.eval_grid, decomp.trimmed_grid(0));
  const Eigen::Index right = locate(ranks.eval_grid, decomp.trimmed_grid(decomp.trimmed_grid.size() - 1));

  const Eigen::VectorXd rho = trapezoid_rows(ranks.eval_grid, ranks.ranks);
  const Eigen::MatrixXd centered = ranks.ranks.colwise() - rho;
  const Eigen::VectorXd nu = trapezoid_rows(ranks.eval_grid, centered.cwiseAbs2());
  const Eigen::VectorXd eta = trapezoid_rows(decomp.trimmed_grid, decomp.rprime.cwiseAbs2());

  std::vector<SubjectSummary> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.push_back({ranks.ids.empty() ? std::to_string(i) : ranks.ids[static_cast<std::size_t>(i)], rho(i),
                   nu(i), ranks.ranks(i, right) - ranks.ranks(i, left), eta(i)});
  }
  return out;
}

PopulationSummary population_summaries(const DecompositionResult& decomp) {
  if (decomp.n() < 1) throw DimensionError("decomposition has no subjects");
  if (!decomp.rprime.allFinite()) throw EvaluationError("decomposition contains unestimated points");
  PopulationSummary out;
  out.grid = decomp.trimmed_grid;
  out.gamma = decomp.rprime.cwiseAbs2().colwise().mean().transpose();
  out.M = trapezoid(out.grid, out.gamma);
  out.G = std::exp(-out.M);
  return out;
}

}  // namespace rankdyn
