#include "rankdyn/rank_dynamics.hpp"

#include <cmath>
#include <limits>

#include "rankdyn/errors.hpp"
#include "rankdyn/parallel.hpp"
#include "rankdyn/quadrature.hpp"

namespace rankdyn {

namespace {
constexpr double kGridTol = 1e-12;
}

Partials estimate_partials(const CdfEstimator& estimator, double y, double t) {
  return estimator.partials(estimator.slice(t, BoundaryPolicy::Strict), y);
}

Eigen::VectorXd trimmed_grid(const Eigen::Ref<const Eigen::VectorXd>& grid, double trim) {
  std::vector<double> kept;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    if (grid(k) >= trim - kGridTol && grid(k) <= 1.0 - trim + kGridTol) kept.push_back(grid(k));
  }
  return Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
}

DecompositionResult decompose(const CdfEstimator& estimator, const SmoothedSample& smoothed,
                              const DecomposeOptions& options) {
  if (smoothed.n() != estimator.sample().n()) {
    throw DimensionError("smoothed sample has " + std::to_string(smoothed.n()) +
                         " subjects, raw sample has " + std::to_string(estimator.sample().n()));
  }
  const double trim = options.trim.value_or(estimator.bandwidths().h_t);
  if (trim < estimator.bandwidths().h_t - kGridTol) {
    throw BoundaryError("trim " + std::to_string(trim) + " is narrower than h_T = " +
                        std::to_string(estimator.bandwidths().h_t));
  }

  std::vector<Eigen::Index> columns;
  for (Eigen::Index k = 0; k < smoothed.eval_grid.size(); ++k) {
    const double t = smoothed.eval_grid(k);
    if (t >= trim - kGridTol && t <= 1.0 - trim + kGridTol) columns.push_back(k);
  }
  if (columns.empty()) throw DimensionError("no evaluation point survives boundary trimming");

  const Eigen::Index n = smoothed.n();
  const auto g = static_cast<Eigen::Index>(columns.size());
  DecompositionResult out;
  out.ids = smoothed.ids;
  out.trimmed_grid.resize(g);
  out.c1.resize(n, g);
  out.c2.resize(n, g);
  out.rprime.resize(n, g);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<DecompositionResult::Failure>> failures(columns.size());

  parallel_for(columns.size(), options.threads, [&](std::size_t kk) {
    const auto k = static_cast<Eigen::Index>(kk);
    const Eigen::Index col = columns[kk];
    const double t = smoothed.eval_grid(col);
    out.trimmed_grid(k) = t;
    std::optional<TimeSlice> slice;
    try {
      slice = estimator.slice(t, BoundaryPolicy::Strict);
    } catch (const Error& e) {
      if (options.strict) throw;
      for (Eigen::Index i = 0; i < n; ++i) {
        out.c1(i, k) = out.c2(i, k) = out.rprime(i, k) = nan;
        failures[kk].push_back({i, t, e.what()});
      }
      return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = smoothed.values(i, col);
      const double dy = smoothed.derivatives(i, col);
      const Partials p = estimator.partials(*slice, y);
      const double c1 = p.d1;
      const double c2 = p.d2 * dy;
      if (!std::isfinite(c1) || !std::isfinite(c2)) {
        const std::string reason = "non-finite component for subject '" + smoothed.ids[static_cast<std::size_t>(i)] +
                                   "' at t = " + std::to_string(t);
        if (options.strict) throw EvaluationError(reason);
        out.c1(i, k) = out.c2(i, k) = out.rprime(i, k) = nan;
        failures[kk].push_back({i, t, reason});
        continue;
      }
      out.c1(i, k) = c1;
      out.c2(i, k) = c2;
      out.rprime(i, k) = c1 + c2;
    }
  });
  for (auto& f : failures) out.failures.insert(out.failures.end(), f.begin(), f.end());
  return out;
}

ComponentContributions contributions(const DecompositionResult& decomp) {
  if (decomp.n() == 0) throw DimensionError("empty decomposition");
  if (!decomp.c1.allFinite() || !decomp.c2.allFinite()) {
    throw EvaluationError("decomposition contains unestimated points");
  }
  const Eigen::RowVectorXd mean_abs1 = decomp.c1.cwiseAbs().colwise().mean();
  const Eigen::RowVectorXd mean_abs2 = decomp.c2.cwiseAbs().colwise().mean();
  const double a1 = trapezoid(decomp.trimmed_grid, mean_abs1.transpose());
  const double a2 = trapezoid(decomp.trimmed_grid, mean_abs2.transpose());
  if (!(a1 + a2 > 1e-12)) {
    throw DegenerateSampleError("component magnitudes integrate to zero (all-flat population)");
  }
  const double lambda1 = a1 / (a1 + a2);
  return {lambda1, 1.0 - lambda1};
}

}  // namespace rankdyn
