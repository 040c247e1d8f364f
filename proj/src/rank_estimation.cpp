#include "rankdyn/rank_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankdyn/errors.hpp"
#include "rankdyn/parallel.hpp"

namespace rankdyn {

namespace {
constexpr double kBoundaryTol = 1e-12;
}

void Bandwidths::validate() const {
  if (!(h_y > 0.0) || !std::isfinite(h_y)) {
    throw DomainError("h_Y must be positive, got " + std::to_string(h_y));
  }
  if (!(h_t > 0.0 && h_t < 0.5)) {
    throw DomainError("h_T must lie in (0, 0.5), got " + std::to_string(h_t));
  }
}

Bandwidths default_bandwidths(const FunctionalSample& sample) {
  const double rate = std::pow(static_cast<double>(sample.n()), -0.25);
  double s = sample.pooled_sd();
  if (!(s > 0.0)) s = 1.0;
  return {s * rate, 0.3 * rate};
}

std::string to_string(RankMethod method) {
  return method == RankMethod::Empirical ? "empirical" : "smooth";
}

CdfEstimator::CdfEstimator(const FunctionalSample& sample, Bandwidths bw, KernelSpec kernel)
    : sample_(&sample), bw_(bw), kernel_(kernel) {
  bw_.validate();
  if (sample.n() < 1) throw DomainError("sample has no subjects");
}

TimeSlice CdfEstimator::slice(double t, BoundaryPolicy policy) const {
  const double ht = bw_.h_t;
  if (policy == BoundaryPolicy::Strict && (t < ht - kBoundaryTol || t > 1.0 - ht + kBoundaryTol)) {
    throw BoundaryError("t = " + std::to_string(t) + " lies in the boundary strip of width h_T = " +
                        std::to_string(ht));
  }
  struct Entry {
    double y, w, dw;
    Eigen::Index subject;
  };
  std::vector<Entry> entries;
  const double n = static_cast<double>(sample_->n());
  for (Eigen::Index i = 0; i < sample_->n(); ++i) {
    const Subject& s = sample_->subject(i);
    const double* begin = s.grid.points.data();
    const double* end = begin + s.grid.size();
    const auto lo = std::upper_bound(begin, end, t - ht) - begin;
    const auto hi = std::lower_bound(begin, end, t + ht) - begin;
    const double scale = 1.0 / (n * static_cast<double>(s.grid.size()) * ht);
    for (auto j = lo; j < hi; ++j) {
      const double u = (t - s.grid.points(j)) / ht;
      const double w = kernel_eval(kernel_, u) * scale;
      const double dw = kernel_deriv_eval(kernel_, u) * scale / ht;
      if (w == 0.0 && dw == 0.0) continue;
      entries.push_back({s.values(j), w, dw, i});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.y < b.y; });

  TimeSlice out;
  out.t = t;
  const std::size_t count = entries.size();
  out.y.resize(count);
  out.w.resize(count);
  out.dw.resize(count);
  out.subject.resize(count);
  out.w_prefix.assign(count + 1, 0.0);
  out.dw_prefix.assign(count + 1, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    out.y[k] = entries[k].y;
    out.w[k] = entries[k].w;
    out.dw[k] = entries[k].dw;
    out.subject[k] = entries[k].subject;
    out.w_prefix[k + 1] = out.w_prefix[k] + entries[k].w;
    out.dw_prefix[k + 1] = out.dw_prefix[k] + entries[k].dw;
  }
  out.q2 = out.w_prefix.back();
  out.q4 = out.dw_prefix.back();
  if (!(out.q2 > 0.0)) {
    throw InsufficientDataError("no observation within h_T = " + std::to_string(ht) + " of t = " +
                                std::to_string(t));
  }
  return out;
}

KernelSums CdfEstimator::sums(const TimeSlice& slice, double y) const {
  const double hy = bw_.h_y;
  const auto lo = static_cast<std::size_t>(
      std::lower_bound(slice.y.begin(), slice.y.end(), y - hy) - slice.y.begin());
  const auto hi = static_cast<std::size_t>(
      std::lower_bound(slice.y.begin() + static_cast<std::ptrdiff_t>(lo), slice.y.end(), y + hy) -
      slice.y.begin());
  KernelSums q;
  q.q2 = slice.q2;
  q.q4 = slice.q4;
  double q1 = 0.0;
  double q3 = 0.0;
  double q5 = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double u = (y - slice.y[k]) / hy;
    const double h = integrated_kernel_eval(kernel_, u);
    q1 += slice.w[k] * h;
    q3 += slice.dw[k] * h;
    q5 += slice.w[k] * kernel_eval(kernel_, u);
  }
  q.q1 = slice.w_prefix[lo] + q1;
  q.q3 = slice.dw_prefix[lo] + q3;
  q.q5 = q5 / hy;
  return q;
}

double CdfEstimator::cdf(const TimeSlice& slice, double y) const {
  const KernelSums q = sums(slice, y);
  return q.q1 / q.q2;
}

Partials CdfEstimator::partials(const TimeSlice& slice, double y) const {
  const KernelSums q = sums(slice, y);
  return {q.q3 / q.q2 - q.q1 * q.q4 / (q.q2 * q.q2), q.q5 / q.q2};
}

double smooth_cdf(const CdfEstimator& estimator, double y, double t, BoundaryPolicy policy) {
  return estimator.cdf(estimator.slice(t, policy), y);
}

Eigen::MatrixXd empirical_ranks(const Eigen::Ref<const Eigen::MatrixXd>& values) {
  const Eigen::Index n = values.rows();
  if (n < 2) throw DomainError("ranks need at least 2 subjects");
  if (!values.allFinite()) throw EvaluationError("non-finite curve value");
  Eigen::MatrixXd ranks(n, values.cols());
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = values(i, k);
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < n; ++i) {
      // Count of l with Y_l <= Y_i, self included, so subtract one.
      const auto at_or_below = std::upper_bound(sorted.begin(), sorted.end(), values(i, k)) - sorted.begin();
      ranks(i, k) = static_cast<double>(at_or_below - 1) / static_cast<double>(n);
    }
  }
  return ranks;
}

RankTrajectories empirical_ranks(const SmoothedSample& smoothed) {
  return {smoothed.ids, smoothed.eval_grid, empirical_ranks(smoothed.values), RankMethod::Empirical};
}

RankTrajectories empirical_ranks(const FunctionalSample& sample,
                                 const Eigen::Ref<const Eigen::VectorXd>& eval_grid) {
  return {sample.ids(), eval_grid, empirical_ranks(sample.values_at(eval_grid)), RankMethod::Empirical};
}

Eigen::MatrixXd smooth_ranks(const CdfEstimator& estimator,
                             const Eigen::Ref<const Eigen::VectorXd>& eval_grid,
                             const Eigen::Ref<const Eigen::MatrixXd>& values, BoundaryPolicy policy,
                             unsigned threads) {
  if (values.cols() != eval_grid.size()) {
    throw DimensionError("curve matrix has " + std::to_string(values.cols()) + " columns, grid has " +
                         std::to_string(eval_grid.size()) + " points");
  }
  Eigen::MatrixXd ranks(values.rows(), values.cols());
  parallel_for(static_cast<std::size_t>(eval_grid.size()), threads, [&](std::size_t kk) {
    const auto k = static_cast<Eigen::Index>(kk);
    const TimeSlice slice = estimator.slice(eval_grid(k), policy);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      ranks(i, k) = std::clamp(estimator.cdf(slice, values(i, k)), 0.0, 1.0);
    }
  });
  return ranks;
}

RankTrajectories smooth_ranks(const CdfEstimator& estimator, const SmoothedSample& smoothed,
                              BoundaryPolicy policy, unsigned threads) {
  return {smoothed.ids, smoothed.eval_grid,
          smooth_ranks(estimator, smoothed.eval_grid, smoothed.values, policy, threads),
          RankMethod::Smooth};
}

RankTrajectories smooth_ranks(const CdfEstimator& estimator,
                              const Eigen::Ref<const Eigen::VectorXd>& eval_grid,
                              BoundaryPolicy policy, unsigned threads) {
  const Eigen::MatrixXd values = estimator.sample().values_at(eval_grid);
  return {estimator.sample().ids(), eval_grid,
          smooth_ranks(estimator, eval_grid, values, policy, threads), RankMethod::Smooth};
}

}  // namespace rankdyn
