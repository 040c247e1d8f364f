#include "rankdyn/bandwidth_cv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rankdyn/errors.hpp"
#include "rankdyn/parallel.hpp"

namespace rankdyn {

namespace {

constexpr double kTimeTol = 1e-12;

struct OwnEntry {
  double y;
  double w;
};

}  // namespace

double BandwidthGrid::h_max() const {
  double h = 0.0;
  for (const auto& p : pairs) h = std::max(h, p.h_t);
  return h;
}

void BandwidthGrid::validate() const {
  if (pairs.empty()) throw DomainError("bandwidth grid is empty");
  for (const auto& p : pairs) p.validate();
}

BandwidthGrid BandwidthGrid::geometric(double hy0, double ry, double ht0, double rt, int count) {
  BandwidthGrid grid;
  for (int u = 0; u < count; ++u) {
    for (int v = 0; v < count; ++v) {
      grid.pairs.push_back({hy0 * std::pow(ry, u), ht0 * std::pow(rt, v)});
    }
  }
  return grid;
}

BandwidthGrid BandwidthGrid::reference() { return geometric(2.4, 0.6, 0.3, 0.6, 4); }

BandwidthGrid BandwidthGrid::reference_scaled(double y_scale) {
  if (!(y_scale > 0.0)) throw DomainError("h_Y scale must be positive");
  return geometric(2.4 * y_scale, 0.6, 0.3, 0.6, 4);
}

double cv_objective(const FunctionalSample& sample, const Bandwidths& bw, double h_max,
                    KernelSpec kernel, int y_points) {
  bw.validate();
  if (sample.n() < 2) throw InsufficientDataError("cross-validation needs at least 2 subjects");
  if (y_points < 2) throw DomainError("y-integration needs at least 2 points");

  // Observations entering the objective, grouped by their (exact) time.
  std::map<double, std::vector<std::pair<Eigen::Index, double>>> by_time;
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    const Subject& s = sample.subject(i);
    for (Eigen::Index j = 0; j < s.grid.size(); ++j) {
      const double t = s.grid.points(j);
      if (t > h_max + kTimeTol && t < 1.0 - h_max - kTimeTol) by_time[t].emplace_back(i, s.values(j));
    }
  }

  const double hy = bw.h_y;
  const double lo = sample.min_value() - hy;
  const double hi = sample.max_value() + hy;
  const double step = (hi - lo) / static_cast<double>(y_points - 1);
  std::vector<double> ys(static_cast<std::size_t>(y_points));
  for (int k = 0; k < y_points; ++k) ys[static_cast<std::size_t>(k)] = lo + step * k;
  ys.back() = hi;

  const CdfEstimator estimator(sample, bw, kernel);
  std::vector<double> total_q1(ys.size());
  std::vector<double> f(ys.size());
  double objective = 0.0;

  for (const auto& [t, observations] : by_time) {
    const TimeSlice slice = estimator.slice(t, BoundaryPolicy::Allow);
    for (std::size_t k = 0; k < ys.size(); ++k) total_q1[k] = estimator.sums(slice, ys[k]).q1;

    std::map<Eigen::Index, std::vector<OwnEntry>> own;
    for (std::size_t e = 0; e < slice.y.size(); ++e) own[slice.subject[e]].push_back({slice.y[e], slice.w[e]});

    for (const auto& [i, yij] : observations) {
      const auto& mine = own[i];
      double own_q2 = 0.0;
      for (const auto& e : mine) own_q2 += e.w;
      const double denom = slice.q2 - own_q2;
      if (!(denom > 1e-14 * slice.q2)) {
        throw InsufficientDataError("leaving out subject '" + sample.subject(i).id +
                                    "' leaves no observation within h_T of t = " + std::to_string(t));
      }
      auto loo_cdf = [&](double y, double q1_all) {
        double own_q1 = 0.0;
        for (const auto& e : mine) own_q1 += e.w * integrated_kernel_eval(kernel, (y - e.y) / hy);
        return (q1_all - own_q1) / denom;
      };
      for (std::size_t k = 0; k < ys.size(); ++k) f[k] = loo_cdf(ys[k], total_q1[k]);
      const double f_jump = loo_cdf(yij, estimator.sums(slice, yij).q1);

      // Integrand is F^2 left of Y_ij and (1 - F)^2 right of it.
      double integral = 0.0;
      for (std::size_t k = 1; k < ys.size(); ++k) {
        const double a = ys[k - 1];
        const double b = ys[k];
        if (b <= yij) {
          integral += 0.5 * (b - a) * (f[k - 1] * f[k - 1] + f[k] * f[k]);
        } else if (a >= yij) {
          integral += 0.5 * (b - a) * ((1.0 - f[k - 1]) * (1.0 - f[k - 1]) + (1.0 - f[k]) * (1.0 - f[k]));
        } else {
          integral += 0.5 * (yij - a) * (f[k - 1] * f[k - 1] + f_jump * f_jump);
          integral += 0.5 * (b - yij) * ((1.0 - f_jump) * (1.0 - f_jump) + (1.0 - f[k]) * (1.0 - f[k]));
        }
      }
      objective += integral;
    }
  }
  return objective;
}

CvReport select_bandwidths(const FunctionalSample& sample, const BandwidthGrid& grid, KernelSpec kernel,
                           unsigned threads) {
  grid.validate();
  const double h_max = grid.h_max();
  CvReport report;
  report.entries.resize(grid.pairs.size());
  parallel_for(grid.pairs.size(), threads, [&](std::size_t k) {
    report.entries[k] = {grid.pairs[k], cv_objective(sample, grid.pairs[k], h_max, kernel)};
  });
  const auto better = [](const CvEntry& a, const CvEntry& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.bw.h_t != b.bw.h_t) return a.bw.h_t < b.bw.h_t;
    return a.bw.h_y < b.bw.h_y;
  };
  const auto best = std::min_element(report.entries.begin(), report.entries.end(), better);
  report.best = best->bw;
  report.best_value = best->value;
  return report;
}

}  // namespace rankdyn
