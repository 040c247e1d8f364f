#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rankdyn/functional_sample.hpp"
#include "rankdyn/kernels.hpp"

namespace rankdyn {

struct Bandwidths {
  double h_y = 0.0;  // in units of Y
  double h_t = 0.0;  // in units of t

  /// Throws DomainError unless h_y > 0 and 0 < h_t < 0.5.
  void validate() const;
  friend bool operator==(const Bandwidths&, const Bandwidths&) = default;
};

/// Rate-based defaults: h_T = 0.3 n^(-1/4), h_Y = s_Y n^(-1/4).
Bandwidths default_bandwidths(const FunctionalSample& sample);

enum class RankMethod { Empirical, Smooth };
std::string to_string(RankMethod method);

struct RankTrajectories {
  std::vector<std::string> ids;
  Eigen::VectorXd eval_grid;
  Eigen::MatrixXd ranks;  // n x G, every entry in [0, 1]
  RankMethod method = RankMethod::Empirical;
};

/// Whether an evaluation time may fall inside the strips [0, h_T) and (1 - h_T, 1].
enum class BoundaryPolicy { Strict, Allow };

/// The five kernel sums Q1..Q5 at one (y, t), each already averaged over subjects.
struct KernelSums {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double q4 = 0.0;
  double q5 = 0.0;
};

struct Partials {
  double d1;  // dF/dt
  double d2;  // dF/dy, always >= 0
};

/// All observations with time inside (t - h_T, t + h_T), sorted by value, with
/// their time-kernel weights. Prefix sums over the sorted order let a query
/// at y touch only the observations with |y - Y| < h_Y.
struct TimeSlice {
  double t = 0.0;
  std::vector<double> y;         // sorted ascending
  std::vector<double> w;         // K((t - t_ij)/h_T) / (n m_i h_T)
  std::vector<double> dw;        // K'((t - t_ij)/h_T) / (n m_i h_T^2)
  std::vector<double> w_prefix;  // w_prefix[k] = sum of w[0..k)
  std::vector<double> dw_prefix;
  std::vector<Eigen::Index> subject;  // subject index of each sorted entry
  double q2 = 0.0;
  double q4 = 0.0;
};

/// The smoothed cross-sectional distribution F~_t(y) = Q1/Q2 and its partial
/// derivatives. Holds a reference to the sample, which must outlive it.
class CdfEstimator {
 public:
  CdfEstimator(const FunctionalSample& sample, Bandwidths bw, KernelSpec kernel = {});

  const FunctionalSample& sample() const { return *sample_; }
  const Bandwidths& bandwidths() const { return bw_; }
  const KernelSpec& kernel() const { return kernel_; }

  /// Throws BoundaryError (Strict, t inside a boundary strip) or
  /// InsufficientDataError (no observation within h_T of t).
  TimeSlice slice(double t, BoundaryPolicy policy = BoundaryPolicy::Strict) const;

  /// Q1..Q5 at (slice.t, y).
  KernelSums sums(const TimeSlice& slice, double y) const;

  double cdf(const TimeSlice& slice, double y) const;
  Partials partials(const TimeSlice& slice, double y) const;

 private:
  const FunctionalSample* sample_;
  Bandwidths bw_;
  KernelSpec kernel_;
};

/// F~_t(y). The raw ratio is returned; it lies in [0, 1] up to rounding.
double smooth_cdf(const CdfEstimator& estimator, double y, double t,
                  BoundaryPolicy policy = BoundaryPolicy::Strict);

/// R^_i(t) = (1/n) sum_{l != i} 1{Y_l(t) <= Y_i(t)} for each column of an n x G matrix.
Eigen::MatrixXd empirical_ranks(const Eigen::Ref<const Eigen::MatrixXd>& values);

RankTrajectories empirical_ranks(const SmoothedSample& smoothed);
/// Ranks of raw values at the given times; every subject must be observed there.
RankTrajectories empirical_ranks(const FunctionalSample& sample,
                                 const Eigen::Ref<const Eigen::VectorXd>& eval_grid);

/// R~_i(t) = F~_t(Y_i(t)) for the curves in `values` (n x G) on `eval_grid`.
/// Reported ranks are clamped to [0, 1]. Boundary times are allowed by
/// default: plain ranks stay well defined there.
Eigen::MatrixXd smooth_ranks(const CdfEstimator& estimator,
                             const Eigen::Ref<const Eigen::VectorXd>& eval_grid,
                             const Eigen::Ref<const Eigen::MatrixXd>& values,
                             BoundaryPolicy policy = BoundaryPolicy::Allow, unsigned threads = 1);

RankTrajectories smooth_ranks(const CdfEstimator& estimator, const SmoothedSample& smoothed,
                              BoundaryPolicy policy = BoundaryPolicy::Allow, unsigned threads = 1);
RankTrajectories smooth_ranks(const CdfEstimator& estimator,
                              const Eigen::Ref<const Eigen::VectorXd>& eval_grid,
                              BoundaryPolicy policy = BoundaryPolicy::Allow, unsigned threads = 1);

}  // namespace rankdyn
