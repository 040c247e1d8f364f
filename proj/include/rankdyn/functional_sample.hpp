#pragma once

#include <Eigen/Core>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "rankdyn/kernels.hpp"

namespace rankdyn {

/// How strictly observation grids are checked against the dense-regular design.
enum class GridCheck {
  /// t_1 in [0, 1/m], t_j in ((j-1)/m, j/m] for j >= 2.
  Strict,
  /// Every gap (including from 0 and to 1) is at most 2/m. Accepts {j/m : j = 0..m}.
  Permissive,
  Off,
};

GridCheck parse_grid_check(const std::string& name);

/// Observation times of one subject; strictly increasing inside [0, 1].
struct TimeGrid {
  Eigen::VectorXd points;

  Eigen::Index size() const { return points.size(); }
  /// Throws DomainError when the grid is unordered, leaves [0, 1], or fails `mode`.
  void validate(GridCheck mode) const;
};

struct Subject {
  std::string id;
  TimeGrid grid;
  Eigen::VectorXd values;
};

/// n subject trajectories observed on dense per-subject grids in [0, 1].
class FunctionalSample {
 public:
  FunctionalSample() = default;
  explicit FunctionalSample(std::vector<Subject> subjects, GridCheck mode = GridCheck::Permissive);

  Eigen::Index n() const { return static_cast<Eigen::Index>(subjects_.size()); }
  const std::vector<Subject>& subjects() const { return subjects_; }
  const Subject& subject(Eigen::Index i) const { return subjects_[static_cast<std::size_t>(i)]; }
  std::vector<std::string> ids() const;

  /// Smallest per-subject observation count.
  Eigen::Index min_observations() const;
  /// Sample standard deviation of all Y_ij pooled together.
  double pooled_sd() const;
  double min_value() const;
  double max_value() const;

  /// The common observation grid, when every subject shares one.
  std::optional<Eigen::VectorXd> shared_grid() const;

  /// Raw values at the requested times (n x G). Every subject must have an
  /// observation at every requested time; otherwise EvaluationError.
  Eigen::MatrixXd values_at(const Eigen::Ref<const Eigen::VectorXd>& times) const;

 private:
  std::vector<Subject> subjects_;
};

/// Long CSV with header `id,time,value`. Rows are grouped by id (first-seen
/// order) and sorted by time inside each subject.
FunctionalSample load_long_csv(std::istream& source, GridCheck mode = GridCheck::Permissive);
/// Wide CSV with header `time,id1,id2,...`; one row per time point.
FunctionalSample load_wide_csv(std::istream& source, GridCheck mode = GridCheck::Permissive);

/// Per-subject smoothed curves and first derivatives on a uniform grid.
struct SmoothedSample {
  std::vector<std::string> ids;
  Eigen::VectorXd eval_grid;
  Eigen::MatrixXd values;       // n x G
  Eigen::MatrixXd derivatives;  // n x G
  double bandwidth = 0.0;

  Eigen::Index n() const { return values.rows(); }
};

/// max(0.15, 3/m) with m the smallest per-subject observation count.
double default_presmooth_bandwidth(const FunctionalSample& sample);

/// Local quadratic regression with kernel weights K((t - t_ij)/h_D), evaluated
/// on `eval_grid_size` equally spaced points of [0, 1]. Windows near the
/// boundary are asymmetric. Throws InsufficientDataError if a local design is
/// singular.
SmoothedSample presmooth(const FunctionalSample& sample, double bandwidth,
                         Eigen::Index eval_grid_size, KernelSpec kernel = {},
                         unsigned threads = 1);

}  // namespace rankdyn
