#pragma once

#include <vector>

#include "rankdyn/functional_sample.hpp"
#include "rankdyn/kernels.hpp"
#include "rankdyn/rank_estimation.hpp"

namespace rankdyn {

/// Candidate (h_Y, h_T) pairs for the cross-validation search.
struct BandwidthGrid {
  std::vector<Bandwidths> pairs;

  /// Largest h_T among the pairs; CV and MISE ignore times within h_max of 0 and 1.
  double h_max() const;
  void validate() const;

  /// {(hy0 * ry^u, ht0 * rt^v) : u, v = 0..count-1}, ordered u-major.
  static BandwidthGrid geometric(double hy0, double ry, double ht0, double rt, int count);
  /// The simulation-scale grid {(2.4 * 0.6^u, 0.3 * 0.6^v) : u, v = 0..3}.
  static BandwidthGrid reference();
  /// The reference grid with the h_Y axis multiplied by `y_scale`.
  static BandwidthGrid reference_scaled(double y_scale);
};

/// Leave-one-subject-out CV objective:
///   sum over (i, j) with t_ij in (h_max, 1 - h_max) of
///   integral [1(Y_ij <= y) - F~_{t_ij, -i}(y)]^2 dy,
/// where F~_{., -i} drops every observation of subject i. The y-integral is a
/// `y_points` trapezoid over [min Y - h_Y, max Y + h_Y] with the jump at Y_ij
/// inserted as an extra node.
double cv_objective(const FunctionalSample& sample, const Bandwidths& bw, double h_max,
                    KernelSpec kernel = {}, int y_points = 201);

struct CvEntry {
  Bandwidths bw;
  double value;
};

struct CvReport {
  std::vector<CvEntry> entries;  // grid order
  Bandwidths best;
  double best_value = 0.0;
};

/// Argmin of cv_objective over the grid; ties go to the smaller h_T, then the smaller h_Y.
CvReport select_bandwidths(const FunctionalSample& sample, const BandwidthGrid& grid,
                           KernelSpec kernel = {}, unsigned threads = 1);

}  // namespace rankdyn
