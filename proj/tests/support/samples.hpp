#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "rankdyn/functional_sample.hpp"
#include "rankdyn/quadrature.hpp"

namespace rankdyn::testing {

/// Grid {j/m : j = 0..m}.
inline Eigen::VectorXd closed_grid(int m) { return uniform_grid(0.0, 1.0, m + 1); }

/// One subject per curve, all observed on `grid`.
inline FunctionalSample make_sample(const std::vector<std::function<double(double)>>& curves,
                                    const Eigen::VectorXd& grid, GridCheck mode = GridCheck::Permissive) {
  std::vector<Subject> subjects;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    Eigen::VectorXd v(grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j) v(j) = curves[i](grid(j));
    subjects.push_back({"s" + std::to_string(i), TimeGrid{grid}, v});
  }
  return FunctionalSample(std::move(subjects), mode);
}

/// Curves and analytic derivatives tabulated on `grid`, shaped like a presmoothed sample.
inline SmoothedSample tabulate(const std::vector<std::function<double(double)>>& curves,
                               const std::vector<std::function<double(double)>>& slopes, const Eigen::VectorXd& grid) {
  SmoothedSample s;
  s.eval_grid = grid;
  s.values.resize(static_cast<Eigen::Index>(curves.size()), grid.size());
  s.derivatives.resize(static_cast<Eigen::Index>(curves.size()), grid.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    s.ids.push_back("s" + std::to_string(i));
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
      s.values(static_cast<Eigen::Index>(i), k) = curves[i](grid(k));
      s.derivatives(static_cast<Eigen::Index>(i), k) = slopes[i](grid(k));
    }
  }
  return s;
}

}  // namespace rankdyn::testing
