#pragma once

#include <Eigen/Core>

#include "rankdyn/errors.hpp"

namespace rankdyn {

/// Composite trapezoid rule for samples y on the (not necessarily uniform) grid x.
template <typename DerivedX, typename DerivedY>
typename DerivedY::Scalar trapezoid(const Eigen::DenseBase<DerivedX>& x,
                                    const Eigen::DenseBase<DerivedY>& y) {
  using Scalar = typename DerivedY::Scalar;
  if (x.size() != y.size()) throw DimensionError("trapezoid: grid and values differ in length");
  Scalar total(0);
  for (Eigen::Index k = 1; k < x.size(); ++k) {
    total += Scalar(0.5) * (x(k) - x(k - 1)) * (y(k) + y(k - 1));
  }
  return total;
}

/// Row-wise trapezoid: integrates every row of a matrix against the column grid.
template <typename DerivedX, typename DerivedM>
Eigen::Matrix<typename DerivedM::Scalar, Eigen::Dynamic, 1> trapezoid_rows(
    const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedM>& m) {
  using Scalar = typename DerivedM::Scalar;
  if (x.size() != m.cols()) throw DimensionError("trapezoid_rows: grid and columns differ");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m.rows());
  for (Eigen::Index k = 1; k < x.size(); ++k) {
    out += Scalar(0.5) * (x(k) - x(k - 1)) * (m.col(k) + m.col(k - 1));
  }
  return out;
}

/// G equally spaced points on [a, b], endpoints included exactly.
inline Eigen::VectorXd uniform_grid(double a, double b, Eigen::Index count) {
  Eigen::VectorXd g(count);
  if (count == 1) {
    g(0) = a;
    return g;
  }
  for (Eigen::Index k = 0; k < count; ++k) {
    g(k) = a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  g(count - 1) = b;
  return g;
}

}  // namespace rankdyn
