#pragma once

#include <Eigen/Core>
#include <string>

namespace rankdyn::cli {

/// Minimal SVG line chart: one polyline per row of `series`, sharing the x grid.
std::string line_chart(const std::string& title, const Eigen::VectorXd& x, const Eigen::MatrixXd& series);

}  // namespace rankdyn::cli
