#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rankdyn/rank_dynamics.hpp"
#include "rankdyn/rank_estimation.hpp"

namespace rankdyn {

struct SubjectSummary {
  std::string id;
  double rho;   // integrated rank
  double nu;    // rank volatility, <= rho (1 - rho)
  double zeta;  // net rank change between the trimmed endpoints
  double eta;   // integrated squared rank derivative
};

struct PopulationSummary {
  Eigen::VectorXd grid;   // trimmed grid
  Eigen::VectorXd gamma;  // mean squared rank derivative per grid point
  double M;               // integral of gamma
  double G;               // exp(-M)
};

/// rho, nu over the full rank grid; zeta at the decomposition's trimmed
/// endpoints; eta over the trimmed grid. All integrals by trapezoid rule.
std::vector<SubjectSummary> subject_summaries(const RankTrajectories& ranks,
                                              const DecompositionResult& decomp);

PopulationSummary population_summaries(const DecompositionResult& decomp);

}  // namespace rankdyn
