#pragma once

#include <filesystem>
#include <functional>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "rankdyn/bandwidth_cv.hpp"
#include "rankdyn/rank_dynamics.hpp"
#include "rankdyn/rank_estimation.hpp"
#include "rankdyn/simulation.hpp"
#include "rankdyn/summaries.hpp"

namespace rankdyn::io {

/// Shortest decimal representation that round-trips.
std::string format_double(double value);

/// `id,t,rank,method`, one row per subject and grid point, methods in order.
void write_ranks_csv(std::ostream& out, const std::vector<const RankTrajectories*>& ranks);
/// `id,t,c1,c2,rprime`.
void write_decomposition_csv(std::ostream& out, const DecompositionResult& decomp);
/// `{"lambda1": ..., "lambda2": ...}`.
nlohmann::json contributions_json(const ComponentContributions& c);
/// `id,rho,nu,zeta,eta`.
void write_subject_summaries_csv(std::ostream& out, const std::vector<SubjectSummary>& summaries);
/// `{"M": ..., "G": ..., "gamma": [...], "t": [...]}`.
nlohmann::json population_summary_json(const PopulationSummary& summary);
/// `h_y,h_t,cv_value`.
void write_cv_report_csv(std::ostream& out, const CvReport& report);
nlohmann::json cv_choice_json(const CvReport& report);
/// `run,n,h_y_cv,h_t_cv,h_y_opt,h_t_opt,mise_c1_cv,mise_c2_cv,mise_c1_opt,mise_c2_opt`.
void write_monte_carlo_csv(std::ostream& out, const sim::MonteCarloReport& report);
/// `run,n,se_rho,se_nu,se_zeta`.
void write_summary_errors_csv(std::ostream& out, const sim::MonteCarloReport& report);
/// Per-n quartiles of the MISE totals, the CV/optimal ratio and the summary errors.
nlohmann::json monte_carlo_summary_json(const sim::MonteCarloReport& report);

/// Writes through `fill` into a temporary sibling file, then renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill);

}  // namespace rankdyn::io
