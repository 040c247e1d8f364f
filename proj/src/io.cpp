#include "rankdyn/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>

#include "rankdyn/errors.hpp"

namespace rankdyn::io {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

void write_ranks_csv(std::ostream& out, const std::vector<const RankTrajectories*>& ranks) {
  out << "id,t,rank,method\n";
  for (const RankTrajectories* r : ranks) {
    const std::string method = to_string(r->method);
    for (Eigen::Index i = 0; i < r->ranks.rows(); ++i) {
      for (Eigen::Index k = 0; k < r->ranks.cols(); ++k) {
        out << r->ids[static_cast<std::size_t>(i)] << ',' << format_double(r->eval_grid(k)) << ','
            << format_double(r->ranks(i, k)) << ',' << method << '\n';
      }
    }
  }
}

void write_decomposition_csv(std::ostream& out, const DecompositionResult& decomp) {
  out << "id,t,c1,c2,rprime\n";
  for (Eigen::Index i = 0; i < decomp.n(); ++i) {
    for (Eigen::Index k = 0; k < decomp.trimmed_grid.size(); ++k) {
      out << decomp.ids[static_cast<std::size_t>(i)] << ',' << format_double(decomp.trimmed_grid(k)) << ','
          << format_double(decomp.c1(i, k)) << ',' << format_double(decomp.c2(i, k)) << ','
          << format_double(decomp.rprime(i, k)) << '\n';
    }
  }
}

nlohmann::json contributions_json(const ComponentContributions& c) {
  return {{"lambda1", c.lambda1}, {"lambda2", c.lambda2}};
}

void write_subject_summaries_csv(std::ostream& out, const std::vector<SubjectSummary>& summaries) {
  out << "id,rho,nu,zeta,eta\n";
  for (const auto& s : summaries) {
    out << s.id << ',' << format_double(s.rho) << ',' << format_double(s.nu) << ',' << format_double(s.zeta)
        << ',' << format_double(s.eta) << '\n';
  }
}

nlohmann::json population_summary_json(const PopulationSummary& summary) {
  return {{"M", summary.M},
          {"G", summary.G},
          {"gamma", std::vector<double>(summary.gamma.data(), summary.gamma.data() + summary.gamma.size())},
          {"t", std::vector<double>(summary.grid.data(), summary.grid.data() + summary.grid.size())}};
}

void write_cv_report_csv(std::ostream& out, const CvReport& report) {
  out << "h_y,h_t,cv_value\n";
  for (const auto& e : report.entries) {
    out << format_double(e.bw.h_y) << ',' << format_double(e.bw.h_t) << ',' << format_double(e.value) << '\n';
  }
}

nlohmann::json cv_choice_json(const CvReport& report) {
  return {{"h_y", report.best.h_y}, {"h_t", report.best.h_t}, {"cv_value", report.best_value}};
}

void write_monte_carlo_csv(std::ostream& out, const sim::MonteCarloReport& report) {
  out << "run,n,h_y_cv,h_t_cv,h_y_opt,h_t_opt,mise_c1_cv,mise_c2_cv,mise_c1_opt,mise_c2_opt\n";
  for (const auto& r : report.rows) {
    out << r.run << ',' << r.n << ',' << format_double(r.cv.h_y) << ',' << format_double(r.cv.h_t) << ','
        << format_double(r.opt.h_y) << ',' << format_double(r.opt.h_t) << ',' << format_double(r.mise_cv.c1)
        << ',' << format_double(r.mise_cv.c2) << ',' << format_double(r.mise_opt.c1) << ','
        << format_double(r.mise_opt.c2) << '\n';
  }
}

void write_summary_errors_csv(std::ostream& out, const sim::MonteCarloReport& report) {
  out << "run,n,se_rho,se_nu,se_zeta\n";
  for (const auto& r : report.rows) {
    out << r.run << ',' << r.n << ',' << format_double(r.se_rho) << ',' << format_double(r.se_nu) << ','
        << format_double(r.se_zeta) << '\n';
  }
}

nlohmann::json monte_carlo_summary_json(const sim::MonteCarloReport& report) {
  std::map<Eigen::Index, std::map<std::string, std::vector<double>>> columns;
  for (const auto& r : report.rows) {
    auto& c = columns[r.n];
    c["mise_total_opt"].push_back(r.mise_opt.total());
    c["mise_total_cv"].push_back(r.mise_cv.total());
    c["mise_ratio_cv_opt"].push_back(r.mise_cv.total() / r.mise_opt.total());
    c["se_rho"].push_back(r.se_rho);
    c["se_nu"].push_back(r.se_nu);
    c["se_zeta"].push_back(r.se_zeta);
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [n, stats] : columns) {
    nlohmann::json entry{{"n", n}, {"runs", stats.begin()->second.size()}};
    for (const auto& [name, values] : stats) {
      entry[name] = {{"q25", sim::quantile(values, 0.25)},
                     {"median", sim::quantile(values, 0.5)},
                     {"q75", sim::quantile(values, 0.75)}};
    }
    out.push_back(std::move(entry));
  }
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    fill(out);
    out.flush();
    if (!out) throw Error("failed while writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rankdyn::io
