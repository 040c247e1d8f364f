#include "rankdyn/functional_sample.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "rankdyn/errors.hpp"
#include "rankdyn/parallel.hpp"
#include "rankdyn/quadrature.hpp"

namespace rankdyn {

namespace {

constexpr double kGridTol = 1e-12;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no, const char* what) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid " + what + " '" +
                     std::string(field) + "'");
  }
  return value;
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.erase(0, 3);
    }
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

struct Observation {
  double time;
  double value;
  std::size_t line_no;
};

FunctionalSample assemble(std::vector<std::string> order,
                          std::unordered_map<std::string, std::vector<Observation>> rows,
                          GridCheck mode) {
  std::vector<Subject> subjects;
  subjects.reserve(order.size());
  for (const auto& id : order) {
    auto& obs = rows.at(id);
    std::stable_sort(obs.begin(), obs.end(),
                     [](const Observation& a, const Observation& b) { return a.time < b.time; });
    for (std::size_t k = 1; k < obs.size(); ++k) {
      if (obs[k].time == obs[k - 1].time) {
        throw DuplicateError("line " + std::to_string(std::max(obs[k].line_no, obs[k - 1].line_no)) +
                             ": duplicate observation for id '" + id + "' at time " +
                             std::to_string(obs[k].time));
      }
    }
    Subject s;
    s.id = id;
    s.grid.points.resize(static_cast<Eigen::Index>(obs.size()));
    s.values.resize(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t k = 0; k < obs.size(); ++k) {
      s.grid.points(static_cast<Eigen::Index>(k)) = obs[k].time;
      s.values(static_cast<Eigen::Index>(k)) = obs[k].value;
    }
    subjects.push_back(std::move(s));
  }
  return FunctionalSample(std::move(subjects), mode);
}

void check_time(double t, std::size_t line_no) {
  if (t < 0.0 || t > 1.0) {
    throw DomainError("line " + std::to_string(line_no) + ": time " + std::to_string(t) +
                      " outside [0, 1]");
  }
}

}  // namespace

GridCheck parse_grid_check(const std::string& name) {
  if (name == "strict") return GridCheck::Strict;
  if (name == "permissive") return GridCheck::Permissive;
  if (name == "off") return GridCheck::Off;
  throw DomainError("unknown grid check mode '" + name + "'");
}

void TimeGrid::validate(GridCheck mode) const {
  const Eigen::Index m = points.size();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!std::isfinite(points(j)) || points(j) < 0.0 || points(j) > 1.0) {
      throw DomainError("time " + std::to_string(points(j)) + " outside [0, 1]");
    }
    if (j > 0 && !(points(j) > points(j - 1))) {
      throw DomainError("observation times are not strictly increasing");
    }
  }
  if (m == 0 || mode == GridCheck::Off) return;
  const double md = static_cast<double>(m);
  if (mode == GridCheck::Strict) {
    if (points(0) > 1.0 / md + kGridTol) {
      throw DomainError("first time point " + std::to_string(points(0)) + " exceeds 1/m");
    }
    for (Eigen::Index j = 1; j < m; ++j) {
      const double lo = static_cast<double>(j) / md;
      const double hi = static_cast<double>(j + 1) / md;
      if (points(j) <= lo - kGridTol || points(j) > hi + kGridTol) {
        throw DomainError("time point " + std::to_string(points(j)) + " outside its bin (" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    }
    return;
  }
  const double max_gap = 2.0 / md + kGridTol;
  double prev = 0.0;
  for (Eigen::Index j = 0; j <= m; ++j) {
    const double cur = j < m ? points(j) : 1.0;
    if (cur - prev > max_gap) {
      throw DomainError("grid gap " + std::to_string(cur - prev) + " exceeds 2/m = " +
                        std::to_string(2.0 / md));
    }
    prev = cur;
  }
}

FunctionalSample::FunctionalSample(std::vector<Subject> subjects, GridCheck mode)
    : subjects_(std::move(subjects)) {
  for (const auto& s : subjects_) {
    if (s.grid.size() != s.values.size()) {
      throw DimensionError("subject '" + s.id + "': grid and values differ in length");
    }
    if (s.grid.size() == 0) throw DomainError("subject '" + s.id + "' has no observations");
    if (!s.values.allFinite()) throw DomainError("subject '" + s.id + "' has non-finite values");
    try {
      s.grid.validate(mode);
    } catch (const DomainError& e) {
      throw DomainError("subject '" + s.id + "': " + e.what());
    }
  }
}

std::vector<std::string> FunctionalSample::ids() const {
  std::vector<std::string> out;
  out.reserve(subjects_.size());
  for (const auto& s : subjects_) out.push_back(s.id);
  return out;
}

Eigen::Index FunctionalSample::min_observations() const {
  Eigen::Index m = 0;
  for (const auto& s : subjects_) m = (m == 0) ? s.grid.size() : std::min(m, s.grid.size());
  return m;
}

double FunctionalSample::pooled_sd() const {
  double sum = 0.0;
  double count = 0.0;
  for (const auto& s : subjects_) {
    sum += s.values.sum();
    count += static_cast<double>(s.values.size());
  }
  if (count < 2.0) return 0.0;
  const double mean = sum / count;
  double ss = 0.0;
  for (const auto& s : subjects_) ss += (s.values.array() - mean).square().sum();
  return std::sqrt(ss / (count - 1.0));
}

double FunctionalSample::min_value() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& s : subjects_) v = std::min(v, s.values.minCoeff());
  return v;
}

double FunctionalSample::max_value() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& s : subjects_) v = std::max(v, s.values.maxCoeff());
  return v;
}

std::optional<Eigen::VectorXd> FunctionalSample::shared_grid() const {
  if (subjects_.empty()) return std::nullopt;
  const auto& first = subjects_.front().grid.points;
  for (const auto& s : subjects_) {
    if (s.grid.size() != first.size() || (s.grid.points - first).cwiseAbs().maxCoeff() > kGridTol) {
      return std::nullopt;
    }
  }
  return first;
}

Eigen::MatrixXd FunctionalSample::values_at(const Eigen::Ref<const Eigen::VectorXd>& times) const {
  Eigen::MatrixXd out(n(), times.size());
  for (Eigen::Index i = 0; i < n(); ++i) {
    const auto& s = subject(i);
    const double* begin = s.grid.points.data();
    const double* end = begin + s.grid.size();
    for (Eigen::Index k = 0; k < times.size(); ++k) {
      const double t = times(k);
      const double* it = std::lower_bound(begin, end, t - kGridTol);
      if (it == end || std::abs(*it - t) > kGridTol) {
        throw EvaluationError("subject '" + s.id + "' has no observation at t = " + std::to_string(t));
      }
      out(i, k) = s.values(it - begin);
    }
  }
  return out;
}

FunctionalSample load_long_csv(std::istream& source, GridCheck mode) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(source, line, line_no)) throw ParseError("empty input: expected header id,time,value");
  const auto header = split_fields(line);
  if (header.size() != 3 || header[0] != "id" || header[1] != "time" || header[2] != "value") {
    throw ParseError("line " + std::to_string(line_no) + ": expected header 'id,time,value'");
  }
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Observation>> rows;
  while (next_line(source, line, line_no)) {
    const auto fields = split_fields(line);
    if (fields.size() != 3 || fields[0].empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields id,time,value");
    }
    const double t = parse_number(fields[1], line_no, "time");
    const double v = parse_number(fields[2], line_no, "value");
    check_time(t, line_no);
    std::string id(fields[0]);
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back({t, v, line_no});
  }
  if (order.empty()) throw ParseError("no data rows");
  return assemble(std::move(order), std::move(rows), mode);
}

FunctionalSample load_wide_csv(std::istream& source, GridCheck mode) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(source, line, line_no)) throw ParseError("empty input: expected header time,id1,...");
  const auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "time") {
    throw ParseError("line " + std::to_string(line_no) + ": expected header 'time,id1,id2,...'");
  }
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Observation>> rows;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string id(header[c]);
    if (id.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty subject id");
    if (!rows.try_emplace(id).second) {
      throw DuplicateError("line " + std::to_string(line_no) + ": duplicate subject id '" + id + "'");
    }
    order.push_back(id);
  }
  while (next_line(source, line, line_no)) {
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields");
    }
    const double t = parse_number(fields[0], line_no, "time");
    check_time(t, line_no);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      rows[order[c - 1]].push_back({t, parse_number(fields[c], line_no, "value"), line_no});
    }
  }
  if (rows.begin()->second.empty()) throw ParseError("no data rows");
  return assemble(std::move(order), std::move(rows), mode);
}

double default_presmooth_bandwidth(const FunctionalSample& sample) {
  const auto m = sample.min_observations();
  return std::max(0.15, m > 0 ? 3.0 / static_cast<double>(m) : 0.15);
}

SmoothedSample presmooth(const FunctionalSample& sample, double bandwidth,
                         Eigen::Index eval_grid_size, KernelSpec kernel, unsigned threads) {
  if (!(bandwidth > 0.0)) throw DomainError("presmoothing bandwidth must be positive");
  if (eval_grid_size < 2) throw DomainError("evaluation grid needs at least 2 points");

  SmoothedSample out;
  out.ids = sample.ids();
  out.eval_grid = uniform_grid(0.0, 1.0, eval_grid_size);
  out.values.resize(sample.n(), eval_grid_size);
  out.derivatives.resize(sample.n(), eval_grid_size);
  out.bandwidth = bandwidth;

  parallel_for(static_cast<std::size_t>(sample.n()), threads, [&](std::size_t idx) {
    const auto i = static_cast<Eigen::Index>(idx);
    const Subject& s = sample.subject(i);
    const double* begin = s.grid.points.data();
    const double* end = begin + s.grid.size();
    for (Eigen::Index k = 0; k < eval_grid_size; ++k) {
      const double t = out.eval_grid(k);
      const auto lo = std::upper_bound(begin, end, t - bandwidth) - begin;
      const auto hi = std::lower_bound(begin, end, t + bandwidth) - begin;
      const Eigen::Index count = hi - lo;
      Eigen::MatrixXd design(count, 3);
      Eigen::VectorXd rhs(count);
      Eigen::Index used = 0;
      for (Eigen::Index j = lo; j < hi; ++j) {
        const double u = (s.grid.points(j) - t) / bandwidth;
        const double w = kernel_eval(kernel, u);
        if (w <= 0.0) continue;
        const double sw = std::sqrt(w);
        design.row(used) << sw, sw * u, sw * u * u;
        rhs(used) = sw * s.values(j);
        ++used;
      }
      if (used < 3) {
        throw InsufficientDataError("subject '" + s.id + "': fewer than 3 observations within h_D = " +
                                    std::to_string(bandwidth) + " of t = " + std::to_string(t));
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.topRows(used));
      if (qr.rank() < 3) {
        throw InsufficientDataError("subject '" + s.id + "': singular local design at t = " +
                                    std::to_string(t));
      }
      const Eigen::Vector3d beta = qr.solve(rhs.head(used));
      out.values(i, k) = beta(0);
      out.derivatives(i, k) = beta(1) / bandwidth;
    }
  });
  return out;
}

}  // namespace rankdyn
