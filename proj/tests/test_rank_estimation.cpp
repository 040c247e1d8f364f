#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "rankdyn/errors.hpp"
#include "rankdyn/rank_estimation.hpp"
#include "rankdyn/simulation.hpp"
#include "support/oracles.hpp"
#include "support/samples.hpp"

namespace rankdyn {
namespace {

using testing::closed_grid;
using testing::make_sample;
using testing::naive_cdf;
using testing::naive_sums;

auto constant(double c) {
  return [c](double) { return c; };
}

TEST(Bandwidths, Validation) {
  EXPECT_NO_THROW((Bandwidths{0.1, 0.2}.validate()));
  EXPECT_THROW((Bandwidths{0.0, 0.2}.validate()), DomainError);
  EXPECT_THROW((Bandwidths{0.1, 0.5}.validate()), DomainError);
  EXPECT_THROW((Bandwidths{0.1, -0.1}.validate()), DomainError);
}

TEST(Bandwidths, RateDefaults) {
  const auto s = make_sample({constant(0.0), constant(2.0)}, closed_grid(10));
  const Bandwidths bw = default_bandwidths(s);
  const double rate = std::pow(2.0, -0.25);
  EXPECT_DOUBLE_EQ(bw.h_t, 0.3 * rate);
  EXPECT_NEAR(bw.h_y, s.pooled_sd() * rate, 1e-15);
}

TEST(EmpiricalRanks, ConstantCurves) {
  const auto s = make_sample({constant(1), constant(2), constant(3)}, closed_grid(10));
  const auto r = empirical_ranks(s, closed_grid(10));
  for (Eigen::Index k = 0; k < r.ranks.cols(); ++k) {
    EXPECT_DOUBLE_EQ(r.ranks(0, k), 0.0);
    EXPECT_DOUBLE_EQ(r.ranks(1, k), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.ranks(2, k), 2.0 / 3.0);
  }
  EXPECT_EQ(r.method, RankMethod::Empirical);
}

TEST(EmpiricalRanks, TiesCountedBySelfExcludedIndicator) {
  const auto s = make_sample({constant(4), constant(4)}, closed_grid(4));
  const auto r = empirical_ranks(s, closed_grid(4));
  EXPECT_TRUE((r.ranks.array() == 0.5).all());
}

TEST(EmpiricalRanks, CrossingLines) {
  const auto s = make_sample({[](double t) { return t; }, [](double t) { return 1 - t; }}, closed_grid(4));
  Eigen::VectorXd at(1);
  at << 0.75;
  const auto r = empirical_ranks(s, at);
  EXPECT_DOUBLE_EQ(r.ranks(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.ranks(1, 0), 0.0);
}

TEST(EmpiricalRanks, PermutationWithoutTiesAndMonotoneInvariance) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  const Eigen::Index n = 37;
  Eigen::MatrixXd values(n, 9);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < 9; ++k) values(i, k) = normal(rng);
  const Eigen::MatrixXd r = empirical_ranks(values);
  for (Eigen::Index k = 0; k < 9; ++k) {
    std::vector<double> col(r.col(k).data(), r.col(k).data() + n);
    std::sort(col.begin(), col.end());
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(col[static_cast<std::size_t>(i)], static_cast<double>(i) / n);
  }
  const Eigen::MatrixXd transformed = values.array().exp().cube().matrix();
  EXPECT_EQ(empirical_ranks(transformed), r);
  EXPECT_THROW(empirical_ranks(values.topRows(1)), DomainError);
}

TEST(SmoothCdf, SingleSubjectFarBelowQuery) {
  const auto s = make_sample({constant(2)}, closed_grid(50));
  const CdfEstimator est(s, {0.5, 0.1});
  EXPECT_EQ(smooth_cdf(est, 5.0, 0.5), 1.0);
  EXPECT_EQ(smooth_cdf(est, -5.0, 0.5), 0.0);
}

TEST(SmoothCdf, TwoConstantsMidway) {
  const auto s = make_sample({constant(1), constant(3)}, closed_grid(50));
  const CdfEstimator est(s, {1.5, 0.1});
  EXPECT_NEAR(smooth_cdf(est, 2.0, 0.5), 0.5, 1e-15);
}

TEST(SmoothCdf, MatchesNaiveDoubleSumOnSimulatedSample) {
  const auto sim = sim::generate_sample(sim::SimModel{}, 50, 2024);
  for (const Bandwidths bw : {Bandwidths{0.864, 0.108}, Bandwidths{2.4, 0.3}, Bandwidths{0.5184, 0.0648}}) {
    const CdfEstimator est(sim.sample, bw);
    EXPECT_NEAR(smooth_cdf(est, 0.0, 0.5), naive_cdf(sim.sample, bw, KernelKind::Epanechnikov, 0.0, 0.5), 1e-12);
    const auto slice = est.slice(0.5);
    const KernelSums q = est.sums(slice, 1.3);
    const auto ref = naive_sums(sim.sample, bw, KernelKind::Epanechnikov, 1.3, 0.5);
    EXPECT_NEAR(q.q1, ref.q1, 1e-12);
    EXPECT_NEAR(q.q2, ref.q2, 1e-12);
    EXPECT_NEAR(q.q3, ref.q3, 1e-10);
    EXPECT_NEAR(q.q4, ref.q4, 1e-10);
    EXPECT_NEAR(q.q5, ref.q5, 1e-12);
  }
}

TEST(SmoothCdf, MatchesNaiveOnIrregularPerSubjectGrids) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  std::vector<Subject> subjects;
  for (int i = 0; i < 6; ++i) {
    std::set<double> times;
    const int m = 20 + i * 3;
    while (static_cast<int>(times.size()) < m) times.insert(unif(rng));
    Eigen::VectorXd t(m), v(m);
    int j = 0;
    for (double x : times) {
      t(j) = x;
      v(j++) = normal(rng) + x;
    }
    subjects.push_back({"s" + std::to_string(i), TimeGrid{t}, v});
  }
  const FunctionalSample s(subjects, GridCheck::Off);
  const Bandwidths bw{0.7, 0.2};
  const CdfEstimator est(s, bw);
  for (int r = 0; r < 50; ++r) {
    const double t = 0.2 + 0.6 * unif(rng);
    const double y = 3 * normal(rng);
    EXPECT_NEAR(smooth_cdf(est, y, t), naive_cdf(s, bw, KernelKind::Epanechnikov, y, t), 1e-12);
  }
}

TEST(SmoothCdf, MonotoneInYAndExactTails) {
  const auto sim = sim::generate_sample(sim::SimModel{}, 40, 5);
  const CdfEstimator est(sim.sample, {0.6, 0.15});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ut(0.15, 0.85), uy(-6, 10);
  for (int r = 0; r < 100; ++r) {
    const double t = ut(rng);
    double y1 = uy(rng), y2 = uy(rng);
    if (y1 > y2) std::swap(y1, y2);
    EXPECT_LE(smooth_cdf(est, y1, t), smooth_cdf(est, y2, t) + 1e-15);
  }
  const double lo = sim.sample.min_value() - 0.6;
  const double hi = sim.sample.max_value() + 0.6;
  EXPECT_EQ(smooth_cdf(est, lo - 1e-9, 0.5), 0.0);
  EXPECT_EQ(smooth_cdf(est, hi, 0.5), 1.0);
}

TEST(SmoothCdf, BoundaryAndLocalDataErrors) {
  const auto s = make_sample({constant(1), constant(2)}, closed_grid(20));
  const CdfEstimator est(s, {0.5, 0.2});
  EXPECT_THROW(smooth_cdf(est, 1.0, 0.1), BoundaryError);
  EXPECT_NO_THROW(smooth_cdf(est, 1.0, 0.1, BoundaryPolicy::Allow));
  EXPECT_NO_THROW(smooth_cdf(est, 1.0, 0.2));

  Eigen::VectorXd gappy(6);
  gappy << 0.0, 0.1, 0.2, 0.8, 0.9, 1.0;
  const auto sparse = make_sample({constant(1), constant(2)}, gappy, GridCheck::Off);
  const CdfEstimator est2(sparse, {0.5, 0.1});
  EXPECT_THROW(smooth_cdf(est2, 1.0, 0.5), InsufficientDataError);
}

TEST(SmoothRanks, LowerOfTwoConstants) {
  const auto grid = closed_grid(50);
  const auto s = make_sample({constant(1), constant(3)}, grid);
  const CdfEstimator est(s, {0.5, 0.1});
  const auto r = smooth_ranks(est, grid);
  EXPECT_EQ(r.method, RankMethod::Smooth);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(r.ranks(0, k), 0.25, 1e-14);
    EXPECT_NEAR(r.ranks(1, k), 0.75, 1e-14);
  }
}

TEST(SmoothRanks, CentredOnSimulatedSample) {
  const auto sim = sim::generate_sample(sim::SimModel{}, 200, 8);
  const CdfEstimator est(sim.sample, default_bandwidths(sim.sample));
  const auto curves = sim::exact_curves(sim, uniform_grid(0, 1, 101));
  const auto r = smooth_ranks(est, curves);
  const double mean = r.ranks.col(50).mean();
  EXPECT_GE(mean, 0.45);
  EXPECT_LE(mean, 0.55);
  EXPECT_GE(r.ranks.minCoeff(), 0.0);
  EXPECT_LE(r.ranks.maxCoeff(), 1.0);
}

TEST(SmoothRanks, NotInvariantUnderNonlinearTransform) {
  const auto sim = sim::generate_sample(sim::SimModel{}, 30, 4);
  std::vector<Subject> transformed;
  for (const auto& s : sim.sample.subjects()) transformed.push_back({s.id, s.grid, s.values.array().exp().matrix()});
  const FunctionalSample t_sample(transformed);
  const auto grid = *sim.sample.shared_grid();
  const auto a = smooth_ranks(CdfEstimator(sim.sample, {0.8, 0.15}), grid);
  const auto b = smooth_ranks(CdfEstimator(t_sample, {0.8, 0.15}), grid);
  EXPECT_GT((a.ranks - b.ranks).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_EQ(empirical_ranks(sim.sample, grid).ranks, empirical_ranks(t_sample, grid).ranks);
}

}  // namespace
}  // namespace rankdyn
