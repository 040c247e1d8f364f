#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rankdyn/errors.hpp"
#include "rankdyn/quadrature.hpp"
#include "rankdyn/simulation.hpp"
#include "support/oracles.hpp"

namespace rankdyn {
namespace {

using sim::SimModel;

Eigen::VectorXd model_mean(const SimModel& m) { return Eigen::Map<const Eigen::VectorXd>(m.mu.data(), 5); }

double curve(const Eigen::VectorXd& xi, double t) {
  double y = 0;
  for (int k = 1; k <= 5; ++k) y += xi(k - 1) * sim::basis_eval(k, t).psi;
  return y;
}

TEST(Normal, KnownValues) {
  EXPECT_NEAR(sim::normal_pdf(0.0), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_DOUBLE_EQ(sim::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(sim::normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_NEAR(sim::normal_cdf(-1.0) + sim::normal_cdf(1.0), 1.0, 1e-15);
}

TEST(Basis, PointValues) {
  const double phi0 = 1.0 / std::sqrt(2 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(sim::basis_eval(1, 0.25).psi, 0.0);
  EXPECT_NEAR(sim::basis_eval(1, 0.75).psi, 0.375, 1e-15);
  EXPECT_NEAR(sim::basis_eval(2, 0.5).psi, 0.4 + 0.7 / 0.09 * phi0, 1e-14);
  EXPECT_NEAR(sim::basis_eval(3, 0.0).psi, 0.6, 1e-15);
  EXPECT_NEAR(sim::basis_eval(3, 0.125).psi, -0.6, 1e-14);
  EXPECT_NEAR(sim::basis_eval(4, 0.25).psi, 2.0, 1e-15);
  EXPECT_NEAR(sim::basis_eval(5, 0.2).psi, 8 * phi0, 1e-14);
  EXPECT_THROW(sim::basis_eval(0, 0.5), std::out_of_range);
  EXPECT_THROW(sim::basis_eval(6, 0.5), std::out_of_range);
}

TEST(Basis, DerivativesMatchCentralDifferences) {
  const double d = 1e-6;
  for (int k = 1; k <= 5; ++k) {
    for (int s = 0; s < 200; ++s) {
      const double t = (s + 0.5) / 200.0;
      if (k == 1 && std::abs(t - 0.5) < 1e-3) continue;
      const double fd = (sim::basis_eval(k, t + d).psi - sim::basis_eval(k, t - d).psi) / (2 * d);
      EXPECT_NEAR(sim::basis_eval(k, t).psi_prime, fd, 1e-5 * std::max(1.0, std::abs(fd))) << "k=" << k << " t=" << t;
    }
  }
}

TEST(Generate, DeterministicShapeAndReconstruction) {
  const SimModel model;
  const auto a = sim::generate_sample(model, 12, 314);
  const auto b = sim::generate_sample(model, 12, 314);
  const auto c = sim::generate_sample(model, 12, 315);
  EXPECT_EQ(a.xi, b.xi);
  EXPECT_NE(a.xi, c.xi);
  ASSERT_EQ(a.sample.n(), 12);
  EXPECT_EQ(a.xi.cols(), 5);
  EXPECT_EQ(a.sample.subject(3).id, "s3");
  for (Eigen::Index i = 0; i < 12; ++i) {
    const Subject& s = a.sample.subject(i);
    ASSERT_EQ(s.grid.size(), 32);
    for (Eigen::Index j = 0; j < 32; ++j) {
      EXPECT_DOUBLE_EQ(s.grid.points(j), static_cast<double>(j) / 31.0);
      EXPECT_NEAR(s.values(j), curve(a.xi.row(i).transpose(), s.grid.points(j)), 1e-12);
    }
  }
}

TEST(Generate, ScoreMoments) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 100000, 1);
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd col = s.xi.col(k);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
    EXPECT_NEAR(mean, model.mu[k], 0.02);
    EXPECT_NEAR(sd, model.sigma[k], 0.02);
  }
}

TEST(Generate, ReferencePooledSdAgreesWithLargeSample) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 20000, 6);
  EXPECT_NEAR(sim::reference_pooled_sd(model), s.sample.pooled_sd(), 0.01 * s.sample.pooled_sd());
}

TEST(TrueValues, MedianSubjectAndAboveAverage) {
  const SimModel model;
  const Eigen::VectorXd mean = model_mean(model);
  for (double t : {0.1, 0.37, 0.5, 0.81}) EXPECT_NEAR(sim::true_values(model, mean, t).r, 0.5, 1e-14);
  Eigen::VectorXd high = mean;
  high(0) += 1.0;
  high(3) += 0.5;
  EXPECT_GT(sim::true_values(model, high, 0.8).r, 0.5);
}

TEST(TrueValues, ComponentsSumToRankDerivative) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 10, 8);
  const double d = 1e-6;
  for (Eigen::Index i = 0; i < 10; ++i) {
    const Eigen::VectorXd xi = s.xi.row(i).transpose();
    for (int k = 1; k < 100; ++k) {
      const double t = k / 100.0;
      if (std::abs(t - 0.5) < 1e-3) continue;
      const auto v = sim::true_values(model, xi, t);
      const double fd = (sim::true_values(model, xi, t + d).r - sim::true_values(model, xi, t - d).r) / (2 * d);
      EXPECT_NEAR(v.c1 + v.c2, fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(TrueValues, RankIsMonotoneInTheCurveValue) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 300, 12);
  for (double t : {0.2, 0.5, 0.9}) {
    std::vector<std::pair<double, double>> pairs;
    for (Eigen::Index i = 0; i < 300; ++i)
      pairs.push_back({curve(s.xi.row(i).transpose(), t), sim::true_values(model, s.xi.row(i).transpose(), t).r});
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t k = 1; k < pairs.size(); ++k) EXPECT_LE(pairs[k - 1].second, pairs[k].second);
  }
}

TEST(TrueValues, RanksOfRandomSubjectsAreUniform) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 10000, 99);
  for (double t : {0.3, 0.6}) {
    std::vector<double> r;
    for (Eigen::Index i = 0; i < 10000; ++i) r.push_back(sim::true_values(model, s.xi.row(i).transpose(), t).r);
    std::sort(r.begin(), r.end());
    double ks = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double n = static_cast<double>(r.size());
      ks = std::max({ks, std::abs(r[k] - k / n), std::abs(r[k] - (k + 1) / n)});
    }
    EXPECT_LT(ks, 0.02);
  }
}

DecompositionResult truth_table(const SimModel& model, const Eigen::MatrixXd& xi, const Eigen::VectorXd& grid) {
  DecompositionResult d;
  d.trimmed_grid = grid;
  d.c1.resize(xi.rows(), grid.size());
  d.c2.resize(xi.rows(), grid.size());
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    d.ids.push_back("s" + std::to_string(i));
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
      const auto v = sim::true_values(model, xi.row(i).transpose(), grid(k));
      d.c1(i, k) = v.c1;
      d.c2(i, k) = v.c2;
    }
  }
  d.rprime = d.c1 + d.c2;
  return d;
}

TEST(Mise, ZeroAtTruthAndRestrictedDomain) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 5, 2);
  const Eigen::VectorXd grid = uniform_grid(0.1, 0.9, 81);
  auto d = truth_table(model, s.xi, grid);
  EXPECT_NEAR(sim::mise(d, model, s.xi, 0.3).total(), 0.0, 1e-20);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    if (grid(k) < 0.3 - 1e-9 || grid(k) > 0.7 + 1e-9) d.c1.col(k).array() += 5.0;
  }
  EXPECT_NEAR(sim::mise(d, model, s.xi, 0.3).c1, 0.0, 1e-20);
  d.c2.array() += 0.5;
  EXPECT_NEAR(sim::mise(d, model, s.xi, 0.3).c2, 0.25 * 0.4, 1e-12);
}

TEST(Mise, CoverageAndShapeErrors) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 3, 2);
  const auto d = truth_table(model, s.xi, uniform_grid(0.35, 0.7, 8));
  EXPECT_THROW(sim::mise(d, model, s.xi, 0.3), DimensionError);
  EXPECT_THROW(sim::mise(d, model, s.xi.topRows(2), 0.35), DimensionError);
}

TEST(Mise, QuadratureResolution) {
  const SimModel model;
  const auto s = sim::generate_sample(model, 4, 5);
  auto perturbed = [&](Eigen::Index points) {
    const Eigen::VectorXd grid = uniform_grid(0.3, 0.7, points);
    auto d = truth_table(model, s.xi, grid);
    for (Eigen::Index k = 0; k < grid.size(); ++k) d.c1.col(k).array() += std::sin(9 * grid(k));
    return sim::mise(d, model, s.xi, 0.3).c1;
  };
  const double coarse = perturbed(101), fine = perturbed(10001);
  const double exact = testing::fine_trapezoid([](double t) { return std::pow(std::sin(9 * t), 2); }, 0.3, 0.7, 200001);
  EXPECT_NEAR(coarse, fine, 0.01 * fine);
  EXPECT_NEAR(fine, exact, 1e-8);
}

TEST(Quantile, TypeSeven) {
  EXPECT_DOUBLE_EQ(sim::quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(sim::quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sim::quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(sim::quantile({5}, 0.75), 5.0);
  EXPECT_DOUBLE_EQ(sim::quantile({1, 2, 3, 4}, 1.0), 4.0);
}

TEST(MonteCarlo, SinglePairIsBothPicks) {
  const SimModel model;
  const BandwidthGrid grid{{{1.4, 0.18}}};
  const auto report = sim::run_monte_carlo(model, {15}, 2, grid, 10);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.cv, row.opt);
    EXPECT_EQ(row.mise_cv.total(), row.mise_opt.total());
    EXPECT_GE(row.se_rho, 0.0);
  }
}

TEST(MonteCarlo, SeedContractAndDeterminism) {
  const SimModel model;
  const auto grid = BandwidthGrid::geometric(2.0, 0.6, 0.25, 0.6, 2);
  sim::MonteCarloOptions opts;
  opts.eval_points = 51;
  const auto full = sim::run_monte_carlo(model, {12, 18}, 3, grid, 500, opts);
  ASSERT_EQ(full.rows.size(), 6u);
  EXPECT_EQ(full.rows[0].n, 12);
  EXPECT_EQ(full.rows[1].n, 18);
  EXPECT_EQ(full.rows[5].run, 2);
  const auto third = sim::run_monte_carlo(model, {12, 18}, 1, grid, 502, opts);
  EXPECT_EQ(third.rows[1].cv, full.rows[5].cv);
  EXPECT_EQ(third.rows[1].mise_cv.total(), full.rows[5].mise_cv.total());
  EXPECT_EQ(third.rows[1].se_nu, full.rows[5].se_nu);
  opts.threads = 3;
  const auto threaded = sim::run_monte_carlo(model, {12, 18}, 3, grid, 500, opts);
  for (std::size_t k = 0; k < full.rows.size(); ++k) {
    EXPECT_EQ(threaded.rows[k].mise_opt.total(), full.rows[k].mise_opt.total());
    EXPECT_EQ(threaded.rows[k].se_zeta, full.rows[k].se_zeta);
    EXPECT_LE(full.rows[k].mise_opt.total(), full.rows[k].mise_cv.total());
  }
}

}  // namespace
}  // namespace rankdyn
