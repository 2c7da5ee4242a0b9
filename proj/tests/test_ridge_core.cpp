#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bcp/beta_schedule.hpp"
#include "bcp/ridge_core.hpp"

using namespace bcp;

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& g, int d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * n(g);
  return v;
}

}  // namespace

TEST(Ridge, MaintainedInverseMatchesDenseInverse) {
  std::mt19937_64 g(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 10;
    const double lambda = trial % 2 ? 1.0 : 0.1;
    RidgeState r(d, lambda);
    Eigen::MatrixXd sigma = lambda * Eigen::MatrixXd::Identity(d, d);
    const int n = 50 + 23 * trial;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd phi = random_vector(g, d, 1.0 + (i % 7));
      r.update(phi);
      sigma += phi * phi.transpose();
    }
    EXPECT_LE((r.sigma() - sigma).lpNorm<Eigen::Infinity>(), 1e-9 * sigma.lpNorm<Eigen::Infinity>());
    EXPECT_LE((r.sigma_inv() - sigma.inverse()).lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_LE(r.inverse_residual(), 1e-8);
    EXPECT_EQ(r.num_updates(), n);
    const Eigen::VectorXd b = random_vector(g, d, 10.0);
    const Eigen::VectorXd w = r.solve(b);
    EXPECT_LE((sigma * w - b).norm(), 1e-7 * (1.0 + b.norm()));
    const Eigen::VectorXd x = random_vector(g, d);
    EXPECT_NEAR(r.elliptical_norm(x), std::sqrt(x.dot(sigma.inverse() * x)), 1e-9);
  }
}

TEST(Ridge, WeightedUpdateEqualsRepeatedUpdates) {
  std::mt19937_64 g(2);
  RidgeState a(6, 1.0), b(6, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd phi = random_vector(g, 6);
    const int reps = 1 + i % 4;
    a.add_weighted(phi, reps);
    for (int j = 0; j < reps; ++j) b.update(phi);
  }
  EXPECT_LE((a.sigma() - b.sigma()).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE((a.sigma_inv() - b.sigma_inv()).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Ridge, RefactorizeKeepsInverse) {
  std::mt19937_64 g(3);
  RidgeState r(4, 1.0);
  for (int i = 0; i < 600; ++i) r.update(random_vector(g, 4, 1e3));
  EXPECT_LE(r.inverse_residual(), 1e-8);
  const Eigen::MatrixXd before = r.sigma_inv();
  r.refactorize();
  EXPECT_LE((r.sigma_inv() - before).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(r.sigma_inv(), r.sigma_inv().transpose());
}

TEST(Ridge, TargetSumSolveIsRegularizedLeastSquares) {
  std::mt19937_64 g(4);
  const int d = 5, n = 40;
  RidgeState r(d, 2.0);
  TargetSum t(d);
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd phi = random_vector(g, d);
    X.row(i) = phi.transpose();
    y[i] = phi.sum() + 0.1 * i;
    r.update(phi);
    t.add(phi, y[i]);
  }
  const Eigen::VectorXd direct =
      (X.transpose() * X + 2.0 * Eigen::MatrixXd::Identity(d, d)).ldlt().solve(X.transpose() * y);
  EXPECT_LE((r.solve(t) - direct).norm(), 1e-9);
}

TEST(Ridge, RejectsInvalidInput) {
  EXPECT_THROW(RidgeState(0, 1.0), std::invalid_argument);
  EXPECT_THROW(RidgeState(3, 0.0), std::invalid_argument);
  RidgeState r(3, 1.0);
  EXPECT_THROW(r.update(Eigen::VectorXd::Zero(2)), std::invalid_argument);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  bad[1] = std::nan("");
  EXPECT_THROW(r.update(bad), NumericError);
  EXPECT_THROW(r.add_weighted(Eigen::VectorXd::Ones(3), -1.0), NumericError);
  EXPECT_THROW(r.solve(Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(Ridge, EllipticalPotentialBound) {
  std::mt19937_64 g(5);
  const int d = 8, K = 400;
  for (int trial = 0; trial < 5; ++trial) {
    RidgeState r(d, 1.0);
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd phi = random_vector(g, d);
      phi /= phi.norm();
      total += r.quadratic_form(phi);
      r.update(phi);
    }
    EXPECT_LE(total, 2.0 * d * std::log(1.0 + static_cast<double>(K) / d));
  }
}

TEST(BetaSchedule, FixedAndTheoryForms) {
  EXPECT_EQ(BetaSchedule::fixed(0.5).at(17), 0.5);
  EXPECT_THROW(BetaSchedule::fixed(-1.0), std::invalid_argument);
  // Reference values computed independently in double precision.
  EXPECT_NEAR(BetaSchedule::theory_vtr(0.1, 10, 20, 1.0, 2.0).at(100), 254.15056691851092, 1e-9);
  const double dh = 10.0 * 20.0;
  EXPECT_NEAR(BetaSchedule::theory_vi(0.01, 0.1, 10, 20).at(7), 0.01 * dh * std::log(dh * 7 / 0.1), 1e-12);
  EXPECT_THROW(BetaSchedule::fixed(1.0).at(0), std::invalid_argument);
  EXPECT_THROW(BetaSchedule::theory_vi(1.0, 0.0, 10, 20), std::invalid_argument);
  EXPECT_THROW(BetaSchedule::theory_vtr(1.5, 10, 20, 1.0, 1.0), std::invalid_argument);
  const auto vi = BetaSchedule::theory_vi(1.0, 0.1, 3, 4);
  for (int k = 1; k < 50; ++k) EXPECT_LE(vi.at(k), vi.at(k + 1));
  EXPECT_EQ(vi.describe(), "theory_vi");
}
