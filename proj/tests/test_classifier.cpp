// Copyright 2026 The facefeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "facefeat/classifier.hpp"
#include "facefeat/config.hpp"
#include "support.hpp"

namespace ff = facefeat;
using ff::testing::gaussian;

namespace {

std::vector<int> cyclic_labels(int n, int classes) {
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % classes;
  return y;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(Ridge, DefaultDelta) {
  EXPECT_EQ(ff::ExperimentConfig{}.classifier_delta, 0.005);
  EXPECT_EQ(ff::ExperimentConfig::from_map(ff::config_defaults()).classifier_delta, 0.005);
}

TEST(Ridge, OrthonormalOnePerClassApproachesIdentity) {
  const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
  const auto w = ff::ridge_weights(i2, i2, 1e-12);
  EXPECT_LE((w - i2).cwiseAbs().maxCoeff(), 1e-11);
  const auto clf = ff::fit_ridge(i2, i2, 1e-12, false);
  EXPECT_LE((clf.weights() - i2).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Ridge, PrimalDualAgreeAcrossAspectRatios) {
  for (auto [n, d] : {std::pair{50, 300}, {50, 30}, {30, 50}, {5, 200}}) {
    const Eigen::MatrixXd x = gaussian(n, d, static_cast<std::uint64_t>(n * 1000 + d));
    const Eigen::MatrixXd y = ff::label_matrix(cyclic_labels(n, 4), 4);
    for (double delta : {0.005, 0.1, 3.0}) {
      const auto p = ff::ridge_weights(x, y, delta, ff::RidgeForm::Primal);
      const auto q = ff::ridge_weights(x, y, delta, ff::RidgeForm::Dual);
      EXPECT_LE(rel_diff(p, q), 1e-8) << n << "x" << d << " delta " << delta;
    }
  }
}

TEST(Ridge, PredictsTrainingPointsAndMatchesScan) {
  const Eigen::MatrixXd x = gaussian(50, 300, 1);
  const auto labels = cyclic_labels(50, 5);
  const auto clf = ff::fit_ridge(x, labels, 5, 0.005);
  EXPECT_EQ(clf.predict_rows(x), labels);

  const Eigen::MatrixXd probes = gaussian(20, 300, 2);
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    const Eigen::VectorXd s = clf.scores(probes.row(i).transpose());
    int best = 0;
    for (int c = 1; c < 5; ++c)
      if (s(c) > s(best)) best = c;
    ASSERT_EQ(clf.predict(probes.row(i).transpose()), best);
    // Any strictly increasing map of all scores keeps the decision.
    ASSERT_EQ(ff::RidgeClassifier::argmax(s.array().exp().matrix()), best);
    ASSERT_EQ(ff::RidgeClassifier::argmax((3.0 * s.array() + 7.0).cube().matrix()), best);
  }
}

TEST(Ridge, TieGoesToLowestClass) {
  Eigen::MatrixXd w(3, 2);
  w.col(0) << 1, 2, 3;
  w.col(1) = w.col(0);
  const ff::RidgeClassifier clf(w, 0.005);
  EXPECT_EQ(clf.predict(Eigen::Vector3d(0.3, -1, 2)), 0);
  EXPECT_THROW(clf.predict(Eigen::Vector2d(1, 1)), ff::DimensionError);
}

TEST(Ridge, DuplicateRowEqualsDoubledWeight) {
  const Eigen::MatrixXd x = gaussian(6, 4, 3);
  const Eigen::MatrixXd y = ff::label_matrix(cyclic_labels(6, 2), 2);
  Eigen::MatrixXd xd(7, 4), yd(7, 2);
  xd << x, x.row(2);
  yd << y, y.row(2);
  const auto dup = ff::ridge_weights(xd, yd, 0.1, ff::RidgeForm::Primal);
  Eigen::VectorXd wt = Eigen::VectorXd::Ones(6);
  wt(2) = 2.0;
  const Eigen::MatrixXd g = x.transpose() * wt.asDiagonal() * x + 0.1 * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd want = g.ldlt().solve(x.transpose() * wt.asDiagonal() * y);
  EXPECT_LE(rel_diff(dup, want), 1e-12);
}

TEST(Ridge, StandardizerFittedOnTrainOnly) {
  const Eigen::MatrixXd x = gaussian(30, 8, 4) * 5.0;
  const auto clf = ff::fit_ridge(x, cyclic_labels(30, 3), 3, 0.005);
  ASSERT_TRUE(clf.standardizer().has_value());
  EXPECT_LE((clf.standardizer()->mean - x.colwise().mean().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::MatrixXd z = clf.standardizer()->apply(x);
  EXPECT_LE(z.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(((z.colwise().squaredNorm() / 30.0).array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Ridge, Validation) {
  EXPECT_THROW(ff::ridge_weights(gaussian(3, 2, 1), gaussian(3, 2, 2), 0.0), ff::ValidationError);
  EXPECT_THROW(ff::ridge_weights(gaussian(3, 2, 1), gaussian(4, 2, 2), 0.1), ff::DimensionError);
  Eigen::MatrixXd bad = gaussian(4, 2, 3);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(ff::fit_ridge(bad, cyclic_labels(4, 2), 2, 0.1), ff::ValidationError);
  EXPECT_THROW(ff::fit_ridge(gaussian(4, 2, 3), cyclic_labels(4, 1), 1, 0.1), ff::ValidationError);
}

TEST(Crc, ExactTrainingSampleHasZeroResidual) {
  const Eigen::MatrixXd a = gaussian(3, 20, 5);
  const ff::ResidualModel m(a, {0, 1, 2}, 1e-10);
  const Eigen::VectorXd r = m.residuals(a.row(1).transpose());
  EXPECT_LE(r(1), 1e-12);
  EXPECT_GT(r(0), 1.0);
  EXPECT_EQ(m.predict(a.row(1).transpose()), 1);
}

TEST(Crc, HugeGammaGivesNormAndClassZero) {
  const Eigen::MatrixXd a = gaussian(6, 10, 6);
  const ff::ResidualModel m(a, cyclic_labels(6, 3), 1e12);
  const Eigen::VectorXd z = gaussian(10, 1, 7);
  const Eigen::VectorXd r = m.residuals(z);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(r(c), z.squaredNorm(), 1e-9 * z.squaredNorm());
  EXPECT_EQ(ff::ResidualModel::argmin(Eigen::Vector3d::Constant(2.0)), 0);
}

TEST(Crc, MatchesPerClassReconstructionOracle) {
  const Eigen::MatrixXd a = gaussian(10, 15, 8);
  const auto labels = cyclic_labels(10, 3);
  const double gamma = 0.01;
  const ff::ResidualModel m(a, labels, gamma);
  const Eigen::VectorXd z = gaussian(15, 1, 9);
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::VectorXd f = (a * at + gamma * Eigen::MatrixXd::Identity(10, 10)).ldlt().solve(a * z);
  const Eigen::VectorXd r = m.residuals(z);
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(15);
    for (int i = 0; i < 10; ++i)
      if (labels[static_cast<std::size_t>(i)] == c) recon += f(i) * at.col(i);
    EXPECT_NEAR(r(c), (z - recon).squaredNorm(), 1e-8);
    EXPECT_GE(r(c), 0.0);
  }
}

TEST(Crc, SmallerGammaNeverWorsensTotalReconstruction) {
  const Eigen::MatrixXd a = gaussian(8, 12, 10);
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::VectorXd z = gaussian(12, 1, 11);
  double previous = std::numeric_limits<double>::infinity();
  for (double gamma : {100.0, 10.0, 1.0, 0.1, 0.01, 0.001}) {
    const ff::ResidualModel m(a, cyclic_labels(8, 2), gamma);
    const double total = (z - at * m.code(z)).squaredNorm();
    EXPECT_LE(total, previous + 1e-12);
    previous = total;
  }
}

TEST(Modular, AgreementAndVoteCounts) {
  Eigen::MatrixXd agree(3, 4);
  agree << 5, 1, 7, 9, 3, 0.5, 4, 4, 2, 0.1, 8, 8;
  EXPECT_EQ(ff::modular_aggregate(agree, ff::Aggregation::Sum), 1);
  EXPECT_EQ(ff::modular_aggregate(agree, ff::Aggregation::Voting), 1);
  const std::vector<int> votes{2, 0, 2};
  EXPECT_EQ(ff::modular_vote(votes, 3), 2);
  EXPECT_EQ(ff::modular_vote(std::vector<int>{1, 0}, 2), 0);
  EXPECT_THROW(ff::modular_vote(std::vector<int>{}, 2), ff::ValidationError);
}

TEST(Modular, SumMatchesAccumulationOracle) {
  std::mt19937 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd r(9, 5);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = u(gen);
    double best = 1e300;
    int arg = -1;
    for (int c = 0; c < 5; ++c) {
      double s = 0.0;
      for (int p = 0; p < 9; ++p) s += r(p, c);
      if (s < best) {
        best = s;
        arg = c;
      }
    }
    ASSERT_EQ(ff::modular_aggregate(r, ff::Aggregation::Sum), arg);
  }
}
