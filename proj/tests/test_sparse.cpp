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
#include <vector>

#include <gtest/gtest.h>

#include "facefeat/sparse.hpp"
#include "support.hpp"

namespace ff = facefeat;
using ff::testing::gaussian;
using ff::testing::unit_columns;

namespace {

// Global LASSO minimum by enumerating every support (|S| <= rows) and sign
// pattern: on a fixed sign pattern the objective is quadratic with
// stationary point f_S = (D_S'D_S)^-1 (D_S'x - lambda s / 2); points whose
// signs agree with s are feasible, and the optimum is one of them.
double lasso_brute_force(const Eigen::MatrixXd& d, const Eigen::VectorXd& x, double lambda) {
  const int m = static_cast<int>(d.cols());
  double best = x.squaredNorm();
  std::vector<int> signs(static_cast<std::size_t>(m), 0);
  long total = 1;
  for (int j = 0; j < m; ++j) total *= 3;
  for (long code = 1; code < total; ++code) {
    long c = code;
    std::vector<int> support;
    for (int j = 0; j < m; ++j) {
      signs[static_cast<std::size_t>(j)] = static_cast<int>(c % 3) - 1;
      c /= 3;
      if (signs[static_cast<std::size_t>(j)] != 0) support.push_back(j);
    }
    if (support.size() > static_cast<std::size_t>(d.rows())) continue;
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd ds(d.rows(), k);
    Eigen::VectorXd s(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      ds.col(i) = d.col(support[static_cast<std::size_t>(i)]);
      s(i) = signs[static_cast<std::size_t>(support[static_cast<std::size_t>(i)])];
    }
    const Eigen::VectorXd fs = (ds.transpose() * ds).ldlt().solve(ds.transpose() * x - 0.5 * lambda * s);
    bool consistent = true;
    for (Eigen::Index i = 0; i < k; ++i) consistent = consistent && fs(i) * s(i) > 0.0;
    if (!consistent) continue;
    best = std::min(best, (ds * fs - x).squaredNorm() + lambda * fs.cwiseAbs().sum());
  }
  return best;
}

}  // namespace

TEST(Lasso, IdentityDictionaryIsScalarShrinkage) {
  const Eigen::VectorXd x = gaussian(7, 1, 1);
  const double lambda = 0.8;
  const auto r = ff::lasso_solve(Eigen::MatrixXd::Identity(7, 7), x, lambda);
  for (Eigen::Index j = 0; j < 7; ++j) {
    const double want = std::copysign(std::max(std::abs(x(j)) - lambda / 2.0, 0.0), x(j));
    EXPECT_NEAR(r.code(j), want, 1e-12);
  }
}

TEST(Lasso, LargeLambdaGivesZero) {
  const Eigen::MatrixXd d = unit_columns(gaussian(10, 20, 2));
  const Eigen::VectorXd x = gaussian(10, 1, 3);
  const double lambda = 2.0 * (d.transpose() * x).cwiseAbs().maxCoeff() * 1.001;
  EXPECT_EQ(ff::lasso_solve(d, x, lambda).code.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lasso, MatchesBruteForceOnToyInstances) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Eigen::MatrixXd d = unit_columns(gaussian(8, 12, 10 + seed));
    const Eigen::VectorXd x = gaussian(8, 1, 20 + seed);
    const double lambda = 0.5;
    const auto r = ff::lasso_solve(d, x, lambda);
    EXPECT_NEAR(ff::lasso_objective(d, x, r.code, lambda), lasso_brute_force(d, x, lambda), 1e-5);
  }
}

TEST(Lasso, KktResidualOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto rows = static_cast<Eigen::Index>(5 + seed % 30);
    const auto cols = static_cast<Eigen::Index>(3 + (seed * 7) % 60);
    const Eigen::MatrixXd d = unit_columns(gaussian(rows, cols, 1000 + seed));
    const Eigen::VectorXd x = gaussian(rows, 1, 2000 + seed);
    const double lambda = 0.05 + 0.1 * static_cast<double>(seed % 10);
    const auto r = ff::lasso_solve(d, x, lambda);
    ASSERT_TRUE(r.converged) << "seed " << seed;
    ASSERT_LE(ff::lasso_kkt_residual(d, x, r.code, lambda), 1e-6) << "seed " << seed;
  }
}

TEST(Lasso, WarmStartReachesSameOptimum) {
  const Eigen::MatrixXd d = unit_columns(gaussian(12, 30, 5));
  const Eigen::VectorXd x = gaussian(12, 1, 6);
  const Eigen::MatrixXd gram = d.transpose() * d;
  const auto cold = ff::lasso_gram(gram, d.transpose() * x, 0.3);
  const auto warm = ff::lasso_gram(gram, d.transpose() * x, 0.3, gaussian(30, 1, 7));
  EXPECT_NEAR(ff::lasso_objective(d, x, cold.code, 0.3), ff::lasso_objective(d, x, warm.code, 0.3), 1e-9);
}

TEST(Lasso, RejectsNegativeLambda) {
  EXPECT_THROW(ff::lasso_solve(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2), -1.0), ff::ValidationError);
}

TEST(Omp, RecoversExactSparseSignal) {
  const Eigen::MatrixXd d = unit_columns(gaussian(36, 64, 8));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(64);
  f(3) = 1.5;
  f(40) = -0.7;
  f(17) = 0.9;
  const Eigen::VectorXd got = ff::omp(d, d * f, 5);
  EXPECT_LE((got - f).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Omp, SparsityBoundAndLeastSquaresOnSupport) {
  const Eigen::MatrixXd d = unit_columns(gaussian(16, 40, 9));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Eigen::VectorXd x = gaussian(16, 1, 100 + s);
    const std::size_t t = 1 + s % 6;
    const Eigen::VectorXd f = ff::omp(d, x, t);
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < f.size(); ++j)
      if (f(j) != 0.0) support.push_back(j);
    ASSERT_LE(support.size(), t);
    // Residual is orthogonal to every selected atom.
    const Eigen::VectorXd r = x - d * f;
    for (auto j : support) ASSERT_LE(std::abs(d.col(j).dot(r)), 1e-10);
  }
}
