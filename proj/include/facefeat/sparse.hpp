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

// Sparse coding solvers shared by the dictionary builders and the encoders:
// cyclic coordinate descent for the LASSO and orthogonal matching pursuit.

#ifndef FACEFEAT_SPARSE_HPP
#define FACEFEAT_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/error.hpp"

namespace facefeat {

struct LassoOptions {
  int max_sweeps = 1000;
  double tolerance = 1e-9;  // max absolute coordinate change in a sweep
};

struct LassoResult {
  Eigen::VectorXd code;
  int sweeps = 0;
  bool converged = false;
};

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Minimizes ||D f - x||^2 + lambda ||f||_1 given gram = D'D and dtx = D'x.
/// `warm` (optional, may be empty) seeds the iterate; coordinate descent from
/// any start never increases the objective.
inline LassoResult lasso_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& dtx, double lambda,
                              const Eigen::VectorXd& warm = {}, const LassoOptions& opt = {}) {
  if (!(lambda > 0.0)) throw ValidationError("lasso lambda must be > 0");
  const Eigen::Index m = gram.rows();
  LassoResult res;
  res.code = warm.size() == m ? warm : Eigen::VectorXd::Zero(m);
  Eigen::VectorXd& f = res.code;
  Eigen::VectorXd gf = gram * f;
  const double half_lambda = 0.5 * lambda;

  auto update = [&](Eigen::Index j) {
    const double gjj = gram(j, j);
    if (gjj <= 0.0) {
      if (f(j) != 0.0) {
        gf -= f(j) * gram.col(j);
        f(j) = 0.0;
      }
      return 0.0;
    }
    const double rho = dtx(j) - gf(j) + gjj * f(j);
    const double next = soft_threshold(rho, half_lambda) / gjj;
    const double delta = next - f(j);
    if (delta != 0.0) {
      gf += delta * gram.col(j);
      f(j) = next;
    }
    return std::abs(delta);
  };

  auto objective = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& gv) {
    return v.dot(gv) - 2.0 * dtx.dot(v) + lambda * v.lpNorm<1>();
  };

  // With the signs of the active set fixed the problem is quadratic. Step
  // toward its minimizer, stopping where the first coordinate reaches zero;
  // the objective decreases along that segment. Repeats on the shrunken
  // support until the minimizer keeps every sign.
  auto refine_on_support = [&](std::vector<Eigen::Index> support) {
    while (!support.empty()) {
      const auto k = static_cast<Eigen::Index>(support.size());
      Eigen::MatrixXd g(k, k);
      Eigen::VectorXd rhs(k), cur(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        const auto ja = support[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < k; ++b) g(a, b) = gram(ja, support[static_cast<std::size_t>(b)]);
        cur(a) = f(ja);
        rhs(a) = dtx(ja) - half_lambda * (cur(a) > 0.0 ? 1.0 : -1.0);
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
      const Eigen::VectorXd z = ldlt.solve(rhs);
      if (!z.allFinite()) return;
      double t = 1.0;
      Eigen::Index hit = -1;
      for (Eigen::Index a = 0; a < k; ++a) {
        if ((z(a) > 0.0) == (cur(a) > 0.0) && z(a) != 0.0) continue;
        const double ta = cur(a) / (cur(a) - z(a));
        if (ta < t) {
          t = ta;
          hit = a;
        }
      }
      Eigen::VectorXd cand = f;
      for (Eigen::Index a = 0; a < k; ++a) cand(support[static_cast<std::size_t>(a)]) = cur(a) + t * (z(a) - cur(a));
      if (hit >= 0) cand(support[static_cast<std::size_t>(hit)]) = 0.0;
      const Eigen::VectorXd gc = gram * cand;
      if (!(objective(cand, gc) <= objective(f, gf))) return;
      f = cand;
      gf = gc;
      if (hit < 0) return;
      support.erase(support.begin() + hit);
      std::erase_if(support, [&](Eigen::Index j) { return f(j) == 0.0; });
    }
  };

  // Full sweeps alternate with a few sweeps restricted to the active set,
  // each bracketed by an exact solve on the current support.
  constexpr int kRestrictedPasses = 10;
  std::vector<Eigen::Index> active;
  while (res.sweeps < opt.max_sweeps) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) change = std::max(change, update(j));
    ++res.sweeps;
    if (change <= opt.tolerance) {
      res.converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < m; ++j)
      if (f(j) != 0.0) active.push_back(j);
    refine_on_support(active);
    for (int pass = 0; pass < kRestrictedPasses && res.sweeps < opt.max_sweeps; ++pass) {
      double inner = 0.0;
      for (auto j : active) inner = std::max(inner, update(j));
      ++res.sweeps;
      if (inner <= opt.tolerance) break;
    }
    std::erase_if(active, [&](Eigen::Index j) { return f(j) == 0.0; });
    refine_on_support(active);
  }
  return res;
}

inline LassoResult lasso_solve(const Eigen::MatrixXd& dict, const Eigen::VectorXd& x, double lambda,
                               const LassoOptions& opt = {}) {
  if (x.size() != dict.rows()) throw DimensionError("lasso: signal length does not match dictionary rows");
  return lasso_gram(dict.transpose() * dict, dict.transpose() * x, lambda, {}, opt);
}

inline double lasso_objective(const Eigen::MatrixXd& dict, const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                              double lambda) {
  return (dict * f - x).squaredNorm() + lambda * f.lpNorm<1>();
}

/// Largest violation of the LASSO optimality conditions:
/// |2 D_j'(Df - x)| <= lambda where f_j = 0, and
/// 2 D_j'(Df - x) + lambda sign(f_j) = 0 elsewhere.
inline double lasso_kkt_residual(const Eigen::MatrixXd& dict, const Eigen::VectorXd& x, const Eigen::VectorXd& f,
                                 double lambda) {
  const Eigen::VectorXd grad = 2.0 * dict.transpose() * (dict * f - x);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (f(j) == 0.0) worst = std::max(worst, std::abs(grad(j)) - lambda);
    else worst = std::max(worst, std::abs(grad(j) + lambda * (f(j) > 0 ? 1.0 : -1.0)));
  }
  return std::max(worst, 0.0);
}

/// Orthogonal matching pursuit with at most `sparsity` atoms. Stops early once
/// the residual vanishes. The coefficients on the selected support are the
/// least-squares fit.
inline Eigen::VectorXd omp(const Eigen::MatrixXd& dict, const Eigen::VectorXd& x, std::size_t sparsity,
                           double residual_tolerance = 1e-12) {
  const Eigen::Index m = dict.cols();
  Eigen::VectorXd code = Eigen::VectorXd::Zero(m);
  if (sparsity == 0) return code;
  std::vector<Eigen::Index> support;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  Eigen::VectorXd residual = x;
  Eigen::VectorXd coeffs;
  const double stop = residual_tolerance * std::max(1.0, x.squaredNorm());
  while (support.size() < sparsity && residual.squaredNorm() > stop) {
    const Eigen::VectorXd corr = dict.transpose() * residual;
    Eigen::Index best = -1;
    double best_abs = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double a = std::abs(corr(j));
      if (best < 0 || a > best_abs) {
        best = j;
        best_abs = a;
      }
    }
    if (best < 0 || best_abs == 0.0) break;
    support.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
    Eigen::MatrixXd sub(dict.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = dict.col(support[k]);
    coeffs = sub.colPivHouseholderQr().solve(x);
    residual = x - sub * coeffs;
  }
  for (std::size_t k = 0; k < support.size(); ++k) code(support[k]) = coeffs(static_cast<Eigen::Index>(k));
  return code;
}

}  // namespace facefeat

#endif  // FACEFEAT_SPARSE_HPP
