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

#ifndef FACEFEAT_CLASSIFIER_HPP
#define FACEFEAT_CLASSIFIER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/error.hpp"

namespace facefeat {

/// n x c one-hot indicator matrix.
inline Eigen::MatrixXd label_matrix(std::span<const int> labels, int classes) {
  if (classes < 1) throw ValidationError("class count must be >= 1");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw ValidationError("label out of range");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

/// Per-dimension zero-mean unit-variance map fitted on training rows.
/// Constant dimensions are centered but left unscaled.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 / std, or 1 for constant dimensions

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    const Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / static_cast<double>(x.rows());
    s.scale = var.unaryExpr([](double v) { return v > 1e-24 ? 1.0 / std::sqrt(v) : 1.0; });
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return ((x.rowwise() - mean.transpose()).array().rowwise() * scale.transpose().array()).matrix();
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const { return (z - mean).cwiseProduct(scale); }
};

enum class RidgeForm { Auto, Primal, Dual };

namespace detail {

inline Eigen::MatrixXd spd_solve(Eigen::MatrixXd a, const Eigen::MatrixXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw SingularityError("ridge system is not positive definite");
  return llt.solve(b);
}

}  // namespace detail

/// W = (X'X + delta I)^{-1} X'Y (primal) or X'(XX' + delta I)^{-1} Y (dual).
inline Eigen::MatrixXd ridge_weights(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double delta,
                                     RidgeForm form = RidgeForm::Auto) {
  if (!(delta > 0.0)) throw ValidationError("ridge delta must be > 0");
  if (x.rows() != y.rows()) throw DimensionError("feature and label row counts differ");
  if (form == RidgeForm::Auto) form = x.cols() > x.rows() ? RidgeForm::Dual : RidgeForm::Primal;
  if (form == RidgeForm::Dual) {
    Eigen::MatrixXd k = x * x.transpose();
    k.diagonal().array() += delta;
    return x.transpose() * detail::spd_solve(std::move(k), y);
  }
  Eigen::MatrixXd g = x.transpose() * x;
  g.diagonal().array() += delta;
  return detail::spd_solve(std::move(g), x.transpose() * y);
}

class RidgeClassifier {
 public:
  RidgeClassifier() = default;
  RidgeClassifier(Eigen::MatrixXd weights, double delta, std::optional<Standardizer> standardizer = std::nullopt)
      : weights_(std::move(weights)), delta_(delta), standardizer_(std::move(standardizer)) {}

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  double delta() const noexcept { return delta_; }
  const std::optional<Standardizer>& standardizer() const noexcept { return standardizer_; }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  int class_count() const noexcept { return static_cast<int>(weights_.cols()); }

  Eigen::VectorXd scores(const Eigen::VectorXd& z) const {
    if (static_cast<std::size_t>(z.size()) != feature_dim())
      throw DimensionError("feature length " + std::to_string(z.size()) + " does not match model " +
                           std::to_string(feature_dim()));
    return weights_.transpose() * (standardizer_ ? standardizer_->apply(z) : z);
  }

  /// argmax of W'z; the lowest class index wins ties.
  int predict(const Eigen::VectorXd& z) const { return argmax(scores(z)); }

  std::vector<int> predict_rows(const Eigen::MatrixXd& z) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(z.rows()));
    for (Eigen::Index i = 0; i < z.rows(); ++i) out.push_back(predict(z.row(i).transpose()));
    return out;
  }

  static int argmax(const Eigen::VectorXd& s) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < s.size(); ++j)
      if (s(j) > s(best)) best = j;
    return static_cast<int>(best);
  }

 private:
  Eigen::MatrixXd weights_;
  double delta_ = 0.0;
  std::optional<Standardizer> standardizer_;
};

/// Fits the ridge classifier on row-major samples `x` (n x D). The dual form
/// is used when D > n unless `form` forces one.
inline RidgeClassifier fit_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double delta,
                                 bool standardize = true, RidgeForm form = RidgeForm::Auto) {
  if (x.rows() < 1) throw ValidationError("ridge fit needs at least one sample");
  if (y.cols() < 2) throw ValidationError("ridge classifier needs at least two classes");
  if (!x.allFinite()) throw ValidationError("non-finite feature values");
  if (!standardize) return RidgeClassifier(ridge_weights(x, y, delta, form), delta);
  Standardizer s = Standardizer::fit(x);
  Eigen::MatrixXd w = ridge_weights(s.apply(x), y, delta, form);
  return RidgeClassifier(std::move(w), delta, std::move(s));
}

inline RidgeClassifier fit_ridge(const Eigen::MatrixXd& x, std::span<const int> labels, int classes, double delta,
                                 bool standardize = true) {
  return fit_ridge(x, label_matrix(labels, classes), delta, standardize);
}

/// Collaborative-representation residual classifier: a probe z is coded over
/// all training samples, f = (A'A + gamma I)^{-1} A'z, and class c scores the
/// squared residual ||z - A_c f_c||^2.
class ResidualModel {
 public:
  ResidualModel() = default;

  /// `train` holds one sample per row (n x D).
  ResidualModel(const Eigen::MatrixXd& train, std::vector<int> labels, double gamma)
      : samples_(train.transpose()), labels_(std::move(labels)), gamma_(gamma) {
    if (!(gamma > 0.0)) throw ValidationError("CRC gamma must be > 0");
    if (static_cast<std::size_t>(train.rows()) != labels_.size())
      throw DimensionError("training rows and labels differ in count");
    classes_ = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1;
    Eigen::MatrixXd g = samples_.transpose() * samples_;
    g.diagonal().array() += gamma_;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw SingularityError("CRC system is not positive definite");
    projector_ = llt.solve(samples_.transpose());
  }

  int class_count() const noexcept { return classes_; }
  double gamma() const noexcept { return gamma_; }

  Eigen::VectorXd code(const Eigen::VectorXd& z) const {
    if (z.size() != samples_.rows()) throw DimensionError("probe length does not match training samples");
    return projector_ * z;
  }

  Eigen::VectorXd residuals(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd f = code(z);
    Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(samples_.rows(), classes_);
    for (std::size_t i = 0; i < labels_.size(); ++i)
      recon.col(labels_[i]) += f(static_cast<Eigen::Index>(i)) * samples_.col(static_cast<Eigen::Index>(i));
    return (recon.colwise() - z).colwise().squaredNorm().transpose();
  }

  /// argmin residual; lowest class index wins ties.
  int predict(const Eigen::VectorXd& z) const { return argmin(residuals(z)); }

  static int argmin(const Eigen::VectorXd& r) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < r.size(); ++j)
      if (r(j) < r(best)) best = j;
    return static_cast<int>(best);
  }

 private:
  Eigen::MatrixXd samples_;    // D x n, columns are training samples
  Eigen::MatrixXd projector_;  // n x D
  std::vector<int> labels_;
  double gamma_ = 0.0;
  int classes_ = 0;
};

inline ResidualModel fit_residual_crc(const Eigen::MatrixXd& train, std::vector<int> labels, double gamma) {
  return ResidualModel(train, std::move(labels), gamma);
}

enum class Aggregation { Voting, Sum };

/// Plurality vote over per-patch labels; lowest class index wins ties.
inline int modular_vote(std::span<const int> patch_labels, int classes) {
  if (patch_labels.empty()) throw ValidationError("modular aggregation needs at least one patch");
  std::vector<std::size_t> votes(static_cast<std::size_t>(classes), 0);
  for (int l : patch_labels) {
    if (l < 0 || l >= classes) throw ValidationError("patch label out of range");
    ++votes[static_cast<std::size_t>(l)];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

/// Combines per-patch class residuals (patches x classes). Sum takes the
/// argmin of the column sums; Voting takes each row's argmin as that patch's
/// label and returns the plurality.
inline int modular_aggregate(const Eigen::MatrixXd& residuals, Aggregation mode) {
  if (residuals.rows() < 1) throw ValidationError("modular aggregation needs at least one patch");
  if (mode == Aggregation::Sum) return ResidualModel::argmin(residuals.colwise().sum().transpose());
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(residuals.rows()));
  for (Eigen::Index i = 0; i < residuals.rows(); ++i) labels.push_back(ResidualModel::argmin(residuals.row(i).transpose()));
  return modular_vote(labels, static_cast<int>(residuals.cols()));
}

}  // namespace facefeat

#endif  // FACEFEAT_CLASSIFIER_HPP
