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

#ifndef FACEFEAT_PREPROCESS_HPP
#define FACEFEAT_PREPROCESS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/error.hpp"
#include "facefeat/image.hpp"

namespace facefeat {

/// Patch-center position in source-image pixels.
struct PatchCoord {
  double row = 0.0;
  double col = 0.0;
  friend bool operator==(const PatchCoord&, const PatchCoord&) = default;
};

/// Flattened square patches, one per column (row-major within the patch).
struct PatchSet {
  std::size_t side = 0;
  Eigen::MatrixXd data;  // side*side x N
  std::vector<PatchCoord> coords;
  std::vector<std::size_t> source_ids;

  std::size_t size() const noexcept { return static_cast<std::size_t>(data.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data.rows()); }
};

inline std::size_t patch_count(std::size_t height, std::size_t width, std::size_t side, std::size_t stride) {
  if (side > height || side > width || stride == 0) return 0;
  return ((height - side) / stride + 1) * ((width - side) / stride + 1);
}

/// Copies the side x side window with top-left (top, left) into dst.
template <typename Derived>
void copy_patch(const GrayImage& img, std::size_t top, std::size_t left, std::size_t side,
                Eigen::MatrixBase<Derived> const& dst_const) {
  auto& dst = const_cast<Eigen::MatrixBase<Derived>&>(dst_const);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c)
      dst(static_cast<Eigen::Index>(r * side + c)) = img(top + r, left + c);
}

/// Dense extraction in raster order of top-left corners.
inline PatchSet extract_patches(const GrayImage& img, std::size_t side, std::size_t stride,
                                std::size_t source_id = 0) {
  if (side == 0 || stride == 0) throw ValidationError("patch side and stride must be >= 1");
  if (side > img.width() || side > img.height())
    throw DimensionError("patch side " + std::to_string(side) + " exceeds image " +
                         std::to_string(img.width()) + "x" + std::to_string(img.height()));
  const std::size_t rows = (img.height() - side) / stride + 1;
  const std::size_t cols = (img.width() - side) / stride + 1;
  PatchSet out;
  out.side = side;
  out.data.resize(static_cast<Eigen::Index>(side * side), static_cast<Eigen::Index>(rows * cols));
  out.coords.reserve(rows * cols);
  out.source_ids.assign(rows * cols, source_id);
  const double half = (static_cast<double>(side) - 1.0) / 2.0;
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j, ++col) {
      const std::size_t top = i * stride;
      const std::size_t left = j * stride;
      copy_patch(img, top, left, side, out.data.col(col));
      out.coords.push_back({static_cast<double>(top) + half, static_cast<double>(left) + half});
    }
  }
  return out;
}

/// Per-column (x - mean(x)) / sqrt(var(x) + eps), population variance.
inline void contrast_normalize_inplace(Eigen::MatrixXd& data, double eps) {
  if (!(eps > 0.0)) throw ValidationError("contrast normalization epsilon must be > 0");
  const double d = static_cast<double>(data.rows());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    auto x = data.col(j);
    if (x.minCoeff() == x.maxCoeff()) {  // exact zero instead of rounding residue
      x.setZero();
      continue;
    }
    const double mean = x.sum() / d;
    x.array() -= mean;
    const double var = x.squaredNorm() / d;
    x /= std::sqrt(var + eps);
  }
}

inline PatchSet contrast_normalize(PatchSet patches, double eps) {
  contrast_normalize_inplace(patches.data, eps);
  return patches;
}

/// ZCA whitening fitted on a patch sample: x -> transform * (x - mean).
struct WhiteningModel {
  double norm_epsilon = 0.0;
  double zca_epsilon = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd transform;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
};

/// Sample covariance with 1/N normalization.
inline Eigen::MatrixXd patch_covariance(const Eigen::MatrixXd& data, const Eigen::VectorXd& mean) {
  const Eigen::MatrixXd centered = data.colwise() - mean;
  return centered * centered.transpose() / static_cast<double>(data.cols());
}

/// transform = (Sigma + zca_eps I)^{-1/2} through a symmetric eigendecomposition.
/// norm_eps is recorded in the model so the same contrast normalization can be
/// replayed on new images.
inline WhiteningModel zca_fit(const PatchSet& patches, double zca_eps, double norm_eps = 0.0) {
  if (patches.size() == 0) throw ValidationError("zca_fit needs at least one patch");
  if (zca_eps < 0.0) throw ValidationError("zca epsilon must be >= 0");
  WhiteningModel model;
  model.norm_epsilon = norm_eps;
  model.zca_epsilon = zca_eps;
  model.mean = patches.data.rowwise().mean();
  const Eigen::MatrixXd cov = patch_covariance(patches.data, model.mean);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw SingularityError("covariance eigendecomposition failed");
  Eigen::VectorXd shifted = eig.eigenvalues().array() + zca_eps;
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (shifted.minCoeff() <= 1e-12 * scale)
    throw SingularityError("patch covariance is singular; use a positive zca epsilon");
  const Eigen::VectorXd inv_sqrt = shifted.array().rsqrt();
  model.transform = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  // Symmetrize away the round-off of the triple product.
  model.transform = 0.5 * (model.transform + model.transform.transpose()).eval();
  return model;
}

inline void zca_apply_inplace(const WhiteningModel& model, Eigen::MatrixXd& data) {
  if (static_cast<std::size_t>(data.rows()) != model.dim())
    throw DimensionError("patch dimension " + std::to_string(data.rows()) + " does not match whitening model " +
                         std::to_string(model.dim()));
  data.colwise() -= model.mean;
  data = (model.transform * data).eval();
}

inline PatchSet zca_apply(const WhiteningModel& model, PatchSet patches) {
  zca_apply_inplace(model, patches.data);
  return patches;
}

}  // namespace facefeat

#endif  // FACEFEAT_PREPROCESS_HPP
