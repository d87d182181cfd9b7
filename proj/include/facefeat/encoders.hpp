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

#ifndef FACEFEAT_ENCODERS_HPP
#define FACEFEAT_ENCODERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/dictionary.hpp"
#include "facefeat/error.hpp"
#include "facefeat/preprocess.hpp"
#include "facefeat/sparse.hpp"

namespace facefeat {

enum class EncoderKind {
  SparseCoding,      // SC
  Llc,               // LLC
  RidgeRegression,   // RR
  SoftThreshold,     // ST
  KMeansTriangle,    // KT
  VectorQuantize,    // VQ
};

inline std::string_view to_string(EncoderKind e) {
  switch (e) {
    case EncoderKind::SparseCoding: return "sc";
    case EncoderKind::Llc: return "llc";
    case EncoderKind::RidgeRegression: return "rr";
    case EncoderKind::SoftThreshold: return "st";
    case EncoderKind::KMeansTriangle: return "kt";
    case EncoderKind::VectorQuantize: return "vq";
  }
  return "?";
}

inline EncoderKind parse_encoder(std::string_view s) {
  if (s == "sc") return EncoderKind::SparseCoding;
  if (s == "llc") return EncoderKind::Llc;
  if (s == "rr") return EncoderKind::RidgeRegression;
  if (s == "st") return EncoderKind::SoftThreshold;
  if (s == "kt") return EncoderKind::KMeansTriangle;
  if (s == "vq") return EncoderKind::VectorQuantize;
  throw ValidationError("unknown encoder '" + std::string(s) + "'");
}

struct EncoderParams {
  double lambda = 1.0;   // SC
  std::size_t knn = 5;   // LLC neighbourhood size
  double delta = 0.01;   // LLC
  double gamma = 0.01;   // RR
  double alpha = 0.25;   // ST
};

/// Encoded patches of one image: one code per column, plus patch centers.
struct CodeMap {
  Eigen::MatrixXd codes;  // k x N
  std::vector<PatchCoord> coords;
  EncoderKind encoder = EncoderKind::SoftThreshold;
  EncoderParams params;
  std::size_t unconverged = 0;  // LASSO solves that hit the sweep limit

  std::size_t dim() const noexcept { return static_cast<std::size_t>(codes.rows()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(codes.cols()); }
};

inline std::size_t code_dimension(EncoderKind e, std::size_t atoms) {
  return e == EncoderKind::SoftThreshold ? 2 * atoms : atoms;
}

namespace detail {

inline void validate(EncoderKind kind, const EncoderParams& p, std::size_t atoms) {
  switch (kind) {
    case EncoderKind::SparseCoding:
      if (!(p.lambda > 0.0)) throw ValidationError("SC lambda must be > 0");
      break;
    case EncoderKind::Llc:
      if (!(p.delta > 0.0)) throw ValidationError("LLC delta must be > 0");
      if (p.knn < 1 || p.knn > atoms) throw ValidationError("LLC K must lie in [1, m]");
      break;
    case EncoderKind::RidgeRegression:
      if (!(p.gamma > 0.0)) throw ValidationError("RR gamma must be > 0");
      break;
    case EncoderKind::SoftThreshold:
      if (!(p.alpha >= 0.0)) throw ValidationError("ST alpha must be >= 0");
      break;
    default:
      break;
  }
}

}  // namespace detail

/// Encoder bound to a dictionary. Construction precomputes whatever the
/// encoder reuses across patches (Gram matrix for SC, the factorization for
/// RR); encode() is const and safe to call concurrently.
class Encoder {
 public:
  Encoder(const Dictionary& dict, EncoderKind kind, EncoderParams params = {})
      : atoms_(dict.atoms), kind_(kind), params_(params) {
    detail::validate(kind_, params_, dict.size());
    if (kind_ == EncoderKind::SparseCoding) gram_ = atoms_.transpose() * atoms_;
    if (kind_ == EncoderKind::RidgeRegression) {
      Eigen::MatrixXd a = atoms_.transpose() * atoms_;
      a.diagonal().array() += params_.gamma;
      ridge_.compute(a);
      if (ridge_.info() != Eigen::Success) throw SingularityError("RR system factorization failed");
    }
  }

  EncoderKind kind() const noexcept { return kind_; }
  const EncoderParams& params() const noexcept { return params_; }
  std::size_t atom_count() const noexcept { return static_cast<std::size_t>(atoms_.cols()); }
  std::size_t code_dim() const noexcept { return code_dimension(kind_, atom_count()); }

  /// Encodes every column of `x` (d x N). `unconverged` (optional) receives
  /// the number of LASSO solves that stopped at the sweep limit.
  Eigen::MatrixXd encode(const Eigen::MatrixXd& x, std::size_t* unconverged = nullptr) const {
    if (x.rows() != atoms_.rows())
      throw DimensionError("patch dimension " + std::to_string(x.rows()) + " does not match dictionary " +
                           std::to_string(atoms_.rows()));
    if (unconverged) *unconverged = 0;
    switch (kind_) {
      case EncoderKind::SparseCoding: return encode_sc(x, unconverged);
      case EncoderKind::Llc: return encode_llc(x);
      case EncoderKind::RidgeRegression: return ridge_.solve(atoms_.transpose() * x);
      case EncoderKind::SoftThreshold: return encode_st(x);
      case EncoderKind::KMeansTriangle: return encode_kt(x);
      case EncoderKind::VectorQuantize: return encode_vq(x);
    }
    throw ValidationError("unknown encoder");
  }

  CodeMap encode(const PatchSet& patches) const {
    CodeMap out;
    out.codes = encode(patches.data, &out.unconverged);
    out.coords = patches.coords;
    out.encoder = kind_;
    out.params = params_;
    return out;
  }

 private:
  Eigen::MatrixXd encode_sc(const Eigen::MatrixXd& x, std::size_t* unconverged) const {
    Eigen::MatrixXd codes(atoms_.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      // Per column so a patch's code does not depend on its batch.
      const Eigen::VectorXd dtx = atoms_.transpose() * x.col(i);
      const LassoResult r = lasso_gram(gram_, dtx, params_.lambda);
      if (!r.converged && unconverged) ++*unconverged;
      codes.col(i) = r.code;
    }
    return codes;
  }

  Eigen::MatrixXd encode_llc(const Eigen::MatrixXd& x) const {
    const Eigen::Index m = atoms_.cols();
    const auto k = static_cast<Eigen::Index>(params_.knn);
    Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(m, x.cols());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const Eigen::VectorXd dist = (atoms_.colwise() - x.col(i)).colwise().squaredNorm().transpose();
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
      });
      // With 1'f = 1 the residual is (x 1' - D_S) f, so the solution is
      // proportional to (Z'Z + delta I)^{-1} 1 with Z = D_S - x 1'.
      Eigen::MatrixXd z(atoms_.rows(), k);
      for (Eigen::Index s = 0; s < k; ++s) z.col(s) = atoms_.col(order[static_cast<std::size_t>(s)]) - x.col(i);
      const Eigen::MatrixXd zz = z.transpose() * z;
      double delta = params_.delta;
      Eigen::VectorXd w;
      bool solved = false;
      for (int attempt = 0; attempt <= 3 && !solved; ++attempt, delta *= 10.0) {
        Eigen::MatrixXd c = zz;
        c.diagonal().array() += delta;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
        if (ldlt.info() != Eigen::Success) continue;
        w = ldlt.solve(Eigen::VectorXd::Ones(k));
        const double total = w.sum();
        solved = w.allFinite() && std::isfinite(total) && std::abs(total) > 1e-300;
        if (solved) w /= total;
      }
      if (!solved) throw SingularityError("LLC constrained system stayed singular after regularization retries");
      for (Eigen::Index s = 0; s < k; ++s) codes(order[static_cast<std::size_t>(s)], i) = w(s);
    }
    return codes;
  }

  Eigen::MatrixXd encode_st(const Eigen::MatrixXd& x) const {
    const Eigen::Index m = atoms_.cols();
    const Eigen::MatrixXd proj = atoms_.transpose() * x;
    Eigen::MatrixXd codes(2 * m, x.cols());
    codes.topRows(m) = (proj.array() - params_.alpha).cwiseMax(0.0);
    codes.bottomRows(m) = (-proj.array() - params_.alpha).cwiseMax(0.0);
    return codes;
  }

  Eigen::MatrixXd encode_kt(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd codes(atoms_.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const Eigen::ArrayXd z = (atoms_.colwise() - x.col(i)).colwise().norm().transpose().array();
      codes.col(i) = (z.mean() - z).cwiseMax(0.0).matrix();
    }
    return codes;
  }

  Eigen::MatrixXd encode_vq(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(atoms_.cols(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const Eigen::VectorXd dist = (atoms_.colwise() - x.col(i)).colwise().squaredNorm().transpose();
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < dist.size(); ++j)
        if (dist(j) < dist(best)) best = j;  // strict: earliest index wins ties
      codes(best, i) = 1.0;
    }
    return codes;
  }

  Eigen::MatrixXd atoms_;
  EncoderKind kind_;
  EncoderParams params_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> ridge_;
};

inline CodeMap encode_sc(const Dictionary& d, const PatchSet& p, double lambda) {
  EncoderParams params;
  params.lambda = lambda;
  return Encoder(d, EncoderKind::SparseCoding, params).encode(p);
}

inline CodeMap encode_llc(const Dictionary& d, const PatchSet& p, std::size_t knn, double delta) {
  EncoderParams params;
  params.knn = knn;
  params.delta = delta;
  return Encoder(d, EncoderKind::Llc, params).encode(p);
}

inline CodeMap encode_rr(const Dictionary& d, const PatchSet& p, double gamma) {
  EncoderParams params;
  params.gamma = gamma;
  return Encoder(d, EncoderKind::RidgeRegression, params).encode(p);
}

inline CodeMap encode_st(const Dictionary& d, const PatchSet& p, double alpha) {
  EncoderParams params;
  params.alpha = alpha;
  return Encoder(d, EncoderKind::SoftThreshold, params).encode(p);
}

inline CodeMap encode_kt(const Dictionary& d, const PatchSet& p) {
  return Encoder(d, EncoderKind::KMeansTriangle).encode(p);
}

inline CodeMap encode_vq(const Dictionary& d, const PatchSet& p) {
  return Encoder(d, EncoderKind::VectorQuantize).encode(p);
}

}  // namespace facefeat

#endif  // FACEFEAT_ENCODERS_HPP
