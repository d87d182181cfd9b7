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

#ifndef FACEFEAT_DICTIONARY_HPP
#define FACEFEAT_DICTIONARY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/error.hpp"
#include "facefeat/parallel.hpp"
#include "facefeat/preprocess.hpp"
#include "facefeat/random.hpp"
#include "facefeat/sparse.hpp"

namespace facefeat {

enum class DictMethod { Random, KMeans, KSVD, SparseCoding };

inline std::string_view to_string(DictMethod m) {
  switch (m) {
    case DictMethod::Random: return "random";
    case DictMethod::KMeans: return "kmeans";
    case DictMethod::KSVD: return "ksvd";
    case DictMethod::SparseCoding: return "sc";
  }
  return "?";
}

inline DictMethod parse_dict_method(std::string_view s) {
  if (s == "random") return DictMethod::Random;
  if (s == "kmeans") return DictMethod::KMeans;
  if (s == "ksvd") return DictMethod::KSVD;
  if (s == "sc" || s == "sparse-coding") return DictMethod::SparseCoding;
  throw ValidationError("unknown dictionary method '" + std::string(s) + "'");
}

/// d x m matrix of unit-norm atoms plus how it was built.
struct Dictionary {
  Eigen::MatrixXd atoms;
  DictMethod method = DictMethod::Random;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(atoms.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(atoms.rows()); }
};

namespace detail {

inline constexpr double kZeroNorm = 1e-12;

// Unit-normalizes every column. Columns with no energy fall back to `fallback`
// (column j of it), then to a coordinate axis.
inline void normalize_columns(Eigen::MatrixXd& atoms, const Eigen::MatrixXd* fallback = nullptr) {
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    double n = atoms.col(j).norm();
    if (n <= kZeroNorm && fallback != nullptr) {
      atoms.col(j) = fallback->col(j);
      n = atoms.col(j).norm();
    }
    if (n <= kZeroNorm) {
      atoms.col(j).setZero();
      atoms(j % atoms.rows(), j) = 1.0;
      n = 1.0;
    }
    atoms.col(j) /= n;
  }
}

inline void check_dictionary_request(const PatchSet& patches, std::size_t m) {
  if (m == 0) throw ValidationError("dictionary size must be >= 1");
  if (patches.size() < m)
    throw InsufficientSamplesError("dictionary of " + std::to_string(m) + " atoms requested from " +
                                   std::to_string(patches.size()) + " patches");
}

// Sparse code of one patch: (atom, coefficient) pairs.
using SparseCode = std::vector<std::pair<Eigen::Index, double>>;

inline void reconstruct_residual(const Eigen::MatrixXd& data, const Eigen::MatrixXd& atoms,
                                 const std::vector<SparseCode>& codes, Eigen::MatrixXd& residual) {
  residual = data;
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (const auto& [j, v] : codes[i]) residual.col(static_cast<Eigen::Index>(i)) -= v * atoms.col(j);
}

// usage[j] = list of (patch index, slot in that patch's code) for atom j.
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> atom_usage(const std::vector<SparseCode>& codes,
                                                                               std::size_t m) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> usage(m);
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t s = 0; s < codes[i].size(); ++s)
      usage[static_cast<std::size_t>(codes[i][s].first)].emplace_back(i, s);
  return usage;
}

}  // namespace detail

/// m distinct patches drawn without replacement (zero-energy patches are
/// skipped), each scaled to unit norm.
inline Dictionary dict_random(const PatchSet& patches, std::size_t m, std::uint64_t seed) {
  detail::check_dictionary_request(patches, m);
  Rng rng(derive_seed(seed, "dict-random"));
  std::vector<std::size_t> order(patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  Dictionary dict{Eigen::MatrixXd(static_cast<Eigen::Index>(patches.dim()), static_cast<Eigen::Index>(m)),
                  DictMethod::Random, seed};
  std::size_t filled = 0;
  for (std::size_t k = 0; k < order.size() && filled < m; ++k) {
    const auto col = patches.data.col(static_cast<Eigen::Index>(order[k]));
    const double n = col.norm();
    if (n <= detail::kZeroNorm) continue;
    dict.atoms.col(static_cast<Eigen::Index>(filled++)) = col / n;
  }
  if (filled < m)
    throw InsufficientSamplesError("only " + std::to_string(filled) + " non-zero patches available for " +
                                   std::to_string(m) + " atoms");
  return dict;
}

struct KMeansResult {
  Eigen::MatrixXd centroids;         // raw cluster means, d x m
  std::vector<Eigen::Index> assignment;
  std::vector<double> objective;     // sum of squared distances after each assignment step
};

/// Lloyd iterations from a k-means++ seeding. An emptied cluster is reseeded
/// with the point farthest from its own centroid. Stops early once the
/// assignment is stable.
inline KMeansResult kmeans(const Eigen::MatrixXd& data, std::size_t m, std::size_t iters, std::uint64_t seed) {
  const Eigen::Index n = data.cols();
  const auto k = static_cast<Eigen::Index>(m);
  if (m == 0 || iters == 0) throw ValidationError("k-means needs m >= 1 and iters >= 1");
  if (n < k) throw InsufficientSamplesError("k-means with more clusters than points");

  Rng rng(derive_seed(seed, "kmeans"));
  KMeansResult res;
  res.centroids.resize(data.rows(), k);

  // k-means++ seeding
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  Eigen::VectorXd closest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index pick = first;
    if (c > 0) {
      const double total = closest.sum();
      if (total > 0.0) {
        double target = rng.uniform01() * total;
        pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (closest(i) <= 0.0) continue;
          pick = i;
          target -= closest(i);
          if (target < 0.0) break;
        }
      } else {
        // Every remaining point duplicates a center; take an unchosen one.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
          if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
        pick = free[rng.uniform_index(free.size())];
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    res.centroids.col(c) = data.col(pick);
    closest = closest.cwiseMin((data.colwise() - data.col(pick)).colwise().squaredNorm().transpose());
    closest(pick) = 0.0;
  }

  res.assignment.assign(static_cast<std::size_t>(n), -1);
  const Eigen::VectorXd data_sq = data.colwise().squaredNorm().transpose();
  for (std::size_t it = 0; it < iters; ++it) {
    // Assignment step.
    const Eigen::VectorXd cent_sq = res.centroids.colwise().squaredNorm().transpose();
    const Eigen::MatrixXd cross = res.centroids.transpose() * data;  // k x n
    bool changed = false;
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d2 = cent_sq(c) - 2.0 * cross(c, i) + data_sq(i);
        if (d2 < best_d) {
          best_d = d2;
          best = c;
        }
      }
      auto& a = res.assignment[static_cast<std::size_t>(i)];
      if (a != best) {
        changed = true;
        a = best;
      }
      objective += (data.col(i) - res.centroids.col(best)).squaredNorm();
    }
    res.objective.push_back(objective);
    if (!changed && it > 0) break;

    // Update step.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(data.rows(), k);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto a = res.assignment[static_cast<std::size_t>(i)];
      sums.col(a) += data.col(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    std::vector<Eigen::Index> empty;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0)
        res.centroids.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      else
        empty.push_back(c);
    }
    if (!empty.empty()) {
      Eigen::VectorXd dist(n);
      for (Eigen::Index i = 0; i < n; ++i)
        dist(i) = (data.col(i) - res.centroids.col(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
      for (auto c : empty) {
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        res.centroids.col(c) = data.col(far);
        res.assignment[static_cast<std::size_t>(far)] = c;
        dist(far) = -1.0;
      }
    }
  }
  return res;
}

inline Dictionary dict_kmeans(const PatchSet& patches, std::size_t m, std::size_t iters, std::uint64_t seed,
                              std::vector<double>* objective = nullptr) {
  detail::check_dictionary_request(patches, m);
  KMeansResult km = kmeans(patches.data, m, iters, seed);
  if (objective) *objective = km.objective;
  Dictionary dict{std::move(km.centroids), DictMethod::KMeans, seed};
  detail::normalize_columns(dict.atoms);
  return dict;
}

struct KsvdOptions {
  std::size_t sparsity = 5;
  std::size_t iters = 30;
  std::size_t power_steps = 8;
  std::optional<Eigen::MatrixXd> initial;  // unit-norm starting atoms; random patches otherwise
};

/// K-SVD: OMP coding alternated with rank-1 atom updates.
///
/// Each patch keeps its previous code when OMP under the current dictionary
/// does worse, and the dominant singular pair of each atom's restricted error
/// is found by power iteration started from the current atom. Both make the
/// reconstruction error non-increasing across outer iterations.
inline Dictionary dict_ksvd(const PatchSet& patches, std::size_t m, const KsvdOptions& opt, std::uint64_t seed,
                            std::vector<double>* objective = nullptr) {
  detail::check_dictionary_request(patches, m);
  if (opt.sparsity < 1 || opt.sparsity > std::min(patches.dim(), m))
    throw ValidationError("K-SVD sparsity must lie in [1, min(d, m)]");
  if (opt.iters < 1) throw ValidationError("K-SVD needs at least one iteration");

  const Eigen::MatrixXd& X = patches.data;
  const std::size_t n = patches.size();
  Eigen::MatrixXd D = opt.initial ? *opt.initial : dict_random(patches, m, seed).atoms;
  if (D.rows() != X.rows() || static_cast<std::size_t>(D.cols()) != m)
    throw DimensionError("K-SVD initial dictionary has the wrong shape");
  detail::normalize_columns(D);

  std::vector<detail::SparseCode> codes(n);
  Eigen::MatrixXd residual;
  if (objective) objective->clear();

  for (std::size_t it = 0; it < opt.iters; ++it) {
    // Sparse coding.
    parallel_for(n, [&](std::size_t i) {
      const auto x = X.col(static_cast<Eigen::Index>(i));
      const Eigen::VectorXd f = omp(D, x, opt.sparsity);
      const double fresh = (x - D * f).squaredNorm();
      Eigen::VectorXd r = x;
      for (const auto& [j, v] : codes[i]) r -= v * D.col(j);
      if (fresh <= r.squaredNorm()) {
        codes[i].clear();
        for (Eigen::Index j = 0; j < f.size(); ++j)
          if (f(j) != 0.0) codes[i].emplace_back(j, f(j));
      }
    });
    detail::reconstruct_residual(X, D, codes, residual);

    // Atom updates.
    auto usage = detail::atom_usage(codes, m);
    Eigen::VectorXd unexplained;  // filled lazily; taken patches are marked -1
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto& members = usage[j];
      if (members.empty()) {
        // Unused atom: swap in the worst-represented patch.
        if (unexplained.size() == 0) unexplained = residual.colwise().squaredNorm().transpose();
        Eigen::Index worst = 0;
        unexplained.maxCoeff(&worst);
        const double nrm = residual.col(worst).norm();
        if (nrm > detail::kZeroNorm) D.col(jj) = residual.col(worst) / nrm;
        unexplained(worst) = -1.0;
        continue;
      }
      Eigen::MatrixXd E(X.rows(), static_cast<Eigen::Index>(members.size()));
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto [i, s] = members[k];
        E.col(static_cast<Eigen::Index>(k)) =
            residual.col(static_cast<Eigen::Index>(i)) + codes[i][s].second * D.col(jj);
      }
      Eigen::VectorXd u = D.col(jj);
      for (std::size_t p = 0; p < opt.power_steps; ++p) {
        Eigen::VectorXd next = E * (E.transpose() * u);
        const double nn = next.norm();
        if (nn <= detail::kZeroNorm) break;
        next /= nn;
        const double moved = (next - u).norm();
        u = next;
        if (moved < 1e-12) break;
      }
      const Eigen::VectorXd g = E.transpose() * u;
      D.col(jj) = u;
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto [i, s] = members[k];
        codes[i][s].second = g(static_cast<Eigen::Index>(k));
        residual.col(static_cast<Eigen::Index>(i)) = E.col(static_cast<Eigen::Index>(k)) - g(static_cast<Eigen::Index>(k)) * u;
      }
    }
    if (objective) objective->push_back(residual.squaredNorm());
  }
  return Dictionary{std::move(D), DictMethod::KSVD, seed};
}

struct SparseCodingOptions {
  double lambda = 1.0;
  std::size_t iters = 10;
  LassoOptions lasso{};
  std::optional<Eigen::MatrixXd> initial;
};

/// Sum over patches of ||D f - x||^2 + lambda ||f||_1.
inline double sparse_coding_objective(const Eigen::MatrixXd& data, const Eigen::MatrixXd& atoms,
                                      const Eigen::MatrixXd& codes, double lambda) {
  return (data - atoms * codes).squaredNorm() + lambda * codes.cwiseAbs().sum();
}

/// Alternates warm-started LASSO coding with one pass of exact atom-wise
/// block coordinate descent on the unit sphere. Atoms that no patch uses are
/// redrawn from random patches (their zero code rows leave the objective
/// unchanged).
inline Dictionary dict_sc(const PatchSet& patches, std::size_t m, const SparseCodingOptions& opt, std::uint64_t seed,
                          std::vector<double>* objective = nullptr) {
  detail::check_dictionary_request(patches, m);
  if (!(opt.lambda > 0.0)) throw ValidationError("sparse coding lambda must be > 0");
  if (opt.iters < 1) throw ValidationError("sparse coding needs at least one iteration");

  const Eigen::MatrixXd& X = patches.data;
  const std::size_t n = patches.size();
  Eigen::MatrixXd D = opt.initial ? *opt.initial : dict_random(patches, m, seed).atoms;
  if (D.rows() != X.rows() || static_cast<std::size_t>(D.cols()) != m)
    throw DimensionError("sparse coding initial dictionary has the wrong shape");
  detail::normalize_columns(D);
  Rng rng(derive_seed(seed, "dict-sc-reinit"));

  std::vector<detail::SparseCode> codes(n);
  Eigen::MatrixXd residual;
  if (objective) objective->clear();

  for (std::size_t it = 0; it < opt.iters; ++it) {
    const Eigen::MatrixXd gram = D.transpose() * D;
    parallel_for(n, [&](std::size_t i) {
      const auto x = X.col(static_cast<Eigen::Index>(i));
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
      for (const auto& [j, v] : codes[i]) warm(j) = v;
      const LassoResult r = lasso_gram(gram, D.transpose() * x, opt.lambda, warm, opt.lasso);
      codes[i].clear();
      for (Eigen::Index j = 0; j < r.code.size(); ++j)
        if (r.code(j) != 0.0) codes[i].emplace_back(j, r.code(j));
    });
    detail::reconstruct_residual(X, D, codes, residual);

    auto usage = detail::atom_usage(codes, m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto& members = usage[j];
      if (members.empty()) {
        const auto pick = static_cast<Eigen::Index>(rng.uniform_index(n));
        const double nrm = X.col(pick).norm();
        if (nrm > detail::kZeroNorm) D.col(jj) = X.col(pick) / nrm;
        continue;
      }
      // argmin over unit d of ||R_j - d f_j'||^2 is R_j f_j / ||R_j f_j||.
      Eigen::VectorXd v = Eigen::VectorXd::Zero(X.rows());
      for (const auto& [i, s] : members) {
        const double c = codes[i][s].second;
        v += c * (residual.col(static_cast<Eigen::Index>(i)) + c * D.col(jj));
      }
      const double nv = v.norm();
      if (nv <= detail::kZeroNorm) continue;
      const Eigen::VectorXd next = v / nv;
      const Eigen::VectorXd shift = D.col(jj) - next;
      for (const auto& [i, s] : members) residual.col(static_cast<Eigen::Index>(i)) += codes[i][s].second * shift;
      D.col(jj) = next;
    }
    if (objective) {
      double l1 = 0.0;
      for (const auto& c : codes)
        for (const auto& [j, v] : c) l1 += std::abs(v);
      objective->push_back(residual.squaredNorm() + opt.lambda * l1);
    }
  }
  return Dictionary{std::move(D), DictMethod::SparseCoding, seed};
}

/// Builder parameters for the dispatching entry point.
struct DictionaryParams {
  DictMethod method = DictMethod::Random;
  std::size_t size = 1600;
  std::size_t iters = 30;
  std::size_t sparsity = 5;
  double lambda = 1.0;
};

inline Dictionary build_dictionary(const PatchSet& patches, const DictionaryParams& p, std::uint64_t seed) {
  switch (p.method) {
    case DictMethod::Random: return dict_random(patches, p.size, seed);
    case DictMethod::KMeans: return dict_kmeans(patches, p.size, p.iters, seed);
    case DictMethod::KSVD: {
      KsvdOptions o;
      o.sparsity = p.sparsity;
      o.iters = p.iters;
      return dict_ksvd(patches, p.size, o, seed);
    }
    case DictMethod::SparseCoding: {
      SparseCodingOptions o;
      o.lambda = p.lambda;
      o.iters = p.iters;
      return dict_sc(patches, p.size, o, seed);
    }
  }
  throw ValidationError("unknown dictionary method");
}

}  // namespace facefeat

#endif  // FACEFEAT_DICTIONARY_HPP
