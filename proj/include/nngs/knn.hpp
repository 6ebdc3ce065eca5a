#pragma once

// Exact k-nearest-neighbor sets over a point cloud.

#include "nngs/core.hpp"
#include "nngs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace nngs {

/// Relative (minkowski) or absolute (cosine) slack under which two distances
/// count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// n x n symmetric, zero diagonal.
struct DistanceMatrix {
  Matrix values;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

namespace detail {

/// Row-to-row distances with per-row norms cached for cosine.
class RowDistance {
 public:
  RowDistance(const PointCloud& cloud, const Metric& metric) : data_(cloud.data()), metric_(metric) {
    if (metric_.kind == Metric::Kind::Cosine) {
      norms_.resize(cloud.size());
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        norms_[i] = data_.row(static_cast<Eigen::Index>(i)).norm();
        if (norms_[i] == 0.0) {
          throw Error(ErrorCode::ZeroVectorUnderCosine,
                      "item '" + cloud.ids()[i] + "' is a zero vector");
        }
      }
    }
  }

  double operator()(std::size_t i, std::size_t j) const {
    const auto u = data_.row(static_cast<Eigen::Index>(i));
    const auto v = data_.row(static_cast<Eigen::Index>(j));
    switch (metric_.kind) {
      case Metric::Kind::Cosine:
        return std::max(0.0, 1.0 - u.dot(v) / (norms_[i] * norms_[j]));
      case Metric::Kind::Minkowski:
        if (metric_.order == 2.0) return std::sqrt((u - v).squaredNorm());
        if (metric_.order == 1.0) return (u - v).cwiseAbs().sum();
        return std::pow((u - v).cwiseAbs().array().pow(metric_.order).sum(), 1.0 / metric_.order);
    }
    return 0.0;
  }

  double tie_slack(double anchor) const {
    return metric_.kind == Metric::Kind::Cosine ? kTieTolerance : kTieTolerance * anchor;
  }

 private:
  const Matrix& data_;
  Metric metric_;
  std::vector<double> norms_;
};

}  // namespace detail

inline DistanceMatrix pairwise_distances(const PointCloud& cloud, const Metric& metric) {
  const detail::RowDistance dist(cloud, metric);
  const std::size_t n = cloud.size();
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel::for_each(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dist(i, j);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
  }
  return DistanceMatrix{std::move(d)};
}

/// Per item, the k neighbor indices (self excluded) stored in ascending index
/// order.
class NeighborSets {
 public:
  NeighborSets(std::size_t n, std::size_t k, std::vector<Index> flat)
      : n_(n), k_(k), flat_(std::move(flat)) {}

  std::size_t size() const { return n_; }
  std::size_t k() const { return k_; }
  std::span<const Index> operator[](std::size_t i) const {
    return std::span<const Index>(flat_).subspan(i * k_, k_);
  }

  friend bool operator==(const NeighborSets&, const NeighborSets&) = default;

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<Index> flat_;
};

inline void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k + 1 > n) {
    throw Error(ErrorCode::KOutOfRange,
                "k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  }
}

/// Neighbors of every item in rank order, up to a fixed depth. Prefixes of a
/// deeper ranking equal shallower rankings, so one ranking serves a k sweep.
class NeighborRanking {
 public:
  NeighborRanking(std::size_t n, std::size_t depth, std::vector<Index> flat)
      : n_(n), depth_(depth), flat_(std::move(flat)) {}

  std::size_t size() const { return n_; }
  std::size_t depth() const { return depth_; }
  std::span<const Index> row(std::size_t i) const {
    return std::span<const Index>(flat_).subspan(i * depth_, depth_);
  }

  NeighborSets sets(std::size_t k) const {
    if (k < 1 || k > depth_) {
      throw Error(ErrorCode::KOutOfRange,
                  "k=" + std::to_string(k) + " exceeds ranking depth " + std::to_string(depth_));
    }
    std::vector<Index> flat(n_ * k);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto src = row(i).first(k);
      auto dst = flat.begin() + static_cast<std::ptrdiff_t>(i * k);
      std::copy(src.begin(), src.end(), dst);
      std::sort(dst, dst + static_cast<std::ptrdiff_t>(k));
    }
    return NeighborSets(n_, k, std::move(flat));
  }

 private:
  std::size_t n_;
  std::size_t depth_;
  std::vector<Index> flat_;
};

/// Ranks the `depth` nearest neighbors of every item. Distances equal within
/// the tie slack of the first distance in their run are ordered by index.
inline NeighborRanking rank_neighbors(const PointCloud& cloud, const Metric& metric,
                                      std::size_t depth) {
  const std::size_t n = cloud.size();
  check_k(depth, n);
  const detail::RowDistance dist(cloud, metric);
  std::vector<Index> flat(n * depth);

  parallel::for_each(n, [&](std::size_t i) {
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(dist(i, j), static_cast<Index>(j));
    }
    if (depth < cand.size()) {
      auto nth = cand.begin() + static_cast<std::ptrdiff_t>(depth - 1);
      std::nth_element(cand.begin(), nth, cand.end());
      const double limit = nth->first + dist.tie_slack(nth->first);
      const auto keep = std::partition(cand.begin(), cand.end(),
                                       [limit](const auto& c) { return c.first <= limit; });
      cand.erase(keep, cand.end());
    }
    std::sort(cand.begin(), cand.end());

    // Re-order each run of tied distances by index.
    std::size_t start = 0;
    while (start < depth) {
      const double anchor = cand[start].first;
      const double slack = dist.tie_slack(anchor);
      std::size_t end = start + 1;
      while (end < cand.size() && cand[end].first - anchor <= slack) ++end;
      std::sort(cand.begin() + static_cast<std::ptrdiff_t>(start),
                cand.begin() + static_cast<std::ptrdiff_t>(end),
                [](const auto& a, const auto& b) { return a.second < b.second; });
      start = end;
    }
    for (std::size_t r = 0; r < depth; ++r) flat[i * depth + r] = cand[r].second;
  });
  return NeighborRanking(n, depth, std::move(flat));
}

inline NeighborSets knn_sets(const PointCloud& cloud, std::size_t k, const Metric& metric) {
  check_k(k, cloud.size());
  return rank_neighbors(cloud, metric, k).sets(k);
}

}  // namespace nngs
