#pragma once

// Neighborhood graph similarity: per-point Jaccard of corresponding k-NN
// index sets, its mean over the cloud, and the random-cloud baseline.

#include "nngs/core.hpp"
#include "nngs/knn.hpp"
#include "nngs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace nngs {

/// |a ∩ b| / |a ∪ b| for ascending, duplicate-free index ranges.
inline double jaccard_sorted(std::span<const Index> a, std::span<const Index> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Jaccard similarity of two arbitrary index sets. jaccard({}, {}) == 1.
inline double jaccard(std::vector<Index> a, std::vector<Index> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return jaccard_sorted(a, b);
}

/// Lower bound on the expected Jaccard of k-neighborhoods in independent
/// random clouds of n points: k / (2(n-1) - k).
inline double hyper_baseline(std::size_t k, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "baseline needs n >= 2");
  check_k(k, n);
  const double kk = static_cast<double>(k);
  return kk / (2.0 * static_cast<double>(n - 1) - kk);
}

/// The same bound written in terms of the relative neighborhood size c.
inline double hyper_baseline_c(double c) {
  if (!(c > 0.0 && c <= 1.0)) throw Error(ErrorCode::COutOfRange, "c must lie in (0, 1]");
  return c / (2.0 - c);
}

/// max(1, floor(c (n-1))), capped at n-1.
inline std::size_t k_from_c(double c, std::size_t n) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw Error(ErrorCode::COutOfRange, "c=" + std::to_string(c) + " outside (0, 1]");
  }
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "k_from_c needs n >= 2");
  // The 1e-9 nudge keeps products like 0.29 * 100 from flooring to 28.
  const double raw = std::floor(c * static_cast<double>(n - 1) + 1e-9);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(k, n - 1);
}

inline double relative_size(std::size_t k, std::size_t n) {
  return static_cast<double>(k) / static_cast<double>(n - 1);
}

struct SimilarityReport {
  std::size_t k = 0;
  std::size_t n = 0;
  double c = 0.0;
  double nngs = 0.0;
  double baseline = 0.0;
  std::vector<std::string> ids;
  std::vector<double> per_point;

  friend bool operator==(const SimilarityReport&, const SimilarityReport&) = default;
};

/// Compares two neighbor-set families over the same items.
inline SimilarityReport compare_sets(const NeighborSets& a, const NeighborSets& b,
                                     const std::vector<std::string>& ids) {
  if (a.size() != b.size() || a.k() != b.k()) {
    throw Error(ErrorCode::LengthMismatch, "neighbor sets differ in n or k");
  }
  SimilarityReport r;
  r.k = a.k();
  r.n = a.size();
  r.c = relative_size(r.k, r.n);
  r.baseline = hyper_baseline(r.k, r.n);
  r.ids = ids;
  r.per_point.resize(r.n);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    r.per_point[i] = jaccard_sorted(a[i], b[i]);
    sum += r.per_point[i];
  }
  r.nngs = sum / static_cast<double>(r.n);
  return r;
}

/// Mean structural similarity of corresponding points at neighborhood size k.
inline SimilarityReport nngs(const PairedClouds& pair, std::size_t k, const Metric& metric_x,
                             const Metric& metric_y) {
  check_k(k, pair.size());
  return compare_sets(knn_sets(pair.x(), k, metric_x), knn_sets(pair.y(), k, metric_y),
                      pair.ids());
}

inline SimilarityReport nngs(const PairedClouds& pair, std::size_t k, const Metric& metric) {
  return nngs(pair, k, metric, metric);
}

struct CurveSample {
  std::size_t k = 0;
  double c = 0.0;
  double mean = 0.0;
  double std = 0.0;
  double baseline = 0.0;

  double band_lo() const { return mean - 2.0 * std; }
  double band_hi() const { return mean + 2.0 * std; }

  friend bool operator==(const CurveSample&, const CurveSample&) = default;
};

/// NNGS over a grid of k, aggregated over n_trials independent pairs.
struct SimilarityCurve {
  std::vector<CurveSample> samples;
  std::size_t n_trials = 1;

  friend bool operator==(const SimilarityCurve&, const SimilarityCurve&) = default;
};

inline void check_ks(const std::vector<std::size_t>& ks, std::size_t n) {
  if (ks.empty()) throw Error(ErrorCode::KOutOfRange, "empty k grid");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    check_k(ks[i], n);
    if (i > 0 && ks[i] <= ks[i - 1]) {
      throw Error(ErrorCode::KOutOfRange, "k grid must be strictly increasing");
    }
  }
}

/// NNGS for each k in an increasing grid; a single ranking per side serves
/// every k.
inline std::vector<double> nngs_values(const PairedClouds& pair, const std::vector<std::size_t>& ks,
                                       const Metric& metric_x, const Metric& metric_y) {
  check_ks(ks, pair.size());
  const std::size_t depth = ks.back();
  const auto rx = rank_neighbors(pair.x(), metric_x, depth);
  const auto ry = rank_neighbors(pair.y(), metric_y, depth);
  std::vector<double> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) out.push_back(compare_sets(rx.sets(k), ry.sets(k), pair.ids()).nngs);
  return out;
}

inline SimilarityCurve nngs_sweep(const PairedClouds& pair, const std::vector<std::size_t>& ks,
                                  const Metric& metric_x, const Metric& metric_y) {
  const auto values = nngs_values(pair, ks, metric_x, metric_y);
  SimilarityCurve curve;
  curve.n_trials = 1;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    curve.samples.push_back({ks[i], relative_size(ks[i], pair.size()), values[i], 0.0,
                             hyper_baseline(ks[i], pair.size())});
  }
  return curve;
}

/// Sample mean and sample standard deviation (0 for a single value).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace nngs
