#pragma once

// Shared helpers for the unit and acceptance tests: random clouds and
// brute-force reference implementations that share no code with the library.

#include "nngs/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace nngs::testing {

inline Matrix random_matrix(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline PointCloud random_cloud(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  return PointCloud(index_ids(n), random_matrix(n, d, rng));
}

/// Small-integer coordinates in [lo, hi]; many exact distance ties.
inline PointCloud lattice_cloud(std::size_t n, std::size_t d, int lo, int hi, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(lo, hi);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = pick(rng);
  return PointCloud(index_ids(n), std::move(m));
}

/// Haar-distributed orthonormal matrix.
inline Eigen::MatrixXd random_orthonormal(std::size_t d, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = random_matrix(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Reference implementations

inline double ref_distance(const std::vector<double>& u, const std::vector<double>& v, bool cosine,
                           double p) {
  if (cosine) {
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      dot += u[j] * v[j];
      nu += u[j] * u[j];
      nv += v[j] * v[j];
    }
    return 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
  }
  double acc = 0;
  for (std::size_t j = 0; j < u.size(); ++j) acc += std::pow(std::abs(u[j] - v[j]), p);
  return std::pow(acc, 1.0 / p);
}

inline std::vector<std::vector<double>> rows_of(const PointCloud& c) {
  std::vector<std::vector<double>> out(c.size(), std::vector<double>(c.dim()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.dim(); ++j) {
      out[i][j] = c.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

/// k nearest by repeated minimum search. Candidates within 1e-9 relative of
/// the current minimum count as tied and the lowest index wins.
inline std::vector<std::set<std::size_t>> ref_knn(const PointCloud& cloud, std::size_t k, bool cosine,
                                                  double p) {
  const auto rows = rows_of(cloud);
  const std::size_t n = rows.size();
  std::vector<std::set<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = ref_distance(rows[i], rows[j], cosine, p);
    std::vector<bool> used(n, false);
    used[i] = true;
    for (std::size_t r = 0; r < k; ++r) {
      double best = INFINITY;
      for (std::size_t j = 0; j < n; ++j) {
        if (!used[j]) best = std::min(best, d[j]);
      }
      const double tol = 1e-9 * std::max(1.0, std::abs(best));
      for (std::size_t j = 0; j < n; ++j) {
        if (!used[j] && d[j] <= best + tol) {
          used[j] = true;
          out[i].insert(j);
          break;
        }
      }
    }
  }
  return out;
}

inline double ref_jaccard(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::size_t inter = 0;
  for (std::size_t x : a) {
    for (std::size_t y : b) {
      if (x == y) ++inter;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double ref_nngs(const PointCloud& x, const PointCloud& y, std::size_t k, bool cosine, double p) {
  const auto sx = ref_knn(x, k, cosine, p);
  const auto sy = ref_knn(y, k, cosine, p);
  double sum = 0;
  for (std::size_t i = 0; i < sx.size(); ++i) sum += ref_jaccard(sx[i], sy[i]);
  return sum / static_cast<double>(sx.size());
}

}  // namespace nngs::testing
