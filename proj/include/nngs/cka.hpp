#pragma once

// Centered Kernel Alignment with linear and RBF kernels.

#include "nngs/core.hpp"
#include "nngs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace nngs {

struct KernelSpec {
  enum class Kind { Linear, Rbf };

  Kind kind = Kind::Linear;
  double sigma = 1.0;

  static KernelSpec linear() { return {Kind::Linear, 1.0}; }
  static KernelSpec rbf(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::InvalidKernel, "rbf sigma must be positive and finite");
    }
    return {Kind::Rbf, sigma};
  }

  std::string name() const {
    if (kind == Kind::Linear) return "linear";
    char buf[64];
    std::snprintf(buf, sizeof buf, "rbf:%g", sigma);
    return buf;
  }
};

/// Linear: Gram of the column-centered data. RBF: exp(-|xi - xj|^2 / (2 sigma^2))
/// on the raw data.
inline Matrix gram(const PointCloud& cloud, const KernelSpec& spec) {
  const Matrix& x = cloud.data();
  if (spec.kind == KernelSpec::Kind::Linear) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    return centered * centered.transpose();
  }
  if (!(spec.sigma > 0.0)) throw Error(ErrorCode::InvalidKernel, "rbf sigma must be positive");
  const auto n = x.rows();
  const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
  Matrix g(n, n);
  parallel::for_each(static_cast<std::size_t>(n), [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    g(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      g(i, j) = std::exp((x.row(i) - x.row(j)).squaredNorm() * scale);
    }
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) g(i, j) = g(j, i);
  }
  return g;
}

/// H G H with H = I - 11'/n.
inline Matrix double_center(const Matrix& g) {
  const Eigen::VectorXd row_mean = g.rowwise().mean();
  const Eigen::RowVectorXd col_mean = g.colwise().mean();
  const double grand = g.mean();
  Matrix c = g;
  c.colwise() -= row_mean;
  c.rowwise() -= col_mean;
  c.array() += grand;
  return c;
}

/// Normalized Frobenius inner product of the two centered Gram matrices,
/// clamped to [0, 1].
inline double cka(const PointCloud& x, const PointCloud& y, const KernelSpec& spec_x,
                  const KernelSpec& spec_y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "cka needs equal item counts, got " +
                                               std::to_string(x.size()) + " and " +
                                               std::to_string(y.size()));
  }
  const Matrix raw_x = gram(x, spec_x);
  const Matrix raw_y = gram(y, spec_y);
  const Matrix gx = double_center(raw_x);
  const Matrix gy = double_center(raw_y);
  const double xy = gx.cwiseProduct(gy).sum();
  const double xx = gx.squaredNorm();
  const double yy = gy.squaredNorm();
  // Identical points leave only rounding residue after centering.
  auto scale = [](const PointCloud& c, const KernelSpec& s, const Matrix& raw) {
    if (s.kind == KernelSpec::Kind::Linear) {
      const double sq = c.data().squaredNorm();
      return sq * sq;
    }
    return raw.squaredNorm();
  };
  constexpr double kResidue = 1e-24;
  if (!(xx > kResidue * scale(x, spec_x, raw_x)) || !(yy > kResidue * scale(y, spec_y, raw_y))) {
    throw Error(ErrorCode::DegenerateKernel, "centered Gram matrix has zero norm");
  }
  return std::clamp(xy / std::sqrt(xx * yy), 0.0, 1.0);
}

inline double cka(const PairedClouds& pair, const KernelSpec& spec) {
  return cka(pair.x(), pair.y(), spec, spec);
}

}  // namespace nngs
