#pragma once

// Shared domain types for paired point-cloud comparison: clouds, pairing,
// metrics, seeds, errors and the warning channel.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace nngs {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = std::uint32_t;

enum class ErrorCode {
  IdMismatch,
  DuplicateId,
  NonFiniteCoordinate,
  TooFewPoints,
  InvalidShape,
  EmptyIntersection,
  ZeroVectorUnderCosine,
  InvalidMetric,
  KOutOfRange,
  COutOfRange,
  DegenerateKernel,
  InvalidKernel,
  SpecShapeMismatch,
  InvalidArgument,
  EmptyFile,
  NoCategories,
  EmptyVocabulary,
  TooFewPairs,
  EmptyClass,
  MissingClassText,
  DegenerateVariance,
  LengthMismatch,
  InconsistentDimension,
  UnparsableFloat,
  MissingColumn,
  IoFailure,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::ZeroVectorUnderCosine: return "ZeroVectorUnderCosine";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::COutOfRange: return "COutOfRange";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::SpecShapeMismatch: return "SpecShapeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::NoCategories: return "NoCategories";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::MissingClassText: return "MissingClassText";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::UnparsableFloat: return "UnparsableFloat";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Every failure the library reports on bad input carries one of the codes
/// above; the CLI maps these to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Collects non-fatal diagnostics (skipped lines, dropped items, conflicts).
struct Warnings {
  std::vector<std::string> messages;

  void add(std::string msg) { messages.push_back(std::move(msg)); }
  std::size_t count() const { return messages.size(); }
};

inline void warn(Warnings* sink, std::string msg) {
  if (sink) sink->add(std::move(msg));
}

// ---------------------------------------------------------------------------
// PointCloud

/// n identified rows in R^p. Immutable after construction.
class PointCloud {
 public:
  PointCloud(std::vector<std::string> ids, Matrix data)
      : ids_(std::move(ids)), data_(std::move(data)) {
    if (static_cast<Eigen::Index>(ids_.size()) != data_.rows()) {
      throw Error(ErrorCode::InvalidShape,
                  "id count " + std::to_string(ids_.size()) + " != row count " +
                      std::to_string(data_.rows()));
    }
    if (ids_.size() < 2) {
      throw Error(ErrorCode::TooFewPoints, "point cloud needs at least 2 items, got " +
                                               std::to_string(ids_.size()));
    }
    if (data_.cols() < 1) throw Error(ErrorCode::InvalidShape, "point cloud needs p >= 1");
    if (!data_.allFinite()) {
      for (Eigen::Index i = 0; i < data_.rows(); ++i) {
        if (!data_.row(i).allFinite()) {
          throw Error(ErrorCode::NonFiniteCoordinate, "row " + std::to_string(i) + " (id '" +
                                                          ids_[static_cast<std::size_t>(i)] +
                                                          "') has a non-finite coordinate");
        }
      }
    }
    std::unordered_set<std::string_view> seen;
    seen.reserve(ids_.size());
    for (const auto& id : ids_) {
      if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + id + "'");
    }
  }

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& data() const { return data_; }

  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

  /// Same ids, new coordinates (shape may change in p only).
  PointCloud with_data(Matrix data) const { return PointCloud(ids_, std::move(data)); }

  /// Subset of rows in the given order.
  PointCloud select(const std::vector<std::size_t>& rows) const {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    Matrix out(static_cast<Eigen::Index>(rows.size()), data_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      ids.push_back(ids_[rows[r]]);
      out.row(static_cast<Eigen::Index>(r)) = data_.row(static_cast<Eigen::Index>(rows[r]));
    }
    return PointCloud(std::move(ids), std::move(out));
  }

 private:
  std::vector<std::string> ids_;
  Matrix data_;
};

inline std::vector<std::string> index_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

// ---------------------------------------------------------------------------
// PairedClouds

/// Two clouds over the same items in the same order. Only constructible via
/// validate_paired / align_by_intersection.
class PairedClouds {
 public:
  const PointCloud& x() const { return x_; }
  const PointCloud& y() const { return y_; }
  std::size_t size() const { return x_.size(); }
  const std::vector<std::string>& ids() const { return x_.ids(); }

  PairedClouds swapped() const { return PairedClouds(y_, x_); }

 private:
  PairedClouds(PointCloud x, PointCloud y) : x_(std::move(x)), y_(std::move(y)) {}

  friend PairedClouds validate_paired(PointCloud x, PointCloud y);

  PointCloud x_;
  PointCloud y_;
};

inline PairedClouds validate_paired(PointCloud x, PointCloud y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::IdMismatch, "clouds have " + std::to_string(x.size()) + " and " +
                                           std::to_string(y.size()) + " items");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.ids()[i] != y.ids()[i]) {
      throw Error(ErrorCode::IdMismatch, "position " + std::to_string(i) + ": '" + x.ids()[i] +
                                             "' vs '" + y.ids()[i] + "'");
    }
  }
  return PairedClouds(std::move(x), std::move(y));
}

/// Restricts both clouds to their shared ids, ordered lexicographically.
inline PairedClouds align_by_intersection(const PointCloud& x, const PointCloud& y,
                                          Warnings* warnings = nullptr) {
  std::unordered_map<std::string_view, std::size_t> y_rows;
  y_rows.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_rows.emplace(y.ids()[i], i);

  std::vector<std::pair<std::string_view, std::size_t>> shared;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y_rows.count(x.ids()[i])) shared.emplace_back(x.ids()[i], i);
  }
  if (shared.size() < 2) {
    throw Error(ErrorCode::EmptyIntersection,
                "only " + std::to_string(shared.size()) + " shared ids (need >= 2)");
  }
  std::sort(shared.begin(), shared.end());

  std::vector<std::size_t> xr, yr;
  xr.reserve(shared.size());
  yr.reserve(shared.size());
  for (const auto& [id, row] : shared) {
    xr.push_back(row);
    yr.push_back(y_rows.at(id));
  }
  const std::size_t dropped_x = x.size() - shared.size();
  const std::size_t dropped_y = y.size() - shared.size();
  if (dropped_x || dropped_y) {
    warn(warnings, "alignment kept " + std::to_string(shared.size()) + " shared ids; dropped " +
                       std::to_string(dropped_x) + " from x and " + std::to_string(dropped_y) +
                       " from y");
  }
  return validate_paired(x.select(xr), y.select(yr));
}

// ---------------------------------------------------------------------------
// Metric

struct Metric {
  enum class Kind { Cosine, Minkowski };

  Kind kind = Kind::Minkowski;
  double order = 2.0;

  static Metric cosine() { return {Kind::Cosine, 2.0}; }
  static Metric minkowski(double order = 2.0) {
    if (!(order >= 1.0) || !std::isfinite(order)) {
      throw Error(ErrorCode::InvalidMetric, "minkowski order must be a finite value >= 1");
    }
    return {Kind::Minkowski, order};
  }

  /// "cosine", "euclidean", "manhattan", "minkowski" or "minkowski:<order>".
  static Metric parse(std::string_view text) {
    if (text == "cosine") return cosine();
    if (text == "euclidean" || text == "minkowski") return minkowski(2.0);
    if (text == "manhattan") return minkowski(1.0);
    constexpr std::string_view prefix = "minkowski:";
    if (text.substr(0, prefix.size()) == prefix) {
      const std::string rest(text.substr(prefix.size()));
      std::size_t used = 0;
      double order = 0.0;
      try {
        order = std::stod(rest, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != rest.size() || rest.empty()) {
        throw Error(ErrorCode::InvalidMetric, "bad minkowski order '" + rest + "'");
      }
      return minkowski(order);
    }
    throw Error(ErrorCode::InvalidMetric, "unknown metric '" + std::string(text) + "'");
  }

  std::string name() const {
    if (kind == Kind::Cosine) return "cosine";
    if (order == 2.0) return "minkowski:2";
    std::string s = std::to_string(order);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return "minkowski:" + s;
  }

  friend bool operator==(const Metric&, const Metric&) = default;
};

/// Distance between two rows. Written so that distance(u, v) and distance(v, u)
/// are bit-identical.
template <typename A, typename B>
double distance(const Metric& metric, const A& u, const B& v) {
  if (metric.kind == Metric::Kind::Cosine) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
      throw Error(ErrorCode::ZeroVectorUnderCosine, "cosine distance of a zero vector");
    }
    return std::max(0.0, 1.0 - u.dot(v) / (nu * nv));
  }
  const Eigen::Index p = u.size();
  if (metric.order == 2.0) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double diff = u[j] - v[j];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  }
  if (metric.order == 1.0) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) acc += std::abs(u[j] - v[j]);
    return acc;
  }
  double acc = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) acc += std::pow(std::abs(u[j] - v[j]), metric.order);
  return std::pow(acc, 1.0 / metric.order);
}

// ---------------------------------------------------------------------------
// Seed

/// Root of all randomness. Sub-streams are derived from (seed, label, indices)
/// so parallel and serial execution draw identical numbers.
struct Seed {
  std::uint64_t value = 0;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  template <typename... Ints>
  Seed derive(std::string_view label, Ints... indices) const {
    std::uint64_t s = mix(value ^ hash_label(label));
    ((s = mix(s ^ static_cast<std::uint64_t>(indices))), ...);
    return Seed{s};
  }

  friend bool operator==(const Seed&, const Seed&) = default;
};

}  // namespace nngs
