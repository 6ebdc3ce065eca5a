#pragma once

// Synthetic experiment generators: Gaussian clouds, white-noise distortion,
// aligned blob datasets, and the repeated-trial sweeps built on them.

#include "nngs/cka.hpp"
#include "nngs/core.hpp"
#include "nngs/parallel.hpp"
#include "nngs/similarity.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace nngs {

using Engine = std::mt19937_64;

inline Engine make_engine(Seed seed) { return Engine(seed.value); }

/// n x d standard-normal draws, ids "0".."n-1".
inline PointCloud gen_gaussian_cloud(std::size_t n, std::size_t d, Seed seed) {
  if (n < 2 || d < 1) {
    throw Error(ErrorCode::InvalidShape,
                "gaussian cloud needs n >= 2 and d >= 1, got n=" + std::to_string(n) +
                    " d=" + std::to_string(d));
  }
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(eng);
  }
  return PointCloud(index_ids(n), std::move(m));
}

/// Additive white noise at a given signal-to-noise ratio in dB.
struct NoiseSpec {
  double snr_db = 0.0;

  /// 10^(-snr/20); exactly 0 for +inf dB.
  double alpha() const {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 20.0);
  }
};

/// y_i = x_i + alpha * phi_i, phi ~ N(0, I). alpha == 0 returns x unchanged.
inline PointCloud add_noise(const PointCloud& x, const NoiseSpec& spec, Seed seed) {
  const double alpha = spec.alpha();
  if (!std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidArgument, "SNR of -inf dB gives unbounded noise");
  }
  if (alpha == 0.0) return x;
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix y = x.data();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) += alpha * normal(eng);
  }
  return x.with_data(std::move(y));
}

// ---------------------------------------------------------------------------
// Aligned blobs

/// Parameters of the aligned blob generator. Each blob has a scalar center
/// and spread per side, broadcast across all dimensions.
struct BlobSpec {
  std::size_t n_dim = 0;
  std::vector<std::size_t> n_items;
  std::vector<double> mu1, sigma1, mu2, sigma2, noise;

  std::size_t total_items() const {
    std::size_t t = 0;
    for (auto n : n_items) t += n;
    return t;
  }

  void validate() const {
    const std::size_t b = n_items.size();
    if (b == 0 || mu1.size() != b || sigma1.size() != b || mu2.size() != b ||
        sigma2.size() != b || noise.size() != b) {
      throw Error(ErrorCode::SpecShapeMismatch,
                  "n_items, mu1, sigma1, mu2, sigma2 and noise need equal non-zero length");
    }
    if (n_dim < 1) throw Error(ErrorCode::SpecShapeMismatch, "n_dim must be >= 1");
    for (std::size_t i = 0; i < b; ++i) {
      if (n_items[i] < 1) throw Error(ErrorCode::SpecShapeMismatch, "every blob needs >= 1 item");
      if (sigma1[i] < 0 || sigma2[i] < 0 || noise[i] < 0) {
        throw Error(ErrorCode::SpecShapeMismatch, "spreads and noise must be >= 0");
      }
    }
  }
};

inline const std::vector<std::string_view>& blob_preset_names() {
  static const std::vector<std::string_view> names = {"scales", "unbalanced", "noise-within",
                                                      "shuffled"};
  return names;
}

/// The four comparison datasets: two blobs rescaled asymmetrically (balanced
/// and unbalanced), four blobs with within-blob noise, four blobs with
/// permuted centers.
inline BlobSpec blob_preset(std::string_view name) {
  if (name == "scales") return {20, {200, 200}, {-1, 3}, {3, 0.1}, {-1, 3}, {0.1, 3}, {0, 0}};
  if (name == "unbalanced") return {20, {10, 1000}, {-1, 3}, {3, 0.1}, {-1, 3}, {0.1, 3}, {0, 0}};
  if (name == "noise-within") {
    return {20,         {100, 100, 100, 100}, {0, 1, 2, 3}, {0.1, 0.1, 0.1, 0.1},
            {0, 1, 2, 3}, {0.1, 0.1, 0.1, 0.1}, {0.5, 0.5, 0.5, 0.5}};
  }
  if (name == "shuffled") {
    return {20,         {100, 100, 100, 100}, {0, 1, 2, 3}, {0.1, 0.1, 0.1, 0.1},
            {2, 1, 3, 0}, {0.1, 0.1, 0.1, 0.1}, {0, 0, 0, 0}};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown blob preset '" + std::string(name) + "'");
}

/// Per blob: x ~ N(0,1); side 1 = x*sigma1 + mu1; side 2 = x*sigma2 + mu2 +
/// noise*N(0,1). Blobs are stacked in order and share ids "0".."N-1".
inline PairedClouds create_aligned_dataset(const BlobSpec& spec, Seed seed) {
  spec.validate();
  const auto total = static_cast<Eigen::Index>(spec.total_items());
  const auto d = static_cast<Eigen::Index>(spec.n_dim);
  Matrix x1(total, d);
  Matrix x2(total, d);
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < spec.n_items.size(); ++b) {
    const auto rows = static_cast<Eigen::Index>(spec.n_items[b]);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double base = normal(eng);
        x1(row + i, j) = base * spec.sigma1[b] + spec.mu1[b];
        x2(row + i, j) = base * spec.sigma2[b] + spec.mu2[b];
      }
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double phi = normal(eng);
        if (spec.noise[b] != 0.0) x2(row + i, j) += phi * spec.noise[b];
      }
    }
    row += rows;
  }
  auto ids = index_ids(spec.total_items());
  return validate_paired(PointCloud(ids, std::move(x1)), PointCloud(ids, std::move(x2)));
}

/// One row of the CKA-vs-NNGS comparison table for a single dataset draw.
struct BlobScores {
  std::optional<double> linear_cka;
  std::vector<double> rbf_cka;  // one per sigma
  std::vector<double> nngs;     // one per k
};

struct BlobTableConfig {
  std::vector<double> sigmas = {0.01, 0.1, 3.0};
  std::vector<std::size_t> ks = {5, 300};
  bool with_cka = true;
  bool with_nngs = true;
  Metric metric = Metric::minkowski(2.0);
};

inline BlobScores score_blobs(const PairedClouds& pair, const BlobTableConfig& cfg) {
  BlobScores s;
  if (cfg.with_cka) {
    s.linear_cka = cka(pair, KernelSpec::linear());
    for (double sigma : cfg.sigmas) s.rbf_cka.push_back(cka(pair, KernelSpec::rbf(sigma)));
  }
  if (cfg.with_nngs) s.nngs = nngs_values(pair, cfg.ks, cfg.metric, cfg.metric);
  return s;
}

/// Scores over `trials` independent draws of the dataset, trial t seeded by
/// seed.derive("blobs", t).
inline std::vector<BlobScores> blob_trials(const BlobSpec& spec, const BlobTableConfig& cfg,
                                           std::size_t trials, Seed seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  spec.validate();
  if (cfg.with_nngs) check_ks(cfg.ks, spec.total_items());
  std::vector<BlobScores> out(trials);
  parallel::for_each(trials, [&](std::size_t t) {
    out[t] = score_blobs(create_aligned_dataset(spec, seed.derive("blobs", t)), cfg);
  });
  return out;
}

/// Mean and spread of each comparison column over repeated dataset draws.
struct BlobColumn {
  std::string method;     // "cka" or "nngs"
  std::string parameter;  // "linear", "rbf:<sigma>", "k=<k>"
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;
};

struct BlobTable {
  std::string dataset;
  std::string metric;
  std::size_t n_items = 0;
  std::size_t n_trials = 0;
  std::vector<BlobColumn> columns;
};

inline BlobTable summarize_blobs(std::string dataset, const std::vector<BlobScores>& trials,
                                 const BlobTableConfig& cfg, std::size_t n_items) {
  BlobTable table{std::move(dataset), cfg.metric.name(), n_items, trials.size(), {}};
  auto add = [&](std::string method, std::string param, auto pick) {
    BlobColumn col{std::move(method), std::move(param), {}, 0.0, 0.0};
    for (const auto& t : trials) col.values.push_back(pick(t));
    const auto ms = mean_std(col.values);
    col.mean = ms.mean;
    col.std = ms.std;
    table.columns.push_back(std::move(col));
  };
  if (cfg.with_cka) {
    add("cka", "linear", [](const BlobScores& s) { return *s.linear_cka; });
    for (std::size_t i = 0; i < cfg.sigmas.size(); ++i) {
      add("cka", KernelSpec::rbf(cfg.sigmas[i]).name(),
          [i](const BlobScores& s) { return s.rbf_cka[i]; });
    }
  }
  if (cfg.with_nngs) {
    for (std::size_t i = 0; i < cfg.ks.size(); ++i) {
      add("nngs", "k=" + std::to_string(cfg.ks[i]), [i](const BlobScores& s) { return s.nngs[i]; });
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepEntry {
  double axis_value = 0.0;
  std::size_t n = 0;
  std::size_t d = 0;
  double snr_db = 0.0;
  SimilarityCurve curve;

  friend bool operator==(const SweepEntry&, const SweepEntry&) = default;
};

struct SweepResult {
  std::string axis_name;
  std::vector<SweepEntry> entries;
  std::size_t n_trials = 1;
  std::string metric;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct SweepPoint {
  std::size_t n = 0;
  std::size_t d = 0;
  double snr_db = 0.0;
  std::vector<std::size_t> ks;
};

/// Runs `trials` fresh (signal, noise) draws at every grid point. Trial t of
/// grid point a draws its signal from seed.derive("signal", a, t) and its
/// noise from seed.derive("noise", a, t).
inline SweepResult run_sweep(std::string axis_name, const std::vector<double>& axis_values,
                             const std::vector<SweepPoint>& points, std::size_t trials, Seed seed,
                             const Metric& metric) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep grid");
  for (const auto& p : points) {
    if (p.n < 2 || p.d < 1) throw Error(ErrorCode::InvalidShape, "sweep needs n >= 2 and d >= 1");
    check_ks(p.ks, p.n);
    if (std::isinf(p.snr_db) && p.snr_db < 0) {
      throw Error(ErrorCode::InvalidArgument, "SNR of -inf dB is not supported");
    }
  }
  const std::size_t units = points.size() * trials;
  std::vector<std::vector<double>> values(units);
  parallel::for_each(units, [&](std::size_t u) {
    const std::size_t a = u / trials;
    const std::size_t t = u % trials;
    const auto& p = points[a];
    auto x = gen_gaussian_cloud(p.n, p.d, seed.derive("signal", a, t));
    auto y = add_noise(x, NoiseSpec{p.snr_db}, seed.derive("noise", a, t));
    values[u] = nngs_values(validate_paired(std::move(x), std::move(y)), p.ks, metric, metric);
  });

  SweepResult result;
  result.axis_name = std::move(axis_name);
  result.n_trials = trials;
  result.metric = metric.name();
  for (std::size_t a = 0; a < points.size(); ++a) {
    const auto& p = points[a];
    SweepEntry entry{axis_values[a], p.n, p.d, p.snr_db, {}};
    entry.curve.n_trials = trials;
    for (std::size_t ki = 0; ki < p.ks.size(); ++ki) {
      std::vector<double> samples(trials);
      for (std::size_t t = 0; t < trials; ++t) samples[t] = values[a * trials + t][ki];
      const auto ms = mean_std(samples);
      entry.curve.samples.push_back({p.ks[ki], relative_size(p.ks[ki], p.n), ms.mean, ms.std,
                                     hyper_baseline(p.ks[ki], p.n)});
    }
    result.entries.push_back(std::move(entry));
  }
  return result;
}

/// One curve over ks per SNR value, n and d fixed.
inline SweepResult noise_sweep(std::size_t n, std::size_t d, const std::vector<std::size_t>& ks,
                               const std::vector<double>& snr_list, std::size_t trials, Seed seed,
                               const Metric& metric = Metric::cosine()) {
  std::vector<SweepPoint> points;
  for (double snr : snr_list) points.push_back({n, d, snr, ks});
  return run_sweep("snr_db", snr_list, points, trials, seed, metric);
}

/// Mean NNGS at k = k_from_c(c, n) for each n.
inline SweepResult size_invariance_sweep(double c, const std::vector<std::size_t>& ns,
                                         double snr_db, std::size_t d, std::size_t trials,
                                         Seed seed, const Metric& metric = Metric::cosine()) {
  std::vector<SweepPoint> points;
  std::vector<double> axis;
  for (std::size_t n : ns) {
    if (n < 2) throw Error(ErrorCode::InvalidShape, "each n must be >= 2");
    points.push_back({n, d, snr_db, {k_from_c(c, n)}});
    axis.push_back(static_cast<double>(n));
  }
  return run_sweep("n", axis, points, trials, seed, metric);
}

/// Mean NNGS at fixed k and n for each dimensionality d.
inline SweepResult dim_invariance_sweep(std::size_t k, std::size_t n,
                                        const std::vector<std::size_t>& ds, double snr_db,
                                        std::size_t trials, Seed seed,
                                        const Metric& metric = Metric::cosine()) {
  std::vector<SweepPoint> points;
  std::vector<double> axis;
  for (std::size_t d : ds) {
    if (d < 1) throw Error(ErrorCode::InvalidShape, "each d must be >= 1");
    points.push_back({n, d, snr_db, {k}});
    axis.push_back(static_cast<double>(d));
  }
  return run_sweep("d", axis, points, trials, seed, metric);
}

}  // namespace nngs
