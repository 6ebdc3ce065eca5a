#pragma once

// Case-study evaluators: word analogies and cross-modal zero-shot
// classification, each paired with the similarity of the clouds the task
// relies on.

#include "nngs/cka.hpp"
#include "nngs/core.hpp"
#include "nngs/parallel.hpp"
#include "nngs/similarity.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace nngs {

// ---------------------------------------------------------------------------
// Analogies

struct AnalogyQuad {
  std::string a, b, c, d;
  std::string category;

  friend bool operator==(const AnalogyQuad&, const AnalogyQuad&) = default;
};

struct AnalogyCategory {
  std::string name;
  std::vector<AnalogyQuad> quads;
};

inline std::string ascii_lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

/// Parses the questions-words layout: ": <category>" headers followed by
/// lines of four whitespace-separated words. Malformed lines are skipped
/// with a warning. Categories keep file order.
inline std::vector<AnalogyCategory> parse_analogy_file(std::string_view text,
                                                       Warnings* warnings = nullptr,
                                                       bool lowercase = false) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::EmptyFile, "analogy file is empty");
  }
  std::vector<AnalogyCategory> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(std::move(t));
    if (tok.front() == ":") {
      if (tok.size() < 2) {
        warn(warnings, "line " + std::to_string(line_no) + ": category header without a name");
        continue;
      }
      std::string name = tok[1];
      for (std::size_t i = 2; i < tok.size(); ++i) name += " " + tok[i];
      out.push_back({std::move(name), {}});
      continue;
    }
    if (tok.front().size() > 1 && tok.front()[0] == ':') {
      out.push_back({tok.front().substr(1), {}});
      continue;
    }
    if (tok.size() != 4) {
      warn(warnings, "line " + std::to_string(line_no) + ": expected 4 words, got " +
                         std::to_string(tok.size()));
      continue;
    }
    if (out.empty()) {
      warn(warnings, "line " + std::to_string(line_no) + ": analogy before any category header");
      continue;
    }
    if (lowercase) {
      for (auto& t : tok) t = ascii_lower(std::move(t));
    }
    const std::unordered_set<std::string> distinct(tok.begin(), tok.end());
    if (distinct.size() != 4) {
      warn(warnings, "line " + std::to_string(line_no) + ": words are not distinct");
      continue;
    }
    out.back().quads.push_back({tok[0], tok[1], tok[2], tok[3], out.back().name});
  }
  if (out.empty()) throw Error(ErrorCode::NoCategories, "no ': <category>' header found");
  return out;
}

/// Row-normalized vocabulary with an id lookup, shared across analogy
/// evaluations.
class Vocabulary {
 public:
  explicit Vocabulary(const PointCloud& emb) : raw_(emb.data()) {
    if (emb.size() == 0) throw Error(ErrorCode::EmptyVocabulary, "empty vocabulary");
    unit_ = raw_;
    for (Eigen::Index i = 0; i < unit_.rows(); ++i) {
      const double norm = unit_.row(i).norm();
      if (norm == 0.0) {
        throw Error(ErrorCode::ZeroVectorUnderCosine,
                    "word '" + emb.ids()[static_cast<std::size_t>(i)] + "' is a zero vector");
      }
      unit_.row(i) /= norm;
    }
    index_.reserve(emb.size());
    for (std::size_t i = 0; i < emb.size(); ++i) index_.emplace(emb.ids()[i], i);
  }

  std::size_t size() const { return static_cast<std::size_t>(raw_.rows()); }
  std::optional<std::size_t> find(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const Matrix& raw() const { return raw_; }
  const Matrix& unit() const { return unit_; }

 private:
  Matrix raw_;
  Matrix unit_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct AnalogyScore {
  double accuracy = 0.0;  // 0 when nothing was evaluated
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;
  std::size_t n_correct = 0;
};

/// 3CosAdd: predicts argmax over the vocabulary of cos(v, e_b - e_a + e_c),
/// excluding a, b and c. Quads with out-of-vocabulary words are skipped.
/// Ties go to the lower vocabulary index.
inline AnalogyScore analogy_accuracy(const Vocabulary& vocab, const std::vector<AnalogyQuad>& quads) {
  struct Query {
    std::size_t a, b, c, d;
  };
  AnalogyScore score;
  std::vector<Query> queries;
  for (const auto& q : quads) {
    const auto a = vocab.find(q.a), b = vocab.find(q.b), c = vocab.find(q.c), d = vocab.find(q.d);
    if (!a || !b || !c || !d) {
      ++score.n_skipped;
      continue;
    }
    queries.push_back({*a, *b, *c, *d});
  }
  score.n_evaluated = queries.size();
  if (queries.empty()) return score;

  constexpr std::size_t kBatch = 32;
  constexpr Eigen::Index kBlockRows = 1 << 15;
  const auto& unit = vocab.unit();
  const auto& raw = vocab.raw();
  const Eigen::Index n_vocab = unit.rows();
  const std::size_t n_batches = (queries.size() + kBatch - 1) / kBatch;
  std::vector<char> correct(queries.size(), 0);

  parallel::for_each(n_batches, [&](std::size_t batch) {
    const std::size_t first = batch * kBatch;
    const std::size_t count = std::min(kBatch, queries.size() - first);
    Eigen::MatrixXd q(unit.cols(), static_cast<Eigen::Index>(count));
    for (std::size_t t = 0; t < count; ++t) {
      const auto& qu = queries[first + t];
      const auto col = static_cast<Eigen::Index>(t);
      q.col(col) = (raw.row(static_cast<Eigen::Index>(qu.b)) -
                    raw.row(static_cast<Eigen::Index>(qu.a)) +
                    raw.row(static_cast<Eigen::Index>(qu.c)))
                       .transpose();
      const double norm = q.col(col).norm();
      if (norm == 0.0) {
        throw Error(ErrorCode::ZeroVectorUnderCosine, "analogy query vector is zero");
      }
      q.col(col) /= norm;
    }
    std::vector<double> best(count, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> best_idx(count, 0);
    Eigen::MatrixXd scores;
    for (Eigen::Index start = 0; start < n_vocab; start += kBlockRows) {
      const Eigen::Index rows = std::min(kBlockRows, n_vocab - start);
      scores.noalias() = unit.middleRows(start, rows) * q;
      for (std::size_t t = 0; t < count; ++t) {
        const auto& qu = queries[first + t];
        for (Eigen::Index r = 0; r < rows; ++r) {
          const auto w = static_cast<std::size_t>(start + r);
          if (w == qu.a || w == qu.b || w == qu.c) continue;
          const double s = scores(r, static_cast<Eigen::Index>(t));
          if (s > best[t]) {
            best[t] = s;
            best_idx[t] = w;
          }
        }
      }
    }
    for (std::size_t t = 0; t < count; ++t) {
      correct[first + t] = best_idx[t] == queries[first + t].d ? 1 : 0;
    }
  });
  for (char c : correct) score.n_correct += static_cast<std::size_t>(c);
  score.accuracy = static_cast<double>(score.n_correct) / static_cast<double>(score.n_evaluated);
  return score;
}

inline AnalogyScore analogy_accuracy(const PointCloud& emb, const std::vector<AnalogyQuad>& quads) {
  return analogy_accuracy(Vocabulary(emb), quads);
}

/// The two clouds an analogy category relates: left words (a, c) and their
/// right counterparts (b, d). Duplicate pairs collapse; a left word seen with
/// a second right word keeps its first pairing.
inline PairedClouds task_point_clouds(const std::vector<AnalogyQuad>& quads, const Vocabulary& vocab,
                                      Warnings* warnings = nullptr) {
  if (quads.empty()) throw Error(ErrorCode::TooFewPairs, "no analogies in category");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::unordered_map<std::string, std::string> right_of;
  auto offer = [&](const std::string& left, const std::string& right) {
    auto [it, inserted] = right_of.emplace(left, right);
    if (inserted) {
      pairs.emplace_back(left, right);
    } else if (it->second != right) {
      warn(warnings, "'" + left + "' pairs with both '" + it->second + "' and '" + right +
                         "'; keeping '" + it->second + "'");
    }
  };
  for (const auto& q : quads) {
    offer(q.a, q.b);
    offer(q.c, q.d);
  }
  std::vector<std::string> ids;
  std::vector<std::size_t> left_rows, right_rows;
  for (const auto& [left, right] : pairs) {
    const auto l = vocab.find(left);
    const auto r = vocab.find(right);
    if (!l || !r) continue;
    ids.push_back(left);
    left_rows.push_back(*l);
    right_rows.push_back(*r);
  }
  if (ids.size() < 2) {
    throw Error(ErrorCode::TooFewPairs,
                "only " + std::to_string(ids.size()) + " in-vocabulary word pairs (need >= 2)");
  }
  const auto p = vocab.raw().cols();
  Matrix x(static_cast<Eigen::Index>(ids.size()), p);
  Matrix y(static_cast<Eigen::Index>(ids.size()), p);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = vocab.raw().row(static_cast<Eigen::Index>(left_rows[i]));
    y.row(static_cast<Eigen::Index>(i)) = vocab.raw().row(static_cast<Eigen::Index>(right_rows[i]));
  }
  return validate_paired(PointCloud(ids, std::move(x)), PointCloud(ids, std::move(y)));
}

// ---------------------------------------------------------------------------
// Zero-shot classification

/// Items with a class label each. `classes` is the label order used for ties
/// and for class-mean output.
class LabeledEmbeddings {
 public:
  LabeledEmbeddings(std::vector<std::string> ids, std::vector<std::string> labels, Matrix data,
                    std::vector<std::string> classes = {})
      : ids_(std::move(ids)), labels_(std::move(labels)), data_(std::move(data)),
        classes_(std::move(classes)) {
    if (ids_.size() != labels_.size() || static_cast<Eigen::Index>(ids_.size()) != data_.rows()) {
      throw Error(ErrorCode::InvalidShape, "ids, labels and rows differ in length");
    }
    if (ids_.empty()) throw Error(ErrorCode::TooFewPoints, "no labeled items");
    if (!data_.allFinite()) throw Error(ErrorCode::NonFiniteCoordinate, "non-finite coordinate");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_) {
      if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "duplicate id '" + id + "'");
    }
    std::unordered_map<std::string, std::size_t> class_pos;
    if (classes_.empty()) {
      for (const auto& l : labels_) {
        if (class_pos.emplace(l, classes_.size()).second) classes_.push_back(l);
      }
    } else {
      for (const auto& c : classes_) {
        if (!class_pos.emplace(c, class_pos.size()).second) {
          throw Error(ErrorCode::DuplicateId, "duplicate class '" + c + "'");
        }
      }
    }
    label_index_.reserve(labels_.size());
    for (const auto& l : labels_) {
      auto it = class_pos.find(l);
      if (it == class_pos.end()) {
        throw Error(ErrorCode::InvalidArgument, "label '" + l + "' is not a listed class");
      }
      label_index_.push_back(it->second);
    }
  }

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const Matrix& data() const { return data_; }
  std::size_t class_of(std::size_t item) const { return label_index_[item]; }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  Matrix data_;
  std::vector<std::string> classes_;
  std::vector<std::size_t> label_index_;
};

/// One row per class, the arithmetic mean of its members, in class order.
inline PointCloud class_mean_embeddings(const LabeledEmbeddings& data) {
  const auto n_classes = static_cast<Eigen::Index>(data.classes().size());
  Matrix sums = Matrix::Zero(n_classes, data.data().cols());
  std::vector<std::size_t> counts(data.classes().size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    sums.row(static_cast<Eigen::Index>(data.class_of(i))) += data.data().row(static_cast<Eigen::Index>(i));
    ++counts[data.class_of(i)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw Error(ErrorCode::EmptyClass, "class '" + data.classes()[c] + "' has no items");
    sums.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }
  return PointCloud(data.classes(), std::move(sums));
}

/// Rows of `texts` re-ordered to follow `classes`.
inline PointCloud texts_in_class_order(const PointCloud& texts, const std::vector<std::string>& classes) {
  std::unordered_map<std::string_view, std::size_t> rows;
  for (std::size_t i = 0; i < texts.size(); ++i) rows.emplace(texts.ids()[i], i);
  std::vector<std::size_t> order;
  order.reserve(classes.size());
  for (const auto& c : classes) {
    auto it = rows.find(c);
    if (it == rows.end()) throw Error(ErrorCode::MissingClassText, "no text embedding for class '" + c + "'");
    order.push_back(it->second);
  }
  return texts.select(order);
}

/// Fraction of images whose most cosine-similar class text is their own
/// class. Ties go to the earlier class.
inline double zero_shot_accuracy(const LabeledEmbeddings& images, const PointCloud& texts) {
  const PointCloud ordered = texts_in_class_order(texts, images.classes());
  if (ordered.dim() != images.dim()) {
    throw Error(ErrorCode::InconsistentDimension, "image and text embeddings differ in width");
  }
  Matrix t = ordered.data();
  for (Eigen::Index c = 0; c < t.rows(); ++c) {
    const double norm = t.row(c).norm();
    if (norm == 0.0) {
      throw Error(ErrorCode::ZeroVectorUnderCosine,
                  "text for class '" + ordered.ids()[static_cast<std::size_t>(c)] + "' is a zero vector");
    }
    t.row(c) /= norm;
  }
  std::vector<char> hit(images.size(), 0);
  parallel::for_each(images.size(), [&](std::size_t i) {
    const auto v = images.data().row(static_cast<Eigen::Index>(i));
    const double norm = v.norm();
    if (norm == 0.0) {
      throw Error(ErrorCode::ZeroVectorUnderCosine, "image '" + images.ids()[i] + "' is a zero vector");
    }
    const Eigen::VectorXd scores = t * (v.transpose() / norm);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.size(); ++c) {
      if (scores[c] > scores[best]) best = c;
    }
    hit[i] = static_cast<std::size_t>(best) == images.class_of(i) ? 1 : 0;
  });
  std::size_t correct = 0;
  for (char h : hit) correct += static_cast<std::size_t>(h);
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

// ---------------------------------------------------------------------------
// Correlation

struct PearsonResult {
  double rho = 0.0;
  double p_value = 1.0;
};

/// Sample Pearson correlation with a two-sided p-value from Student's t with
/// n-2 degrees of freedom.
inline PearsonResult pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + " values");
  }
  if (xs.size() < 3) throw Error(ErrorCode::LengthMismatch, "pearson needs at least 3 pairs");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateVariance, "a series has zero variance");
  PearsonResult r;
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  const double one_minus = 1.0 - r.rho * r.rho;
  if (one_minus <= 0.0) {
    r.p_value = 0.0;
  } else {
    const double t = std::abs(r.rho) * std::sqrt(df / one_minus);
    const boost::math::students_t dist(df);
    r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
  }
  return r;
}

struct CorrelationPair {
  std::string name;
  double similarity = 0.0;
  double accuracy = 0.0;
};

struct CorrelationReport {
  std::string measure;
  std::vector<CorrelationPair> pairs;
  std::optional<double> rho;  // emitted only for >= 3 pairs with non-zero variance
  std::optional<double> p_value;
};

inline CorrelationReport correlate(std::string measure, std::vector<CorrelationPair> pairs,
                                   Warnings* warnings = nullptr) {
  CorrelationReport rep{std::move(measure), std::move(pairs), std::nullopt, std::nullopt};
  if (rep.pairs.size() < 3) {
    warn(warnings, rep.measure + ": fewer than 3 tasks, correlation not computed");
    return rep;
  }
  std::vector<double> xs, ys;
  for (const auto& p : rep.pairs) {
    xs.push_back(p.similarity);
    ys.push_back(p.accuracy);
  }
  try {
    const auto r = pearson(xs, ys);
    rep.rho = r.rho;
    rep.p_value = r.p_value;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateVariance) throw;
    warn(warnings, rep.measure + ": " + e.what());
  }
  return rep;
}

struct TaskInput {
  std::string name;
  PairedClouds clouds;
  double accuracy = 0.0;
};

/// Neighborhood size for a study: a fixed k, or a relative size c mapped to
/// k per task.
struct NeighborhoodSize {
  std::optional<std::size_t> k;
  std::optional<double> c;

  std::size_t resolve(std::size_t n) const {
    if (k) return *k;
    if (c) return k_from_c(*c, n);
    throw Error(ErrorCode::InvalidArgument, "neither k nor c given");
  }
};

struct StudyConfig {
  NeighborhoodSize size;
  Metric metric = Metric::cosine();
  bool with_cka = false;
  KernelSpec kernel = KernelSpec::linear();
};

struct StudyRow {
  std::string name;
  std::size_t n = 0;
  std::size_t k = 0;
  double c = 0.0;
  double accuracy = 0.0;
  double nngs = 0.0;
  std::optional<double> cka;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  CorrelationReport nngs;
  std::optional<CorrelationReport> cka;
};

/// Per task: NNGS (and optionally CKA) of its paired clouds against its
/// accuracy, then Pearson across tasks.
inline StudyResult accuracy_similarity_study(const std::vector<TaskInput>& tasks, const StudyConfig& cfg,
                                             Warnings* warnings = nullptr) {
  std::vector<StudyRow> rows(tasks.size());
  parallel::for_each(tasks.size(), [&](std::size_t i) {
    const auto& t = tasks[i];
    StudyRow row;
    row.name = t.name;
    row.n = t.clouds.size();
    row.k = cfg.size.resolve(row.n);
    row.c = relative_size(row.k, row.n);
    row.accuracy = t.accuracy;
    row.nngs = nngs(t.clouds, row.k, cfg.metric).nngs;
    if (cfg.with_cka) row.cka = cka(t.clouds, cfg.kernel);
    rows[i] = std::move(row);
  });
  std::vector<CorrelationPair> nngs_pairs, cka_pairs;
  for (const auto& r : rows) {
    nngs_pairs.push_back({r.name, r.nngs, r.accuracy});
    if (r.cka) cka_pairs.push_back({r.name, *r.cka, r.accuracy});
  }
  StudyResult result{std::move(rows), correlate("nngs", std::move(nngs_pairs), warnings), std::nullopt};
  if (cfg.with_cka) result.cka = correlate("cka:" + cfg.kernel.name(), std::move(cka_pairs), warnings);
  return result;
}

/// Per-category analogy scores next to the study built from them.
struct AnalogyStudy {
  std::vector<std::string> categories;
  std::vector<AnalogyScore> scores;
  StudyResult study;
};

/// Scores every category, builds its word-pair clouds and correlates. A
/// category with fewer than 2 usable pairs or no fully in-vocabulary analogy
/// is dropped with a warning.
inline AnalogyStudy analogy_study(const Vocabulary& vocab, const std::vector<AnalogyCategory>& categories,
                                  const StudyConfig& cfg, Warnings* warnings = nullptr) {
  std::vector<TaskInput> tasks;
  AnalogyStudy out;
  for (const auto& cat : categories) {
    const auto score = analogy_accuracy(vocab, cat.quads);
    if (score.n_skipped) {
      warn(warnings, cat.name + ": " + std::to_string(score.n_skipped) + " analogies skipped (out of vocabulary)");
    }
    if (score.n_evaluated == 0) {
      warn(warnings, cat.name + ": no analogy fully in vocabulary; category dropped");
      continue;
    }
    try {
      tasks.push_back({cat.name, task_point_clouds(cat.quads, vocab, warnings), score.accuracy});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewPairs) throw;
      warn(warnings, cat.name + ": " + e.detail() + "; category dropped");
      continue;
    }
    out.categories.push_back(cat.name);
    out.scores.push_back(score);
  }
  if (tasks.empty()) {
    throw Error(ErrorCode::TooFewPairs, "no analogy category has enough in-vocabulary word pairs");
  }
  out.study = accuracy_similarity_study(tasks, cfg, warnings);
  return out;
}

}  // namespace nngs
