#pragma once

// Text formats: GloVe vectors, embedding CSV, blob spec JSON, and JSON/CSV
// reports.

#include "nngs/core.hpp"
#include "nngs/similarity.hpp"
#include "nngs/synthetic.hpp"
#include "nngs/tasks.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace nngs::io {

using Json = nlohmann::ordered_json;

inline double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || tok.empty()) {
    throw Error(ErrorCode::UnparsableFloat,
                "line " + std::to_string(line_no) + ": cannot parse '" + std::string(tok) + "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// GloVe text

/// `<token> <f1> ... <fp>` per line. Tokens keep file order; a repeated token
/// keeps its first vector. `max_rows` > 0 stops after that many kept rows.
inline PointCloud read_glove_text(std::istream& in, Warnings* warnings = nullptr,
                                  std::size_t max_rows = 0) {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view rest(line);
    auto next_token = [&rest]() -> std::string_view {
      const auto b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) {
        rest = {};
        return {};
      }
      rest.remove_prefix(b);
      const auto e = rest.find_first_of(" \t");
      const auto tok = rest.substr(0, e);
      rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
      return tok;
    };
    const std::string_view token = next_token();
    if (token.empty()) continue;
    const std::size_t start = values.size();
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      values.push_back(parse_double(tok, line_no));
    }
    const std::size_t p = values.size() - start;
    if (dim == 0) {
      if (p == 0) {
        throw Error(ErrorCode::InconsistentDimension,
                    "line " + std::to_string(line_no) + ": token without coordinates");
      }
      dim = p;
    } else if (p != dim) {
      throw Error(ErrorCode::InconsistentDimension, "line " + std::to_string(line_no) + ": " +
                                                        std::to_string(p) + " values, expected " +
                                                        std::to_string(dim));
    }
    std::string id(token);
    if (!seen.insert(id).second) {
      values.resize(start);
      warn(warnings, "line " + std::to_string(line_no) + ": duplicate token '" + id + "' ignored");
      continue;
    }
    ids.push_back(std::move(id));
    if (max_rows > 0 && ids.size() >= max_rows) break;
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyFile, "no embeddings found");
  Matrix m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), m.data());
  return PointCloud(std::move(ids), std::move(m));
}

// ---------------------------------------------------------------------------
// CSV

/// Reads one RFC-4180 record. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (int ch; (ch = in.get()) != std::char_traits<char>::eof();) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (any) fields.push_back(std::move(field));
  return any;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

/// 12 significant digits; round-trips to within 1e-12 relative.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Shortest representation that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct CsvColumns {
  std::string id = "id";
  std::optional<std::string> label;
  /// Extra string column that splits the rows into groups (e.g. prompt
  /// template); excluded from coordinates.
  std::optional<std::string> group;
};

struct CsvRows {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<std::string> groups;
  std::vector<double> values;
  std::size_t dim = 0;
};

inline CsvRows read_csv_rows(std::istream& in, const CsvColumns& cols) {
  std::vector<std::string> header;
  if (!read_csv_record(in, header)) throw Error(ErrorCode::EmptyFile, "CSV has no header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  auto find_col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::MissingColumn, "no column named '" + name + "'");
  };
  const std::size_t id_col = find_col(cols.id);
  const std::optional<std::size_t> label_col =
      cols.label ? std::optional(find_col(*cols.label)) : std::nullopt;
  const std::optional<std::size_t> group_col =
      cols.group ? std::optional(find_col(*cols.group)) : std::nullopt;
  std::vector<std::size_t> value_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != id_col && i != label_col && i != group_col) value_cols.push_back(i);
  }
  if (value_cols.empty()) throw Error(ErrorCode::MissingColumn, "CSV has no coordinate columns");

  CsvRows rows;
  rows.dim = value_cols.size();
  std::vector<std::string> rec;
  std::size_t line_no = 1;
  while (read_csv_record(in, rec)) {
    ++line_no;
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::InconsistentDimension, "line " + std::to_string(line_no) + ": " +
                                                        std::to_string(rec.size()) +
                                                        " fields, header has " +
                                                        std::to_string(header.size()));
    }
    rows.ids.push_back(rec[id_col]);
    if (label_col) rows.labels.push_back(rec[*label_col]);
    if (group_col) rows.groups.push_back(rec[*group_col]);
    for (std::size_t c : value_cols) rows.values.push_back(parse_double(rec[c], line_no));
  }
  if (rows.ids.empty()) throw Error(ErrorCode::EmptyFile, "CSV has no data rows");
  return rows;
}

inline Matrix rows_matrix(const std::vector<double>& values, std::size_t n, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

/// Embedding CSV (`id[,label],x0,...`) as a cloud, or as labeled items when
/// a label column is named.
inline std::variant<PointCloud, LabeledEmbeddings> read_csv_embeddings(std::istream& in,
                                                                      const CsvColumns& cols = {}) {
  auto rows = read_csv_rows(in, cols);
  Matrix m = rows_matrix(rows.values, rows.ids.size(), rows.dim);
  if (cols.label) return LabeledEmbeddings(std::move(rows.ids), std::move(rows.labels), std::move(m));
  return PointCloud(std::move(rows.ids), std::move(m));
}

inline PointCloud read_csv_cloud(std::istream& in, const std::string& id_column = "id") {
  return std::get<PointCloud>(read_csv_embeddings(in, {id_column, std::nullopt, std::nullopt}));
}

inline LabeledEmbeddings read_csv_labeled(std::istream& in, const std::string& id_column = "id",
                                          const std::string& label_column = "label") {
  return std::get<LabeledEmbeddings>(read_csv_embeddings(in, {id_column, label_column, std::nullopt}));
}

/// Splits a CSV with a group column into one cloud per group, in order of
/// first appearance.
inline std::vector<std::pair<std::string, PointCloud>> read_csv_grouped(std::istream& in,
                                                                        const std::string& group_column,
                                                                        const std::string& id_column = "id") {
  const auto rows = read_csv_rows(in, {id_column, std::nullopt, group_column});
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < rows.ids.size(); ++i) {
    auto [it, inserted] = members.try_emplace(rows.groups[i]);
    if (inserted) order.push_back(rows.groups[i]);
    it->second.push_back(i);
  }
  std::vector<std::pair<std::string, PointCloud>> out;
  for (const auto& g : order) {
    const auto& idx = members.at(g);
    std::vector<std::string> ids;
    Matrix m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(rows.dim));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      ids.push_back(rows.ids[idx[r]]);
      for (std::size_t c = 0; c < rows.dim; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows.values[idx[r] * rows.dim + c];
      }
    }
    out.emplace_back(g, PointCloud(std::move(ids), std::move(m)));
  }
  return out;
}

inline void write_csv_cloud(const PointCloud& cloud, std::ostream& out) {
  out << "id";
  for (std::size_t j = 0; j < cloud.dim(); ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out << csv_escape(cloud.ids()[i]);
    for (std::size_t j = 0; j < cloud.dim(); ++j) {
      out << ',' << format_exact(cloud.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed");
}

/// Ids must not contain whitespace.
inline void write_glove_text(const PointCloud& cloud, std::ostream& out) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& id = cloud.ids()[i];
    if (id.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "token '" + id + "' contains whitespace");
    }
    out << id;
    for (std::size_t j = 0; j < cloud.dim(); ++j) {
      out << ' ' << format_exact(cloud.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed");
}

// ---------------------------------------------------------------------------
// Blob spec JSON

inline BlobSpec blob_spec_from_json(const Json& j) {
  try {
    BlobSpec s;
    s.n_dim = j.at("n_dim").get<std::size_t>();
    s.n_items = j.at("n_items").get<std::vector<std::size_t>>();
    s.mu1 = j.at("mu1").get<std::vector<double>>();
    s.sigma1 = j.at("sigma1").get<std::vector<double>>();
    s.mu2 = j.at("mu2").get<std::vector<double>>();
    s.sigma2 = j.at("sigma2").get<std::vector<double>>();
    if (j.at("noise").is_number()) {
      s.noise.assign(s.n_items.size(), j.at("noise").get<double>());
    } else {
      s.noise = j.at("noise").get<std::vector<double>>();
    }
    s.validate();
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SpecShapeMismatch, std::string("blob spec: ") + e.what());
  }
}

inline Json to_json(const BlobSpec& s) {
  Json j;
  j["n_dim"] = s.n_dim;
  j["n_items"] = s.n_items;
  j["mu1"] = s.mu1;
  j["sigma1"] = s.sigma1;
  j["mu2"] = s.mu2;
  j["sigma2"] = s.sigma2;
  j["noise"] = s.noise;
  return j;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { Json, Csv };

/// Rounds to 12 significant digits so the JSON text carries at most that many.
inline Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_double(v).c_str(), nullptr);
}

inline Json num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

inline Json to_json(const SimilarityReport& r) {
  Json j;
  j["k"] = r.k;
  j["n"] = r.n;
  j["c"] = num(r.c);
  j["nngs"] = num(r.nngs);
  j["baseline"] = num(r.baseline);
  Json pts = Json::array();
  for (std::size_t i = 0; i < r.per_point.size(); ++i) {
    pts.push_back({{"id", i < r.ids.size() ? r.ids[i] : std::to_string(i)}, {"jaccard", num(r.per_point[i])}});
  }
  j["per_point"] = std::move(pts);
  return j;
}

inline Json curve_samples_json(const SimilarityCurve& c) {
  Json arr = Json::array();
  for (const auto& s : c.samples) {
    arr.push_back({{"k", s.k},
                   {"c", num(s.c)},
                   {"mean", num(s.mean)},
                   {"std", num(s.std)},
                   {"band_lo", num(s.band_lo())},
                   {"band_hi", num(s.band_hi())},
                   {"baseline", num(s.baseline)}});
  }
  return arr;
}

inline Json to_json(const SimilarityCurve& c) {
  Json j;
  j["n_trials"] = c.n_trials;
  j["samples"] = curve_samples_json(c);
  return j;
}

/// Like num(), but keeps infinities as the strings "inf" / "-inf".
inline Json num_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return num(v);
}

inline Json to_json(const SweepResult& r) {
  Json j;
  j["axis"] = r.axis_name;
  j["metric"] = r.metric;
  j["n_trials"] = r.n_trials;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"axis_value", num_or_inf(e.axis_value)},
                       {"n", e.n},
                       {"d", e.d},
                       {"snr_db", num_or_inf(e.snr_db)},
                       {"samples", curve_samples_json(e.curve)}});
  }
  j["entries"] = std::move(entries);
  return j;
}

inline Json to_json(const CorrelationReport& r) {
  Json j;
  j["measure"] = r.measure;
  j["rho"] = num(r.rho);
  j["p_value"] = num(r.p_value);
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"name", p.name}, {"similarity", num(p.similarity)}, {"accuracy", num(p.accuracy)}});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

inline Json to_json(const StudyResult& r) {
  Json j;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json o{{"name", row.name}, {"n", row.n},           {"k", row.k},
           {"c", num(row.c)},  {"accuracy", num(row.accuracy)}, {"nngs", num(row.nngs)}};
    if (r.cka) o["cka"] = num(row.cka);
    rows.push_back(std::move(o));
  }
  j["tasks"] = std::move(rows);
  j["nngs"] = to_json(r.nngs);
  if (r.cka) j["cka"] = to_json(*r.cka);
  return j;
}

inline Json to_json(const BlobTable& t) {
  Json j;
  j["dataset"] = t.dataset;
  j["metric"] = t.metric;
  j["n_items"] = t.n_items;
  j["n_trials"] = t.n_trials;
  Json cols = Json::array();
  for (const auto& c : t.columns) {
    Json vals = Json::array();
    for (double v : c.values) vals.push_back(num(v));
    cols.push_back({{"method", c.method},
                    {"parameter", c.parameter},
                    {"mean", num(c.mean)},
                    {"std", num(c.std)},
                    {"values", std::move(vals)}});
  }
  j["columns"] = std::move(cols);
  return j;
}

inline void write_csv(const BlobTable& t, std::ostream& out) {
  out << "dataset,method,parameter,mean,std,n_trials\n";
  for (const auto& c : t.columns) {
    out << csv_escape(t.dataset) << ',' << c.method << ',' << csv_escape(c.parameter) << ','
        << format_double(c.mean) << ',' << format_double(c.std) << ',' << t.n_trials << '\n';
  }
}

inline void write_csv(const SimilarityReport& r, std::ostream& out) {
  out << "id,jaccard,k,c,baseline\n";
  for (std::size_t i = 0; i < r.per_point.size(); ++i) {
    out << csv_escape(i < r.ids.size() ? r.ids[i] : std::to_string(i)) << ','
        << format_double(r.per_point[i]) << ',' << r.k << ',' << format_double(r.c) << ','
        << format_double(r.baseline) << '\n';
  }
}

inline void write_csv(const SimilarityCurve& c, std::ostream& out) {
  out << "k,c,mean,std,baseline\n";
  for (const auto& s : c.samples) {
    out << s.k << ',' << format_double(s.c) << ',' << format_double(s.mean) << ','
        << format_double(s.std) << ',' << format_double(s.baseline) << '\n';
  }
}

inline void write_csv(const SweepResult& r, std::ostream& out) {
  // The swept quantity is named per row; its value sits in the n, d or snr_db column.
  out << "axis,n,d,snr_db,k,c,mean,std,band_lo,band_hi,baseline,n_trials\n";
  const std::string axis = csv_escape(r.axis_name);
  for (const auto& e : r.entries) {
    for (const auto& s : e.curve.samples) {
      out << axis << ',' << e.n << ',' << e.d << ','
          << format_double(e.snr_db) << ',' << s.k << ',' << format_double(s.c) << ','
          << format_double(s.mean) << ',' << format_double(s.std) << ','
          << format_double(s.band_lo()) << ',' << format_double(s.band_hi()) << ','
          << format_double(s.baseline) << ',' << e.curve.n_trials << '\n';
    }
  }
}

inline void write_csv(const CorrelationReport& r, std::ostream& out) {
  out << "name,similarity,accuracy\n";
  for (const auto& p : r.pairs) {
    out << csv_escape(p.name) << ',' << format_double(p.similarity) << ','
        << format_double(p.accuracy) << '\n';
  }
}

inline void write_csv(const StudyResult& r, std::ostream& out) {
  out << "name,n,k,c,accuracy,nngs" << (r.cka ? ",cka" : "") << '\n';
  for (const auto& row : r.rows) {
    out << csv_escape(row.name) << ',' << row.n << ',' << row.k << ',' << format_double(row.c)
        << ',' << format_double(row.accuracy) << ',' << format_double(row.nngs);
    if (r.cka) out << ',' << (row.cka ? format_double(*row.cka) : "");
    out << '\n';
  }
}

/// JSON gets the resolved run configuration (if any) as its first key; CSV
/// is the bare table.
template <typename Report>
void write_report(const Report& report, ReportFormat format, std::ostream& out,
                  const Json& config = nullptr) {
  if (format == ReportFormat::Json) {
    Json j;
    if (!config.is_null()) j["config"] = config;
    Json body = to_json(report);
    for (auto& [key, value] : body.items()) j[key] = std::move(value);
    out << j.dump(2) << '\n';
  } else {
    write_csv(report, out);
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing report");
}

}  // namespace nngs::io
