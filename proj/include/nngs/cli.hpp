#pragma once

// Command-line front end. Kept in a header so tests can drive run() with
// in-memory streams.
//
// Exit status: 0 success, 2 user or input error, 1 internal error.

#include "nngs/cka.hpp"
#include "nngs/core.hpp"
#include "nngs/io.hpp"
#include "nngs/knn.hpp"
#include "nngs/parallel.hpp"
#include "nngs/similarity.hpp"
#include "nngs/synthetic.hpp"
#include "nngs/tasks.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace nngs::cli {

using io::Json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// Flag parsing helpers

inline std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorCode::InvalidArgument, "empty entry in grid '" + text + "'");
    out.push_back(cur.substr(b, e - b + 1));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
  return out;
}

inline double parse_real(const std::string& tok) {
  std::string t = tok;
  for (auto& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "not a number: '" + tok + "'");
}

inline std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  for (const auto& t : split_commas(text)) out.push_back(parse_real(t));
  return out;
}

/// Integers, with "a:b" expanding to the inclusive range a..b.
inline std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  auto one = [&](const std::string& t) -> std::size_t {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(t, &used);
      if (used == t.size() && v >= 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidArgument, "not a non-negative integer: '" + t + "'");
  };
  for (const auto& t : split_commas(text)) {
    const auto colon = t.find(':');
    if (colon == std::string::npos) {
      out.push_back(one(t));
      continue;
    }
    const std::size_t lo = one(t.substr(0, colon));
    const std::size_t hi = one(t.substr(colon + 1));
    if (hi < lo) throw Error(ErrorCode::InvalidArgument, "empty range '" + t + "'");
    for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

inline std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Output

struct OutputOptions {
  std::string format = "json";
  std::string out_path;
};

inline void add_output_flags(CLI::App* app, OutputOptions& o, const std::string& default_format) {
  o.format = default_format;
  app->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app->add_option("--out", o.out_path, "Write the report here instead of stdout");
}

/// Writes the report. CSV carries no config, so it goes to `<out>.config.json`
/// (or stderr when writing to stdout).
template <typename Report>
void emit(const Report& report, const OutputOptions& o, const Json& config, std::ostream& out,
          std::ostream& err) {
  const auto format = o.format == "csv" ? io::ReportFormat::Csv : io::ReportFormat::Json;
  if (o.out_path.empty()) {
    io::write_report(report, format, out, config);
    if (format == io::ReportFormat::Csv) err << "config: " << config.dump() << '\n';
    return;
  }
  std::ofstream file(o.out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open '" + o.out_path + "' for writing");
  io::write_report(report, format, file, config);
  if (format == io::ReportFormat::Csv) {
    std::ofstream side(o.out_path + ".config.json", std::ios::binary);
    side << config.dump(2) << '\n';
    if (!side) throw Error(ErrorCode::IoFailure, "cannot write config sidecar");
  }
}

inline void flush_warnings(const Warnings& w, std::ostream& err) {
  for (const auto& m : w.messages) err << "warning: " << m << '\n';
}

/// Re-throws loader errors with the file path in front.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail());
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "'");
  return in;
}

inline std::string read_text(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline bool looks_like_csv(const std::string& path, const std::string& fmt) {
  if (fmt == "csv") return true;
  if (fmt == "glove") return false;
  return std::filesystem::path(path).extension() == ".csv";
}

inline PointCloud load_cloud(const std::string& path, const std::string& fmt, const std::string& id_column,
                             Warnings& warnings) {
  return with_path(path, [&] {
    auto in = open_input(path);
    if (looks_like_csv(path, fmt)) return io::read_csv_cloud(in, id_column);
    return io::read_glove_text(in, &warnings);
  });
}

// ---------------------------------------------------------------------------
// Subcommands

struct NngsArgs {
  std::string x_path, y_path;
  std::string k, c;
  std::string metric = "cosine";
  std::string metric_x, metric_y;
  std::string align = "strict";
  std::string input_format = "auto";
  std::string id_column = "id";
  OutputOptions output;
};

inline void cmd_nngs(const NngsArgs& a, std::ostream& out, std::ostream& err) {
  if (a.k.empty() == a.c.empty()) throw Error(ErrorCode::InvalidArgument, "give exactly one of --k or --c");
  const Metric mx = Metric::parse(a.metric_x.empty() ? a.metric : a.metric_x);
  const Metric my = Metric::parse(a.metric_y.empty() ? a.metric : a.metric_y);
  Warnings warnings;
  auto x = load_cloud(a.x_path, a.input_format, a.id_column, warnings);
  auto y = load_cloud(a.y_path, a.input_format, a.id_column, warnings);
  const PairedClouds pair = a.align == "intersect" ? align_by_intersection(x, y, &warnings)
                                                   : validate_paired(std::move(x), std::move(y));
  std::vector<std::size_t> ks;
  if (!a.k.empty()) {
    ks = parse_counts(a.k);
  } else {
    for (double c : parse_reals(a.c)) ks.push_back(k_from_c(c, pair.size()));
  }
  ks = sorted_unique(std::move(ks));

  Json config;
  config["command"] = "nngs";
  config["x"] = a.x_path;
  config["y"] = a.y_path;
  config["align"] = a.align;
  config["metric_x"] = mx.name();
  config["metric_y"] = my.name();
  if (!a.k.empty()) config["k"] = a.k;
  if (!a.c.empty()) config["c"] = a.c;
  config["n"] = pair.size();
  config["resolved_k"] = ks;
  flush_warnings(warnings, err);

  if (ks.size() == 1) {
    emit(nngs(pair, ks.front(), mx, my), a.output, config, out, err);
  } else {
    emit(nngs_sweep(pair, ks, mx, my), a.output, config, out, err);
  }
}

struct SweepArgs {
  std::string kind;
  std::string n, d, k, c, snr;
  std::size_t trials = 30;
  std::uint64_t seed = 0;
  std::string metric = "cosine";
  OutputOptions output;
};

inline std::size_t single(const std::vector<std::size_t>& v, const char* flag) {
  if (v.size() != 1) throw Error(ErrorCode::InvalidArgument, std::string(flag) + " takes a single value here");
  return v.front();
}

inline void cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const Metric metric = Metric::parse(a.metric);
  const Seed seed{a.seed};
  if (a.snr.empty()) throw Error(ErrorCode::InvalidArgument, "--snr is required");
  const auto snrs = parse_reals(a.snr);
  Json config;
  config["command"] = "sweep";
  config["kind"] = a.kind;
  config["metric"] = metric.name();
  config["trials"] = a.trials;
  config["seed"] = a.seed;
  Json snr_json = Json::array();
  for (double s : snrs) snr_json.push_back(io::num_or_inf(s));
  config["snr_db"] = snr_json;

  auto need = [](const std::string& v, const char* flag) {
    if (v.empty()) throw Error(ErrorCode::InvalidArgument, std::string(flag) + " is required for this sweep");
    return v;
  };
  SweepResult result;
  if (a.kind == "noise" || a.kind == "snr") {
    const std::size_t n = a.n.empty() ? 100 : single(parse_counts(a.n), "--n");
    const std::size_t d = a.d.empty() ? 50 : single(parse_counts(a.d), "--d");
    std::vector<std::size_t> ks;
    if (!a.k.empty()) {
      ks = sorted_unique(parse_counts(a.k));
    } else if (a.kind == "snr") {
      ks = {20};
    } else {
      for (std::size_t k = 1; k + 1 <= n; ++k) ks.push_back(k);
    }
    config["n"] = n;
    config["d"] = d;
    config["k"] = ks;
    result = noise_sweep(n, d, ks, snrs, a.trials, seed, metric);
  } else if (a.kind == "size") {
    const double c = a.c.empty() ? 0.2 : parse_real(a.c);
    const auto ns = parse_counts(need(a.n, "--n"));
    const std::size_t d = a.d.empty() ? 50 : single(parse_counts(a.d), "--d");
    config["c"] = io::num(c);
    config["n"] = ns;
    config["d"] = d;
    if (snrs.size() != 1) throw Error(ErrorCode::InvalidArgument, "size sweep takes a single --snr");
    result = size_invariance_sweep(c, ns, snrs.front(), d, a.trials, seed, metric);
  } else if (a.kind == "dim") {
    const std::size_t k = a.k.empty() ? 20 : single(parse_counts(a.k), "--k");
    const std::size_t n = a.n.empty() ? 100 : single(parse_counts(a.n), "--n");
    const auto ds = parse_counts(need(a.d, "--d"));
    config["k"] = k;
    config["n"] = n;
    config["d"] = ds;
    if (snrs.size() != 1) throw Error(ErrorCode::InvalidArgument, "dim sweep takes a single --snr");
    result = dim_invariance_sweep(k, n, ds, snrs.front(), a.trials, seed, metric);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown sweep kind '" + a.kind + "'");
  }
  emit(result, a.output, config, out, err);
}

struct BlobsArgs {
  std::string preset;
  std::string spec_path;
  std::uint64_t seed = 0;
  std::size_t trials = 10;
  std::string report = "both";
  std::string k = "5,300";
  std::string sigma = "0.01,0.1,3";
  std::string metric = "minkowski:2";
  OutputOptions output;
};

inline void cmd_blobs(const BlobsArgs& a, std::ostream& out, std::ostream& err) {
  if (a.preset.empty() == a.spec_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --preset or --spec");
  }
  BlobSpec spec;
  std::string name;
  if (!a.preset.empty()) {
    spec = blob_preset(a.preset);
    name = a.preset;
  } else {
    spec = with_path(a.spec_path, [&] {
      Json j;
      try {
        j = Json::parse(read_text(a.spec_path));
      } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::SpecShapeMismatch, e.what());
      }
      return io::blob_spec_from_json(j);
    });
    name = std::filesystem::path(a.spec_path).stem().string();
  }
  BlobTableConfig cfg;
  cfg.with_cka = a.report != "nngs";
  cfg.with_nngs = a.report != "cka";
  cfg.ks = sorted_unique(parse_counts(a.k));
  cfg.sigmas = parse_reals(a.sigma);
  cfg.metric = Metric::parse(a.metric);
  const auto trials = blob_trials(spec, cfg, a.trials, Seed{a.seed});

  Json config;
  config["command"] = "blobs";
  config["dataset"] = name;
  config["spec"] = io::to_json(spec);
  config["report"] = a.report;
  config["k"] = cfg.ks;
  Json sig = Json::array();
  for (double s : cfg.sigmas) sig.push_back(io::num(s));
  config["sigma"] = sig;
  config["metric"] = cfg.metric.name();
  config["trials"] = a.trials;
  config["seed"] = a.seed;
  emit(summarize_blobs(name, trials, cfg, spec.total_items()), a.output, config, out, err);
}

struct AnalogyArgs {
  std::string embeddings, questions;
  std::string c = "0.3";
  std::string k;
  std::string metric = "cosine";
  bool with_cka = false;
  bool keep_case = false;
  std::size_t vocab_limit = 0;
  OutputOptions output;
};

inline void cmd_analogy(const AnalogyArgs& a, std::ostream& out, std::ostream& err) {
  Warnings warnings;
  const auto emb = with_path(a.embeddings, [&] {
    auto in = open_input(a.embeddings);
    return io::read_glove_text(in, &warnings, a.vocab_limit);
  });
  const auto categories = with_path(a.questions, [&] {
    return parse_analogy_file(read_text(a.questions), &warnings, !a.keep_case);
  });
  const Vocabulary vocab(emb);

  StudyConfig cfg;
  cfg.metric = Metric::parse(a.metric);
  cfg.with_cka = a.with_cka;
  if (!a.k.empty()) {
    cfg.size.k = single(parse_counts(a.k), "--k");
  } else {
    cfg.size.c = parse_real(a.c);
    hyper_baseline_c(*cfg.size.c);  // range check
  }

  AnalogyStudy result = [&] {
    try {
      return analogy_study(vocab, categories, cfg, &warnings);
    } catch (const Error&) {
      flush_warnings(warnings, err);
      throw;
    }
  }();
  flush_warnings(warnings, err);

  Json config;
  config["command"] = "analogy";
  config["embeddings"] = a.embeddings;
  config["questions"] = a.questions;
  if (cfg.size.k) config["k"] = *cfg.size.k;
  if (cfg.size.c) config["c"] = io::num(*cfg.size.c);
  config["metric"] = cfg.metric.name();
  config["with_cka"] = a.with_cka;
  config["lowercase"] = !a.keep_case;
  config["vocab_limit"] = a.vocab_limit;
  config["vocab_size"] = vocab.size();
  Json evals = Json::array();
  for (std::size_t i = 0; i < result.categories.size(); ++i) {
    evals.push_back({{"name", result.categories[i]},
                     {"n_evaluated", result.scores[i].n_evaluated},
                     {"n_correct", result.scores[i].n_correct},
                     {"n_skipped", result.scores[i].n_skipped}});
  }
  config["evaluations"] = std::move(evals);
  emit(result.study, a.output, config, out, err);
}

struct ZeroShotArgs {
  std::string images;
  std::vector<std::string> texts;
  std::string template_column;
  std::string id_column = "id";
  std::string label_column = "label";
  std::size_t k = 3;
  std::string metric = "cosine";
  bool with_cka = false;
  std::string class_means_out;
  OutputOptions output;
};

inline void cmd_zeroshot(const ZeroShotArgs& a, std::ostream& out, std::ostream& err) {
  Warnings warnings;
  const auto images = with_path(a.images, [&] {
    auto in = open_input(a.images);
    return io::read_csv_labeled(in, a.id_column, a.label_column);
  });
  const PointCloud means = class_mean_embeddings(images);
  if (!a.class_means_out.empty()) {
    std::ofstream f(a.class_means_out, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open '" + a.class_means_out + "'");
    io::write_csv_cloud(means, f);
  }

  std::vector<std::pair<std::string, PointCloud>> templates;
  for (const auto& path : a.texts) {
    with_path(path, [&] {
      auto in = open_input(path);
      if (!a.template_column.empty()) {
        for (auto& g : io::read_csv_grouped(in, a.template_column, a.id_column)) templates.push_back(std::move(g));
      } else {
        templates.emplace_back(std::filesystem::path(path).stem().string(), io::read_csv_cloud(in, a.id_column));
      }
      return 0;
    });
  }
  if (templates.empty()) throw Error(ErrorCode::InvalidArgument, "no text embeddings given");

  StudyConfig cfg;
  cfg.size.k = a.k;
  cfg.metric = Metric::parse(a.metric);
  cfg.with_cka = a.with_cka;
  std::vector<TaskInput> tasks;
  for (auto& [name, texts] : templates) {
    const double acc = with_path(name, [&] { return zero_shot_accuracy(images, texts); });
    auto ordered = texts_in_class_order(texts, images.classes());
    tasks.push_back({name, validate_paired(means, std::move(ordered)), acc});
  }
  auto study = accuracy_similarity_study(tasks, cfg, &warnings);
  flush_warnings(warnings, err);

  Json config;
  config["command"] = "zeroshot";
  config["images"] = a.images;
  config["texts"] = a.texts;
  if (!a.template_column.empty()) config["template_column"] = a.template_column;
  config["k"] = a.k;
  config["metric"] = cfg.metric.name();
  config["with_cka"] = a.with_cka;
  config["n_images"] = images.size();
  config["n_classes"] = images.classes().size();
  if (!a.class_means_out.empty()) config["class_means_out"] = a.class_means_out;
  emit(study, a.output, config, out, err);
}

struct BaselineArgs {
  std::string n, k, c;
  std::string format = "csv";
};

inline void cmd_baseline(const BaselineArgs& a, std::ostream& out) {
  if (a.k.empty() == a.c.empty()) throw Error(ErrorCode::InvalidArgument, "give exactly one of --k or --c");
  struct Row {
    std::optional<std::size_t> n, k;
    double c, h;
  };
  std::vector<Row> rows;
  if (a.n.empty()) {
    if (!a.k.empty()) throw Error(ErrorCode::InvalidArgument, "--k needs --n");
    for (double c : parse_reals(a.c)) rows.push_back({std::nullopt, std::nullopt, c, hyper_baseline_c(c)});
  } else {
    for (std::size_t n : parse_counts(a.n)) {
      std::vector<std::size_t> ks;
      if (!a.k.empty()) {
        ks = parse_counts(a.k);
      } else {
        for (double c : parse_reals(a.c)) ks.push_back(k_from_c(c, n));
      }
      for (std::size_t k : ks) rows.push_back({n, k, relative_size(k, n), hyper_baseline(k, n)});
    }
  }
  if (a.format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      arr.push_back({{"n", r.n ? Json(*r.n) : Json(nullptr)},
                     {"k", r.k ? Json(*r.k) : Json(nullptr)},
                     {"c", io::num(r.c)},
                     {"baseline", io::num(r.h)}});
    }
    out << Json{{"rows", arr}}.dump(2) << '\n';
    return;
  }
  out << "n,k,c,baseline\n";
  for (const auto& r : rows) {
    out << (r.n ? std::to_string(*r.n) : "") << ',' << (r.k ? std::to_string(*r.k) : "") << ','
        << io::format_double(r.c) << ',' << io::format_double(r.h) << '\n';
  }
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Nearest-neighbor graph similarity between paired embeddings"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker cap (0: NNGS_THREADS or all cores)");

  NngsArgs nngs_args;
  auto* nngs_cmd = app.add_subcommand("nngs", "Similarity of two embedding files");
  nngs_cmd->add_option("x", nngs_args.x_path, "First embedding file (GloVe text or CSV)")->required();
  nngs_cmd->add_option("y", nngs_args.y_path, "Second embedding file")->required();
  nngs_cmd->add_option("--k", nngs_args.k, "Neighborhood size(s), comma list or a:b range");
  nngs_cmd->add_option("--c", nngs_args.c, "Relative neighborhood size(s) in (0, 1]");
  nngs_cmd->add_option("--metric", nngs_args.metric, "Metric for both sides")->capture_default_str();
  nngs_cmd->add_option("--metric-x", nngs_args.metric_x, "Metric for the first file");
  nngs_cmd->add_option("--metric-y", nngs_args.metric_y, "Metric for the second file");
  nngs_cmd->add_option("--align", nngs_args.align, "Pairing rule")
      ->check(CLI::IsMember({"strict", "intersect"}))
      ->capture_default_str();
  nngs_cmd->add_option("--input-format", nngs_args.input_format)
      ->check(CLI::IsMember({"auto", "glove", "csv"}))
      ->capture_default_str();
  nngs_cmd->add_option("--id-column", nngs_args.id_column)->capture_default_str();
  add_output_flags(nngs_cmd, nngs_args.output, "json");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Synthetic white-noise sweeps");
  sweep_cmd->add_option("kind", sweep_args.kind, "noise | size | dim | snr")
      ->required()
      ->check(CLI::IsMember({"noise", "size", "dim", "snr"}));
  sweep_cmd->add_option("--n", sweep_args.n, "Cloud size(s)");
  sweep_cmd->add_option("--d", sweep_args.d, "Dimensionality(ies)");
  sweep_cmd->add_option("--k", sweep_args.k, "Neighborhood size(s)");
  sweep_cmd->add_option("--c", sweep_args.c, "Relative neighborhood size (size sweep)");
  sweep_cmd->add_option("--snr", sweep_args.snr, "SNR value(s) in dB; 'inf' for no noise");
  sweep_cmd->add_option("--trials", sweep_args.trials)->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep_args.seed)->capture_default_str();
  sweep_cmd->add_option("--metric", sweep_args.metric)->capture_default_str();
  add_output_flags(sweep_cmd, sweep_args.output, "csv");

  BlobsArgs blobs_args;
  auto* blobs_cmd = app.add_subcommand("blobs", "CKA vs NNGS on aligned blob datasets");
  blobs_cmd->add_option("--preset", blobs_args.preset)
      ->check(CLI::IsMember({"scales", "unbalanced", "noise-within", "shuffled"}));
  blobs_cmd->add_option("--spec", blobs_args.spec_path, "JSON blob spec");
  blobs_cmd->add_option("--seed", blobs_args.seed)->capture_default_str();
  blobs_cmd->add_option("--trials", blobs_args.trials)->capture_default_str()->check(CLI::PositiveNumber);
  blobs_cmd->add_option("--report", blobs_args.report)
      ->check(CLI::IsMember({"nngs", "cka", "both"}))
      ->capture_default_str();
  blobs_cmd->add_option("--k", blobs_args.k)->capture_default_str();
  blobs_cmd->add_option("--sigma", blobs_args.sigma)->capture_default_str();
  blobs_cmd->add_option("--metric", blobs_args.metric)->capture_default_str();
  add_output_flags(blobs_cmd, blobs_args.output, "json");

  AnalogyArgs analogy_args;
  auto* analogy_cmd = app.add_subcommand("analogy", "Analogy accuracy vs similarity per category");
  analogy_cmd->add_option("--embeddings", analogy_args.embeddings, "GloVe text file")->required();
  analogy_cmd->add_option("--questions", analogy_args.questions, "questions-words file")->required();
  analogy_cmd->add_option("--c", analogy_args.c, "Relative neighborhood size")->capture_default_str();
  analogy_cmd->add_option("--k", analogy_args.k, "Fixed neighborhood size (overrides --c)");
  analogy_cmd->add_option("--metric", analogy_args.metric)->capture_default_str();
  analogy_cmd->add_flag("--with-cka", analogy_args.with_cka, "Also report linear CKA");
  analogy_cmd->add_flag("--keep-case", analogy_args.keep_case, "Do not lowercase question words");
  analogy_cmd->add_option("--vocab-limit", analogy_args.vocab_limit, "Load only the first N vectors (0: all)")
      ->capture_default_str();
  add_output_flags(analogy_cmd, analogy_args.output, "json");

  ZeroShotArgs zs_args;
  auto* zs_cmd = app.add_subcommand("zeroshot", "Zero-shot accuracy vs similarity per prompt template");
  zs_cmd->add_option("--image-embeddings", zs_args.images, "CSV id,label,x0..")->required();
  zs_cmd->add_option("--text-embeddings", zs_args.texts, "CSV per template (repeatable)")->required();
  zs_cmd->add_option("--template-column", zs_args.template_column, "Column naming the template of each row");
  zs_cmd->add_option("--id-column", zs_args.id_column)->capture_default_str();
  zs_cmd->add_option("--label-column", zs_args.label_column)->capture_default_str();
  zs_cmd->add_option("--k", zs_args.k)->capture_default_str();
  zs_cmd->add_option("--metric", zs_args.metric)->capture_default_str();
  zs_cmd->add_flag("--with-cka", zs_args.with_cka, "Also report linear CKA");
  zs_cmd->add_option("--class-means-out", zs_args.class_means_out, "Write the class-mean image cloud as CSV");
  add_output_flags(zs_cmd, zs_args.output, "json");

  BaselineArgs base_args;
  auto* base_cmd = app.add_subcommand("baseline", "Random-cloud baseline H(k)");
  base_cmd->add_option("--n", base_args.n);
  base_cmd->add_option("--k", base_args.k);
  base_cmd->add_option("--c", base_args.c);
  base_cmd->add_option("--format", base_args.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (threads > 0) parallel::set_max_threads(threads);
    if (*nngs_cmd) cmd_nngs(nngs_args, out, err);
    else if (*sweep_cmd) cmd_sweep(sweep_args, out, err);
    else if (*blobs_cmd) cmd_blobs(blobs_args, out, err);
    else if (*analogy_cmd) cmd_analogy(analogy_args, out, err);
    else if (*zs_cmd) cmd_zeroshot(zs_args, out, err);
    else if (*base_cmd) cmd_baseline(base_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace nngs::cli
