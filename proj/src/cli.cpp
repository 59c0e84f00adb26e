#include "cbr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbr/benchmark.hpp"
#include "cbr/designer.hpp"
#include "cbr/error.hpp"
#include "cbr/evaluation.hpp"
#include "cbr/explain.hpp"
#include "cbr/io.hpp"
#include "cbr/parallel.hpp"
#include "cbr/probability.hpp"
#include "cbr/random.hpp"

namespace cbr::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::size_t threads = 0;
  std::uint64_t seed = 0;
};

struct DesignArgs {
  std::string data, label, positive = "1", out = ".";
  std::vector<std::size_t> k_grid = designer::default_k_grid();
  std::size_t folds = 5;
  std::size_t pso_swarm = 20, pso_iters = 50;
  std::optional<std::uint64_t> pso_seed;
  bool no_balance = false;
};

struct ClassifyArgs {
  std::string model, data, label, positive = "1", out = "predictions.csv";
  bool leave_one_out = false;
};

struct ExplainArgs {
  std::string model, data, label, positive = "1", out = ".";
  std::size_t case_id = 0;
  std::size_t n_good = 1;
  std::size_t depth = 3, min_leaf = 5;
  std::vector<std::string> salient;
  bool leave_one_out = false;
};

struct BenchmarkArgs {
  std::vector<std::string> data;
  std::string label, positive = "1", out = "metrics.csv";
  std::size_t samples = 10, folds = 5;
  std::size_t pso_swarm = 20, pso_iters = 50;
  std::optional<std::uint64_t> pso_seed;
  std::vector<std::string> classifiers;
};

struct EvaluateArgs {
  std::string metrics, out = "performance_scores.csv";
  double alpha = 0.05;
};

struct TopsisArgs {
  std::string matrix, out = "ranking.json", weights = "equal";
  std::vector<std::string> cost;
};

/// Queries read against a stored model: columns matched by feature name,
/// min-max scaled with the model's raw ranges. Ids are ordinals of retained
/// rows, matching load_csv on the same file.
struct QuerySet {
  std::vector<Case> cases;
  bool has_labels = false;
};

QuerySet load_queries(const std::string& path, const CbrModel& model, const std::string& label,
                      const std::string& positive, std::ostream& err) {
  const auto records = csv_records(io::read_file(path));
  if (records.empty()) throw DataError("csv: missing header row");
  const auto& header = records.front();
  auto find = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    return header.size();
  };
  const auto& schema = model.case_base;
  std::vector<std::size_t> columns;
  for (const auto& name : schema.feature_names) {
    const auto c = find(name);
    if (c == header.size()) throw DataError("csv: feature column '" + name + "' not found");
    columns.push_back(c);
  }
  QuerySet out;
  std::size_t label_col = header.size();
  if (!label.empty()) {
    label_col = find(label);
    if (label_col == header.size()) throw DataError("csv: label column '" + label + "' not found");
    out.has_labels = true;
  }

  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      ++dropped;
      continue;
    }
    bool ok = true;
    for (std::size_t c = 0; c < rec.size() && ok; ++c) {
      if (c == label_col) continue;
      std::istringstream in(rec[c]);
      double v;
      ok = static_cast<bool>(in >> v) && (in >> std::ws).eof() && std::isfinite(v);
    }
    if (!ok || (out.has_labels && rec[label_col].empty())) {
      ++dropped;
      continue;
    }
    Case q;
    q.id = out.cases.size();
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const double raw = std::stod(rec[columns[j]]);
      const auto& range = schema.ranges[j];
      if (!schema.normalized) {
        q.features.push_back(raw);
      } else {
        q.features.push_back(range.width() > 0.0
                                 ? std::clamp((raw - range.min) / range.width(), 0.0, 1.0)
                                 : 0.0);
      }
    }
    if (out.has_labels) q.label = rec[label_col] == positive ? 1 : 0;
    out.cases.push_back(std::move(q));
  }
  if (dropped > 0) err << "dropped " << dropped << " rows with missing or unparseable values\n";
  if (out.cases.empty()) throw DataError("csv: every data row was dropped");
  return out;
}

Dataset load_training(const std::string& path, const std::string& label,
                      const std::string& positive, std::ostream& err) {
  auto loaded = load_csv(path, {label, positive});
  if (loaded.dropped_rows > 0) {
    err << "dropped " << loaded.dropped_rows << " rows with missing or unparseable values\n";
  }
  return std::move(loaded.dataset);
}

std::string number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

int cmd_design(const DesignArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  Dataset data = normalize(load_training(a.data, a.label, a.positive, err));
  if (!a.no_balance) data = undersample(data, derive_seed(c.seed, seed_stream::undersample));

  designer::Options opts;
  opts.k_grid = a.k_grid;
  opts.folds = a.folds;
  opts.seed = c.seed;
  opts.pso_seed = a.pso_seed;
  opts.pso_swarm = a.pso_swarm;
  opts.pso_iterations = a.pso_iters;
  opts.workers = 0;
  const auto report = designer::design(data, opts);
  for (const auto& s : report.per_scheme) {
    err << "scheme " << s.scheme << ": cv accuracy " << std::fixed << std::setprecision(4)
        << s.cv_accuracy << ", " << s.evaluations << " evaluations, " << std::setprecision(2)
        << s.seconds << " s\n";
  }
  err << std::defaultfloat;

  io::StoredModel stored{report.model, std::nullopt};
  stored.neighbor_weights = probability::fit_neighbor_weights(
      report.model, data, derive_seed(c.seed, seed_stream::probability));

  auto doc = io::to_json(report);
  doc["cases"] = data.size();
  doc["leave_one_out"] = true;
  doc["neighbor_weights"] = {{"p", stored.neighbor_weights->p},
                             {"regularizer_mass", stored.neighbor_weights->regularizer_mass()}};
  const fs::path dir(a.out);
  io::write_file(dir / "model.json", io::to_json(stored).dump(2) + "\n");
  io::write_file(dir / "design_report.json", doc.dump(2) + "\n");
  out << "k = " << report.chosen_k << ", winner = " << report.winner << "\n"
      << "wrote " << (dir / "model.json").string() << " and "
      << (dir / "design_report.json").string() << "\n";
  return kExitOk;
}

int cmd_classify(const ClassifyArgs& a, const Common&, std::ostream& out, std::ostream& err) {
  const auto stored = io::model_from_json(nlohmann::json::parse(io::read_file(a.model)));
  const auto queries = load_queries(a.data, stored.model, a.label, a.positive, err);
  auto results = batch_retrieve(stored.model, queries.cases, 0,
                                {.exclude_same_id = a.leave_one_out});
  std::ostringstream csv;
  csv << "id,predicted_label,vote_fraction,probability_default";
  if (queries.has_labels) csv << ",label";
  csv << '\n';
  std::size_t correct = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    if (stored.neighbor_weights) probability::attach_probability(r, *stored.neighbor_weights);
    csv << queries.cases[i].id << ',' << r.predicted_label << ',' << number(r.vote_fraction())
        << ',' << (r.probability_default ? number(*r.probability_default) : "");
    if (queries.has_labels) {
      csv << ',' << queries.cases[i].label;
      correct += r.predicted_label == queries.cases[i].label ? 1 : 0;
    }
    csv << '\n';
  }
  io::write_file(a.out, csv.str());
  out << "classified " << results.size() << " cases";
  if (queries.has_labels) {
    out << ", accuracy " << std::fixed << std::setprecision(4)
        << static_cast<double>(correct) / static_cast<double>(results.size()) << std::defaultfloat;
  }
  out << "\nwrote " << a.out << "\n";
  return kExitOk;
}

int cmd_explain(const ExplainArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const auto stored = io::model_from_json(nlohmann::json::parse(io::read_file(a.model)));
  const auto queries = load_queries(a.data, stored.model, a.label, a.positive, err);
  const auto it = std::find_if(queries.cases.begin(), queries.cases.end(),
                               [&](const Case& q) { return q.id == a.case_id; });
  if (it == queries.cases.end()) throw DataError("explain: no case with id " + std::to_string(a.case_id));

  explain::ReportOptions opts;
  opts.n_good = a.n_good;
  opts.tree = {a.depth, a.min_leaf};
  opts.seed = c.seed;
  opts.retrieval.exclude_same_id = a.leave_one_out;
  const auto& names = stored.model.case_base.feature_names;
  for (const auto& s : a.salient) {
    const auto pos = std::find(names.begin(), names.end(), s);
    if (pos == names.end()) throw DataError("explain: unknown feature '" + s + "'");
    opts.salient.push_back(static_cast<std::size_t>(pos - names.begin()));
  }
  const auto report = explain::build_report(stored.model, stored.neighbor_weights, *it, opts);
  const fs::path dir(a.out);
  io::write_file(dir / "explanation.json", explain::to_json(report).dump(2) + "\n");
  for (const auto& s : report.segmentation.scatter) {
    io::write_file(dir / ("scatter_" + s.x_name + "_" + s.y_name + ".csv"), explain::scatter_csv(s));
  }

  const auto& ce = report.case_explanation;
  out << "case " << ce.query_id << ": predicted " << ce.predicted_label;
  if (ce.probability_default) {
    out << ", probability of default " << explain::format_fixed2(100.0 * *ce.probability_default)
        << "%";
  }
  out << "\nwrote " << (dir / "explanation.json").string() << " and "
      << report.segmentation.scatter.size() << " scatter files\n";
  return kExitOk;
}

int cmd_benchmark(const BenchmarkArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  std::vector<benchmark::NamedDataset> datasets;
  for (const auto& path : a.data) {
    datasets.push_back({fs::path(path).stem().string(), load_training(path, a.label, a.positive, err)});
  }
  benchmark::BenchmarkOptions opts;
  if (!a.classifiers.empty()) {
    opts.kinds.clear();
    for (const auto& name : a.classifiers) opts.kinds.push_back(benchmark::kind_from_string(name));
  }
  opts.samples = a.samples;
  opts.folds = a.folds;
  opts.seed = c.seed;
  opts.design.pso_swarm = a.pso_swarm;
  opts.design.pso_iterations = a.pso_iters;
  opts.design.pso_seed = a.pso_seed;
  opts.design.workers = 0;
  opts.on_result = [&](const evaluation::SampleResult& r, double seconds) {
    err << r.dataset << " sample " << r.sample << " " << r.classifier << ": accuracy "
        << std::fixed << std::setprecision(4) << r.report.accuracy << " (" << std::setprecision(2)
        << seconds << " s)\n"
        << std::defaultfloat;
  };
  const auto rows = benchmark::run_benchmark(datasets, opts);
  io::write_file(a.out, io::metrics_csv(rows));
  out << "wrote " << rows.size() << " rows to " << a.out << "\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, const Common&, std::ostream& out, std::ostream&) {
  const auto rows = io::parse_metrics_csv(io::read_file(a.metrics));
  const auto scores = evaluation::performance_scores(rows, a.alpha);
  io::LabeledMatrix m;
  m.row_names = scores.classifiers;
  for (auto name : metrics::kMeasureNames) m.column_names.emplace_back(name);
  for (const auto& row : scores.scores) m.values.emplace_back(row.begin(), row.end());
  io::write_file(a.out, io::matrix_csv(m));

  out << std::left << std::setw(10) << "classifier";
  for (auto name : metrics::kMeasureNames) out << std::right << std::setw(12) << name;
  out << '\n';
  for (std::size_t i = 0; i < m.row_names.size(); ++i) {
    out << std::left << std::setw(10) << m.row_names[i];
    for (int v : scores.scores[i]) out << std::right << std::setw(12) << v;
    out << '\n';
  }
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

int cmd_topsis(const TopsisArgs& a, const Common&, std::ostream& out, std::ostream&) {
  const auto m = io::parse_matrix_csv(io::read_file(a.matrix));
  std::vector<bool> benefit(m.column_names.size(), true);
  for (const auto& name : a.cost) {
    const auto pos = std::find(m.column_names.begin(), m.column_names.end(), name);
    if (pos == m.column_names.end()) throw DataError("topsis: unknown criterion '" + name + "'");
    benefit[static_cast<std::size_t>(pos - m.column_names.begin())] = false;
  }
  std::vector<double> weights;
  if (a.weights == "entropy") weights = evaluation::entropy_weights(m.values);
  const auto r = evaluation::topsis(m.values, weights, benefit);

  nlohmann::json ranking = nlohmann::json::array();
  for (std::size_t pos = 0; pos < r.ranking.size(); ++pos) {
    const auto i = r.ranking[pos];
    ranking.push_back({{"alternative", m.row_names[i]}, {"rank", pos + 1},
                       {"relative_closeness", r.relative[i]}, {"d_plus", r.d_plus[i]},
                       {"d_minus", r.d_minus[i]}});
  }
  nlohmann::json doc = {{"criteria", m.column_names}, {"weights", r.weights},
                        {"benefit", benefit}, {"skipped_columns", r.skipped_columns},
                        {"ranking", ranking}};
  io::write_file(a.out, doc.dump(2) + "\n");

  out << std::left << std::setw(12) << "alternative" << std::right << std::setw(10) << "R+"
      << std::setw(6) << "rank" << '\n';
  for (std::size_t pos = 0; pos < r.ranking.size(); ++pos) {
    const auto i = r.ranking[pos];
    out << std::left << std::setw(12) << m.row_names[i] << std::right << std::fixed
        << std::setprecision(4) << std::setw(10) << r.relative[i] << std::setw(6) << pos + 1
        << '\n'
        << std::defaultfloat;
  }
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explainable case-based reasoning for binary risk classification"};
  app.require_subcommand(1);
  Common common;
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker threads (default: CBR_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", common.seed, "Root random seed")->capture_default_str();

  auto add_data_flags = [](CLI::App* sub, std::string& label, std::string& positive) {
    sub->add_option("--label", label, "Label column name");
    sub->add_option("--positive", positive, "Label token of class 1 (default or bad risk)")
        ->capture_default_str();
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "Root random seed")->capture_default_str();
  };

  DesignArgs design;
  auto* s_design = app.add_subcommand("design", "Fit a similarity model; writes model.json and design_report.json");
  s_design->add_option("--data", design.data, "Training CSV")->required()->check(CLI::ExistingFile);
  add_data_flags(s_design, design.label, design.positive);
  s_design->get_option("--label")->required();
  s_design->add_option("--out", design.out, "Output directory")->capture_default_str();
  s_design->add_option("--k-grid", design.k_grid, "Odd k candidates")->delimiter(',')->capture_default_str();
  s_design->add_option("--folds", design.folds, "Cross-validation folds")->check(CLI::Range(2, 100))->capture_default_str();
  s_design->add_option("--pso-swarm", design.pso_swarm, "Particles")->check(CLI::PositiveNumber)->capture_default_str();
  s_design->add_option("--pso-iters", design.pso_iters, "PSO iterations")->check(CLI::PositiveNumber)->capture_default_str();
  s_design->add_option("--pso-seed", design.pso_seed, "PSO seed (default: --seed)");
  s_design->add_flag("--no-balance", design.no_balance, "Skip majority-class under-sampling");
  add_common(s_design);

  ClassifyArgs classify;
  auto* s_classify = app.add_subcommand("classify", "Classify CSV rows; writes a predictions CSV");
  s_classify->add_option("--model", classify.model, "model.json")->required()->check(CLI::ExistingFile);
  s_classify->add_option("--data", classify.data, "Query CSV")->required()->check(CLI::ExistingFile);
  add_data_flags(s_classify, classify.label, classify.positive);
  s_classify->add_option("--out", classify.out, "Predictions CSV")->capture_default_str();
  s_classify->add_flag("--leave-one-out", classify.leave_one_out,
                       "Skip a stored case whose id equals the query row ordinal");
  add_common(s_classify);

  ExplainArgs explain_args;
  auto* s_explain = app.add_subcommand("explain", "Explain one case; writes explanation.json and scatter CSVs");
  s_explain->add_option("--model", explain_args.model, "model.json")->required()->check(CLI::ExistingFile);
  s_explain->add_option("--data", explain_args.data, "CSV holding the query case")->required()->check(CLI::ExistingFile);
  add_data_flags(s_explain, explain_args.label, explain_args.positive);
  s_explain->add_option("--case", explain_args.case_id, "Row ordinal of the query case")->required();
  s_explain->add_option("--out", explain_args.out, "Output directory")->capture_default_str();
  s_explain->add_option("--n-good", explain_args.n_good, "Extra label-0 cases to list")->capture_default_str();
  s_explain->add_option("--depth", explain_args.depth, "CID tree depth")->capture_default_str();
  s_explain->add_option("--min-leaf", explain_args.min_leaf, "CID tree minimum leaf size")->check(CLI::PositiveNumber)->capture_default_str();
  s_explain->add_option("--salient", explain_args.salient, "Segmentation features (default: top CID features)")->delimiter(',');
  s_explain->add_flag("--leave-one-out", explain_args.leave_one_out,
                      "Skip a stored case whose id equals the query row ordinal");
  add_common(s_explain);

  BenchmarkArgs bench;
  auto* s_bench = app.add_subcommand("benchmark", "Run all classifiers over balanced samples; writes a metrics CSV");
  s_bench->add_option("--data", bench.data, "Dataset CSV (repeatable)")->required()->check(CLI::ExistingFile);
  add_data_flags(s_bench, bench.label, bench.positive);
  s_bench->get_option("--label")->required();
  s_bench->add_option("--out", bench.out, "Metrics CSV")->capture_default_str();
  s_bench->add_option("--samples", bench.samples, "Balanced samples per dataset")->check(CLI::PositiveNumber)->capture_default_str();
  s_bench->add_option("--folds", bench.folds, "Cross-validation folds")->check(CLI::Range(2, 100))->capture_default_str();
  s_bench->add_option("--classifiers", bench.classifiers, "Subset of lr,knn,dt,gnb,mlp,lasso,cbr_ew,cbr_e")->delimiter(',');
  s_bench->add_option("--pso-swarm", bench.pso_swarm, "Particles")->check(CLI::PositiveNumber)->capture_default_str();
  s_bench->add_option("--pso-iters", bench.pso_iters, "PSO iterations")->check(CLI::PositiveNumber)->capture_default_str();
  s_bench->add_option("--pso-seed", bench.pso_seed, "PSO seed (default: --seed)");
  add_common(s_bench);

  EvaluateArgs evaluate;
  auto* s_eval = app.add_subcommand("evaluate", "Paired t-test performance scores from a metrics CSV");
  s_eval->add_option("--metrics", evaluate.metrics, "Metrics CSV")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--alpha", evaluate.alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  s_eval->add_option("--out", evaluate.out, "Score matrix CSV")->capture_default_str();
  add_common(s_eval);

  TopsisArgs topsis;
  auto* s_topsis = app.add_subcommand("topsis", "Rank alternatives of a score matrix CSV");
  s_topsis->add_option("--matrix", topsis.matrix, "Alternatives x criteria CSV")->required()->check(CLI::ExistingFile);
  s_topsis->add_option("--weights", topsis.weights, "equal or entropy")
      ->check(CLI::IsMember({"equal", "entropy"}))->capture_default_str();
  s_topsis->add_option("--cost", topsis.cost, "Criteria where lower is better")->delimiter(',');
  s_topsis->add_option("--out", topsis.out, "Ranking JSON")->capture_default_str();
  add_common(s_topsis);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (threads) set_default_workers(*threads);
  try {
    if (s_design->parsed()) return cmd_design(design, common, out, err);
    if (s_classify->parsed()) return cmd_classify(classify, common, out, err);
    if (s_explain->parsed()) return cmd_explain(explain_args, common, out, err);
    if (s_bench->parsed()) return cmd_benchmark(bench, common, out, err);
    if (s_eval->parsed()) return cmd_evaluate(evaluate, common, out, err);
    if (s_topsis->parsed()) return cmd_topsis(topsis, common, out, err);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cbr::cli
