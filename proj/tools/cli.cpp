#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "tsc/autonet.hpp"
#include "tsc/error.hpp"
#include "tsc/features.hpp"
#include "tsc/ingest.hpp"
#include "tsc/kmeans.hpp"
#include "tsc/pipeline.hpp"
#include "tsc/plot.hpp"
#include "tsc/text.hpp"

namespace tsc::cli {

namespace {

namespace fs = std::filesystem;

// Writes outputs of one command; removes them again unless committed.
class Outputs {
 public:
  Outputs() = default;
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;
  ~Outputs() {
    if (done_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }
  void write(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    text::write_file_atomic(path.string(), contents);
    written_.push_back(path);
  }
  void commit() { done_ = true; }

 private:
  std::vector<fs::path> written_;
  bool done_ = false;
};

std::string k_validator(const std::string& value, int min_k, bool allow_auto) {
  if (allow_auto && value == "auto") return {};
  const auto k = text::parse_int(value);
  if (!k || *k < min_k) {
    return "--k must be " + std::string(allow_auto ? "'auto' or " : "") + "an integer >= " +
           std::to_string(min_k);
  }
  return {};
}

std::optional<int> parse_k(const std::string& value) {
  if (value == "auto") return std::nullopt;
  return static_cast<int>(*text::parse_int(value));
}

void print_warnings(const std::vector<Warning>& warnings, std::ostream& err) {
  for (const auto& w : warnings) {
    err << "warning: " << (w.ticker.empty() ? "" : w.ticker + ": ") << w.reason << "\n";
  }
}

struct SourceFlags {
  std::string prices;
  std::string tickers;
  std::string start_date;
  double trading_days = kTradingDaysPerYear;
};

void add_source_flags(CLI::App* cmd, SourceFlags& f, bool prices_required) {
  auto* p = cmd->add_option("--prices", f.prices, "Prices CSV (ticker,date,adj_close)");
  if (prices_required) p->required();
  cmd->add_option("--tickers", f.tickers, "Ticker list file (one per line or comma-separated)");
  cmd->add_option("--start-date", f.start_date, "Ignore prices dated before YYYY-MM-DD")
      ->check([](const std::string& v) {
        return Date::try_parse(v) ? std::string{} : std::string("expected YYYY-MM-DD");
      });
  cmd->add_option("--trading-days", f.trading_days, "Trading days per year for annualization")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

LoadResult load_source(const SourceFlags& f) {
  LoadOptions opts;
  if (!f.tickers.empty()) opts.tickers = parse_ticker_list(text::read_file(f.tickers));
  if (!f.start_date.empty()) opts.start_date = Date::parse(f.start_date);
  return load_price_table(f.prices, opts);
}

int num_clusters_for(const std::vector<LabeledRecord>& records, const std::string& k_flag) {
  if (!k_flag.empty()) return *parse_k(k_flag);
  int top = 1;
  for (const auto& r : records) top = std::max(top, r.cluster);
  return std::max(2, top + 1);
}

struct Flags {
  SourceFlags source;
  std::string k;
  int k_min = 2;
  int k_max = 10;
  std::uint64_t seed = 7;
  int restarts = 10;
  int epochs = 1000;
  std::size_t batch = 1024;
  double test_frac = 0.33;
  std::string out;
  std::string out_dir;
  std::string model;
  std::string labels;
  std::string config;
  bool canonical_labels = false;
  bool stratify = false;
};

// ---- commands --------------------------------------------------------------

int cmd_label(const Flags& f, std::ostream& out, std::ostream& err) {
  auto loaded = load_source(f.source);
  print_warnings(loaded.warnings, err);
  Stage1Options opts;
  opts.k = parse_k(f.k);
  opts.k_min = f.k_min;
  opts.k_max = f.k_max;
  opts.seed = f.seed;
  opts.restarts = f.restarts;
  opts.trading_days = f.source.trading_days;
  opts.canonical_labels = f.canonical_labels;
  const auto result = stage1_label(loaded.table, opts);
  print_warnings(result.warnings, err);

  Outputs outputs;
  outputs.write(f.out, format_labels_csv(result.records));
  outputs.commit();
  out << "k=" << result.model.k << "\n";
  out << "silhouette="
      << (result.model.silhouette ? text::shortest(*result.model.silhouette) : std::string("n/a"))
      << "\n";
  out << "records=" << result.records.size() << "\n";
  return kExitOk;
}

int cmd_select_k(const Flags& f, std::ostream& out, std::ostream& err) {
  auto loaded = load_source(f.source);
  print_warnings(loaded.warnings, err);
  const auto features = build_feature_table(loaded.table, f.source.trading_days);
  print_warnings(features.warnings, err);
  Matrix points(features.vectors.size(), 2);
  for (std::size_t i = 0; i < features.vectors.size(); ++i) {
    points(i, 0) = features.vectors[i].volatility;
    points(i, 1) = features.vectors[i].ret;
  }
  const auto sweep = select_k(points, f.k_min, f.k_max, f.seed, f.restarts);
  Outputs outputs;
  outputs.write(f.out, format_k_sweep_csv(sweep));
  outputs.commit();
  for (const auto& s : sweep.scores) {
    out << "k=" << s.k << " silhouette=" << text::shortest(s.silhouette) << "\n";
  }
  out << "k=" << sweep.best_k << "\n";
  return kExitOk;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream&) {
  const auto records = parse_labels_csv(text::read_file(f.labels));
  Stage2Options opts;
  opts.shape.latent_width = static_cast<std::size_t>(num_clusters_for(records, f.k));
  opts.train.epochs = f.epochs;
  opts.train.batch_size = f.batch;
  opts.train.seed = f.seed;
  const auto trained = stage2_train(records, opts);

  Outputs outputs;
  outputs.write(f.model, format_model(trained.net));
  outputs.write(f.out, format_loss_csv(trained.history));
  outputs.commit();
  out << "parameters=" << count_parameters(trained.net) << "\n";
  out << "epochs=" << trained.history.loss.size() << "\n";
  out << "final_loss=" << text::shortest(trained.history.loss.back()) << "\n";
  return kExitOk;
}

int default_clusters(const DenseNetwork& net) {
  // The bottleneck (sigmoid) width is the cluster count the model was built for.
  for (const auto& layer : net.layers) {
    if (layer.spec.activation == Activation::Sigmoid) {
      return std::max(2, static_cast<int>(layer.spec.output_width));
    }
  }
  throw Error(ErrorKind::Precondition, "model has no latent layer; pass --k");
}

int cmd_predict(const Flags& f, std::ostream& out, std::ostream&) {
  const auto net = load_model(f.model);
  const auto records = parse_labels_csv(text::read_file(f.labels), false);
  if (records.empty()) throw Error(ErrorKind::EmptyDataset, "no rows to predict");
  const int c = f.k.empty() ? default_clusters(net) : *parse_k(f.k);
  const Matrix raw = predict(net, feature_matrix(records));
  const auto labels = labels_from_outputs(raw, c);

  std::string csv = "ticker,volatility,return,raw_output,predicted\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    csv += records[i].ticker + ',' + text::general(records[i].volatility) + ',' +
           text::general(records[i].ret) + ',' + text::general(raw(i, 0)) + ',' +
           std::to_string(labels[i]) + '\n';
  }
  Outputs outputs;
  outputs.write(f.out, csv);
  outputs.commit();
  out << "predicted=" << records.size() << "\n";
  return kExitOk;
}

int cmd_evaluate(const Flags& f, std::ostream& out, std::ostream&) {
  const auto net = load_model(f.model);
  const auto test = parse_labels_csv(text::read_file(f.labels));
  const int c = f.k.empty() ? default_clusters(net) : *parse_k(f.k);
  const auto report = evaluate(net, test, c);
  Outputs outputs;
  outputs.write(f.out, format_evaluation_csv(report));
  outputs.commit();
  out << "accuracy=" << text::shortest(report.accuracy) << "\n";
  out << "correct=" << report.correct << "/" << report.total << "\n";
  out << format_disagreements(report);
  return kExitOk;
}

int cmd_run(const Flags& f, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  PipelineConfig c;
  if (!f.config.empty()) c = parse_config(text::read_file(f.config));
  const auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--prices")) c.prices_path = f.source.prices;
  if (given("--tickers")) c.tickers_path = f.source.tickers;
  if (given("--start-date")) c.start_date = Date::parse(f.source.start_date);
  if (given("--trading-days")) c.trading_days = f.source.trading_days;
  if (given("--k")) c.k = parse_k(f.k);
  if (given("--k-min")) c.k_min = f.k_min;
  if (given("--k-max")) c.k_max = f.k_max;
  if (given("--seed") || std::getenv("TSC_SEED")) c.seed = f.seed;
  if (given("--epochs")) c.epochs = f.epochs;
  if (given("--batch")) c.batch_size = f.batch;
  if (given("--test-frac")) c.test_fraction = f.test_frac;
  if (given("--out-dir")) c.out_dir = f.out_dir;
  if (given("--canonical-labels")) c.canonical_labels = true;
  if (given("--stratify")) c.stratify = true;
  if (c.prices_path.empty()) {
    err << "run: a prices file is required (--prices or prices_path in --config)\n";
    return kExitUsage;
  }

  const auto result = run_pipeline(c);
  print_warnings(result.warnings, err);
  out << "k=" << result.stage1.model.k << "\n";
  if (result.stage1.model.silhouette) {
    out << "silhouette=" << text::shortest(*result.stage1.model.silhouette) << "\n";
  }
  out << "train=" << result.split.train.size() << " test=" << result.split.test.size() << "\n";
  out << "parameters=" << count_parameters(result.stage2.net) << "\n";
  out << "final_loss=" << text::shortest(result.stage2.history.loss.back()) << "\n";
  out << format_disagreements(result.report);
  out << "manifest:\n" << format_manifest(result.manifest);
  return kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out, std::ostream&) {
  const fs::path src(f.out_dir);
  const fs::path dst = f.out.empty() ? src : fs::path(f.out);
  const auto need = [&](std::string_view name) {
    const auto p = src / name;
    if (!fs::exists(p)) throw Error(ErrorKind::Io, "missing artifact '" + p.string() + "'");
    return text::read_file(p.string());
  };
  const auto sweep = parse_k_sweep_csv(need(kSweepFile));
  const auto history = parse_loss_csv(need(kLossFile));
  const auto rows = parse_evaluation_csv(need(kEvaluationFile));

  plot::LineChart sil{"Optimal number of clusters", "Number of clusters k", "Silhouette", {}, true};
  std::string sil_csv = "k,silhouette\n";
  for (const auto& s : sweep) {
    sil.points.emplace_back(s.k, s.silhouette);
    sil_csv += std::to_string(s.k) + ',' + text::general(s.silhouette) + '\n';
  }
  plot::LineChart loss{"Loss vs. epochs", "Epoch", "MSE loss", {}, false};
  std::string loss_csv = "epoch,loss\n";
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    loss.points.emplace_back(static_cast<double>(i + 1), history.loss[i]);
    loss_csv += std::to_string(i + 1) + ',' + text::general(history.loss[i]) + '\n';
  }
  plot::ScatterChart km{"KMeans Clustering", "Volatility", "Return", {}};
  plot::ScatterChart ae{"Autoencoder Clustering", "Volatility", "Return", {}};
  std::string km_csv = "ticker,volatility,return,cluster,missed\n";
  std::string ae_csv = km_csv;
  for (const auto& r : rows) {
    km.points.push_back({r.volatility, r.ret, r.kmeans, r.missed(), r.ticker});
    ae.points.push_back({r.volatility, r.ret, r.predicted, r.missed(), r.ticker});
    const auto base = r.ticker + ',' + text::general(r.volatility) + ',' + text::general(r.ret) + ',';
    const std::string miss = r.missed() ? "X" : "";
    km_csv += base + std::to_string(r.kmeans) + ',' + miss + '\n';
    ae_csv += base + std::to_string(r.predicted) + ',' + miss + '\n';
  }

  Outputs outputs;
  outputs.write(dst / "silhouette.svg", plot::line_chart(sil));
  outputs.write(dst / "silhouette.csv", sil_csv);
  outputs.write(dst / "loss.svg", plot::line_chart(loss));
  outputs.write(dst / "loss_curve.csv", loss_csv);
  outputs.write(dst / "scatter_kmeans.svg", plot::scatter_chart(km));
  outputs.write(dst / "scatter_kmeans.csv", km_csv);
  outputs.write(dst / "scatter_autoencoder.svg", plot::scatter_chart(ae));
  outputs.write(dst / "scatter_autoencoder.csv", ae_csv);
  outputs.commit();
  out << "wrote 4 charts to " << dst.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage time-series clustering: KMeans labelling and autoencoder prediction",
               "tsc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  Flags f;
  auto seed_opt = [&](CLI::App* cmd) {
    cmd->add_option("--seed", f.seed, "Random seed (env TSC_SEED)")
        ->envname("TSC_SEED")
        ->capture_default_str();
  };
  auto k_range = [&](CLI::App* cmd) {
    cmd->add_option("--k-min", f.k_min, "Smallest k in the silhouette sweep")
        ->capture_default_str()
        ->check(CLI::Range(2, 1000));
    cmd->add_option("--k-max", f.k_max, "Largest k in the silhouette sweep")
        ->capture_default_str()
        ->check(CLI::Range(2, 1000));
    cmd->add_option("--restarts", f.restarts, "KMeans restarts per fit")
        ->capture_default_str()
        ->check(CLI::Range(1, 100000));
  };
  auto train_opts = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", f.epochs, "Training epochs")->capture_default_str()->check(CLI::Range(1, 10000000));
    cmd->add_option("--batch", f.batch, "Mini-batch size")->capture_default_str()->check(CLI::Range(1, 100000000));
  };

  auto* label = app.add_subcommand("label", "Stage I: features, KMeans, labels CSV");
  add_source_flags(label, f.source, true);
  label->add_option("--k", f.k, "Cluster count or 'auto'")
      ->default_str("4")
      ->check([](const std::string& v) { return k_validator(v, 1, true); });
  k_range(label);
  seed_opt(label);
  label->add_flag("--canonical-labels", f.canonical_labels,
                  "Renumber clusters by descending mean return");
  label->add_option("--out", f.out, "Labels CSV to write")->default_str("labels.csv");

  auto* selk = app.add_subcommand("select-k", "Silhouette sweep over k");
  add_source_flags(selk, f.source, true);
  k_range(selk);
  seed_opt(selk);
  selk->add_option("--out", f.out, "k,silhouette CSV to write")->default_str("k_sweep.csv");

  auto* trn = app.add_subcommand("train", "Stage II: train the autoencoder on a labels CSV");
  trn->add_option("--labels", f.labels, "Training labels CSV")->required();
  trn->add_option("--k", f.k, "Cluster count (latent width); default from labels")
      ->check([](const std::string& v) { return k_validator(v, 2, false); });
  train_opts(trn);
  seed_opt(trn);
  trn->add_option("--model", f.model, "Model file to write")->default_str("model.tscnet");
  trn->add_option("--out", f.out, "Loss CSV to write")->default_str("loss.csv");

  auto* pred = app.add_subcommand("predict", "Predict cluster labels with a trained model");
  pred->add_option("--model", f.model, "Model file")->required();
  pred->add_option("--labels", f.labels, "Features or labels CSV")->required();
  pred->add_option("--k", f.k, "Cluster count; default is the model's latent width")
      ->check([](const std::string& v) { return k_validator(v, 2, false); });
  pred->add_option("--out", f.out, "Predictions CSV to write")->default_str("predictions.csv");

  auto* eval = app.add_subcommand("evaluate", "Compare predictions against KMeans labels");
  eval->add_option("--model", f.model, "Model file")->required();
  eval->add_option("--labels", f.labels, "Test labels CSV")->required();
  eval->add_option("--k", f.k, "Cluster count; default is the model's latent width")
      ->check([](const std::string& v) { return k_validator(v, 2, false); });
  eval->add_option("--out", f.out, "Evaluation CSV to write")->default_str("evaluation.csv");

  auto* run_cmd = app.add_subcommand("run", "Full pipeline from a config file and/or flags");
  run_cmd->add_option("--config", f.config, "key = value pipeline config")->check(CLI::ExistingFile);
  add_source_flags(run_cmd, f.source, false);
  run_cmd->add_option("--k", f.k, "Cluster count (>= 2) or 'auto'")
      ->check([](const std::string& v) { return k_validator(v, 2, true); });
  k_range(run_cmd);
  seed_opt(run_cmd);
  train_opts(run_cmd);
  run_cmd->add_option("--test-frac", f.test_frac, "Fraction held out for testing")
      ->check(CLI::Range(0.0, 1.0))
      ->check([](const std::string& v) {
        const auto x = text::parse_double(v);
        return x && *x > 0.0 && *x < 1.0 ? std::string{} : std::string("must lie in (0, 1)");
      });
  run_cmd->add_option("--out-dir", f.out_dir, "Artifact directory");
  run_cmd->add_flag("--canonical-labels", f.canonical_labels,
                    "Renumber clusters by descending mean return");
  run_cmd->add_flag("--stratify", f.stratify, "Stratify the train/test split by cluster");

  auto* rep = app.add_subcommand("report", "SVG charts from a run's artifacts");
  rep->add_option("--out-dir", f.out_dir, "Directory holding the run artifacts")->required();
  rep->add_option("--out", f.out, "Directory for charts (default: --out-dir)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err), kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err), kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    // Subcommands share flag storage, so file defaults are applied here.
    const auto fallback = [](std::string& v, const char* d) {
      if (v.empty()) v = d;
    };
    if (*label) {
      fallback(f.out, "labels.csv");
      fallback(f.k, "4");
      return cmd_label(f, out, err);
    }
    if (*selk) return fallback(f.out, "k_sweep.csv"), cmd_select_k(f, out, err);
    if (*trn) {
      fallback(f.model, "model.tscnet");
      fallback(f.out, "loss.csv");
      return cmd_train(f, out, err);
    }
    if (*pred) return fallback(f.out, "predictions.csv"), cmd_predict(f, out, err);
    if (*eval) return fallback(f.out, "evaluation.csv"), cmd_evaluate(f, out, err);
    if (*run_cmd) return cmd_run(f, *run_cmd, out, err);
    if (*rep) return cmd_report(f, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tsc::cli
