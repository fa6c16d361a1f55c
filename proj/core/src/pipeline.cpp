#include "tsc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>

#include "tsc/checksum.hpp"
#include "tsc/error.hpp"
#include "tsc/plot.hpp"
#include "tsc/rng.hpp"
#include "tsc/text.hpp"

namespace tsc {

namespace {

constexpr std::string_view kLabelsHeader = "ticker,volatility,return,cluster";
constexpr std::string_view kFeaturesHeader = "ticker,volatility,return";
constexpr std::string_view kEvaluationHeader =
    "ticker,volatility,return,raw_output,predicted,kmeans,missed";
constexpr std::string_view kLossHeader = "epoch,loss";
constexpr std::string_view kSweepHeader = "k,silhouette";

std::string num(double v) { return text::general(v, 17); }

double field_double(std::string_view f, const std::string& where) {
  const auto v = text::parse_double(f);
  if (!v) throw Error(ErrorKind::FormatError, where + ": bad number '" + std::string(f) + "'");
  return *v;
}

long long field_int(std::string_view f, const std::string& where) {
  const auto v = text::parse_int(f);
  if (!v) throw Error(ErrorKind::FormatError, where + ": bad integer '" + std::string(f) + "'");
  return *v;
}

// Data rows of a CSV document whose first line must equal one of `headers`.
// Returns the index of the matched header.
std::size_t csv_rows(std::string_view csv, std::initializer_list<std::string_view> headers,
                     std::vector<std::vector<std::string_view>>& rows) {
  const auto all = text::lines(csv);
  if (all.empty()) throw Error(ErrorKind::FormatError, "empty CSV document");
  const auto head = text::trim(all.front());
  const auto match = std::find(headers.begin(), headers.end(), head);
  if (match == headers.end()) {
    throw Error(ErrorKind::FormatError, "unexpected CSV header '" + std::string(head) + "'");
  }
  const auto width = text::split(*match, ',').size();
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (text::trim(all[i]).empty()) continue;
    auto fields = text::split(all[i], ',');
    if (fields.size() != width) {
      throw Error(ErrorKind::FormatError, "line " + std::to_string(i + 1) + ": expected " +
                                              std::to_string(width) + " fields");
    }
    for (auto& f : fields) f = text::trim(f);
    rows.push_back(std::move(fields));
  }
  return static_cast<std::size_t>(match - headers.begin());
}

template <typename F>
auto in_stage(std::string_view stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), e.what());
  }
}

}  // namespace

// ---- labelled records --------------------------------------------------------

std::string format_labels_csv(std::span<const LabeledRecord> records) {
  std::string out(kLabelsHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.ticker + ',' + num(r.volatility) + ',' + num(r.ret) + ',' + std::to_string(r.cluster) + '\n';
  }
  return out;
}

std::vector<LabeledRecord> parse_labels_csv(std::string_view csv, bool require_cluster) {
  std::vector<std::vector<std::string_view>> rows;
  const auto which = require_cluster ? csv_rows(csv, {kLabelsHeader}, rows)
                                     : csv_rows(csv, {kLabelsHeader, kFeaturesHeader}, rows);
  std::vector<LabeledRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto where = "row " + std::to_string(i + 1);
    const auto& f = rows[i];
    if (f[0].empty()) throw Error(ErrorKind::FormatError, where + ": empty ticker");
    LabeledRecord r{std::string(f[0]), field_double(f[1], where), field_double(f[2], where), -1};
    if (which == 0) {
      const auto c = field_int(f[3], where);
      if (c < 0) throw Error(ErrorKind::FormatError, where + ": negative cluster");
      r.cluster = static_cast<int>(c);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Matrix feature_matrix(std::span<const LabeledRecord> records) {
  Matrix m(records.size(), 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    m(i, 0) = records[i].volatility;
    m(i, 1) = records[i].ret;
  }
  return m;
}

Matrix target_matrix(std::span<const LabeledRecord> records) {
  Matrix m(records.size(), 1);
  for (std::size_t i = 0; i < records.size(); ++i) m(i, 0) = records[i].cluster;
  return m;
}

// ---- Stage I -----------------------------------------------------------------

Stage1Result stage1_label(std::span<const FeatureVector> features, const Stage1Options& options) {
  const std::size_t n = features.size();
  if (n == 0) throw Error(ErrorKind::NoData, "no feature vectors to cluster");
  if (options.k_min > options.k_max) {
    throw Error(ErrorKind::Precondition, "k_min must not exceed k_max");
  }
  Matrix points(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    points(i, 0) = features[i].volatility;
    points(i, 1) = features[i].ret;
  }

  Stage1Result out;
  const int k_max = static_cast<int>(std::min<long long>(options.k_max, static_cast<long long>(n) - 1));
  if (options.k_min >= 2 && options.k_min <= k_max) {
    out.sweep = select_k(points, options.k_min, k_max, options.seed, options.restarts);
  }
  int k = 0;
  if (options.k) {
    k = *options.k;
  } else if (out.sweep) {
    k = out.sweep->best_k;
  } else {
    throw Error(ErrorKind::Precondition,
                "automatic k needs 2 <= k_min <= min(k_max, n-1); n=" + std::to_string(n));
  }

  KMeansOptions km;
  km.k = k;
  km.seed = options.seed;
  km.restarts = options.restarts;
  out.model = kmeans_fit(points, km);
  if (options.canonical_labels) out.model = canonicalize_labels(out.model, 1);

  out.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.records.push_back({features[i].ticker, features[i].volatility, features[i].ret,
                           out.model.assignments[i]});
  }
  return out;
}

Stage1Result stage1_label(const PriceTable& table, const Stage1Options& options) {
  auto features = build_feature_table(table, options.trading_days);
  auto out = stage1_label(std::span<const FeatureVector>(features.vectors), options);
  out.warnings.insert(out.warnings.begin(), features.warnings.begin(), features.warnings.end());
  return out;
}

// ---- split -------------------------------------------------------------------

std::size_t test_size(std::size_t n, double test_fraction) {
  if (n < 2) throw Error(ErrorKind::EmptyDataset, "splitting needs at least 2 records");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::Precondition, "test fraction must lie in (0, 1)");
  }
  // The epsilon absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
  const auto raw = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(raw, 1, n - 1);
}

SplitResult split(std::span<const LabeledRecord> records, const SplitSpec& spec) {
  const std::size_t n = records.size();
  const std::size_t n_test = test_size(n, spec.test_fraction);
  Rng rng(spec.seed);

  std::vector<std::size_t> test_idx, train_idx;
  if (!spec.stratify) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    test_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  } else {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[records[i].cluster].push_back(i);
    // Largest-remainder allocation of the test quota across classes.
    struct Share {
      int cls;
      std::size_t base;
      double frac;
    };
    std::vector<Share> shares;
    std::size_t assigned = 0;
    for (const auto& [cls, members] : by_class) {
      const double exact = static_cast<double>(n_test) * static_cast<double>(members.size()) /
                           static_cast<double>(n);
      const auto base = static_cast<std::size_t>(std::floor(exact));
      shares.push_back({cls, base, exact - static_cast<double>(base)});
      assigned += base;
    }
    std::vector<std::size_t> rank(shares.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return shares[a].frac > shares[b].frac; });
    for (std::size_t r = 0; assigned < n_test && r < rank.size(); ++r, ++assigned) {
      ++shares[rank[r]].base;
    }
    for (const auto& s : shares) {
      auto members = by_class[s.cls];
      rng.shuffle(std::span(members));
      const auto take = std::min(s.base, members.size());
      test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
      train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
    }
    rng.shuffle(std::span(test_idx));
    rng.shuffle(std::span(train_idx));
  }

  SplitResult out;
  out.test.reserve(test_idx.size());
  out.train.reserve(train_idx.size());
  for (auto i : test_idx) out.test.push_back(records[i]);
  for (auto i : train_idx) out.train.push_back(records[i]);
  return out;
}

// ---- Stage II ----------------------------------------------------------------

Stage2Result stage2_train(std::span<const LabeledRecord> train_set, const Stage2Options& options) {
  if (train_set.empty()) throw Error(ErrorKind::EmptyDataset, "empty training set");
  Stage2Result out;
  out.net = build_autoencoder(options.shape, options.train.seed);
  out.history = train(out.net, feature_matrix(train_set), target_matrix(train_set), options.train);
  return out;
}

bool ClusterBounds::contains(double volatility, double ret) const noexcept {
  return volatility >= min_volatility && volatility <= max_volatility && ret >= min_return &&
         ret <= max_return;
}

double accuracy(std::span<const int> predicted, std::span<const int> reference) {
  if (predicted.size() != reference.size()) {
    throw Error(ErrorKind::ShapeMismatch, "predicted and reference label counts differ");
  }
  if (predicted.empty()) throw Error(ErrorKind::EmptyDataset, "accuracy of zero predictions");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == reference[i];
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

std::vector<ClusterBounds> cluster_bounds(std::span<const LabeledRecord> records) {
  std::map<int, ClusterBounds> by;
  for (const auto& r : records) {
    auto [it, fresh] = by.try_emplace(r.cluster);
    auto& b = it->second;
    if (fresh) {
      b = {r.cluster, 0, r.volatility, r.volatility, r.ret, r.ret};
    }
    ++b.count;
    b.min_volatility = std::min(b.min_volatility, r.volatility);
    b.max_volatility = std::max(b.max_volatility, r.volatility);
    b.min_return = std::min(b.min_return, r.ret);
    b.max_return = std::max(b.max_return, r.ret);
  }
  std::vector<ClusterBounds> out;
  for (auto& [_, b] : by) out.push_back(b);
  return out;
}

EvaluationReport make_report(std::span<const LabeledRecord> test_set,
                             std::span<const double> raw_outputs, int num_clusters,
                             std::span<const LabeledRecord> reference) {
  if (test_set.empty()) throw Error(ErrorKind::EmptyDataset, "empty test set");
  if (raw_outputs.size() != test_set.size()) {
    throw Error(ErrorKind::ShapeMismatch, "one raw output per test record required");
  }
  EvaluationReport report;
  report.bounds = cluster_bounds(reference.empty() ? test_set : reference);
  std::vector<int> predicted, truth;
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const auto& r = test_set[i];
    EvaluationRow row{r.ticker, r.volatility, r.ret, raw_outputs[i],
                      label_from_output(raw_outputs[i], num_clusters), r.cluster};
    predicted.push_back(row.predicted);
    truth.push_back(row.kmeans);
    report.rows.push_back(std::move(row));
  }
  report.total = report.rows.size();
  report.accuracy = accuracy(predicted, truth);
  for (const auto& row : report.rows) {
    if (!row.missed()) {
      ++report.correct;
      continue;
    }
    Disagreement d{row, false, false};
    for (const auto& b : report.bounds) {
      if (b.cluster == row.predicted) d.inside_predicted_bounds = b.contains(row.volatility, row.ret);
      if (b.cluster == row.kmeans) d.inside_kmeans_bounds = b.contains(row.volatility, row.ret);
    }
    report.disagreements.push_back(std::move(d));
  }
  return report;
}

EvaluationReport evaluate(const DenseNetwork& net, std::span<const LabeledRecord> test_set,
                          int num_clusters, std::span<const LabeledRecord> reference) {
  if (test_set.empty()) throw Error(ErrorKind::EmptyDataset, "empty test set");
  const Matrix raw = predict(net, feature_matrix(test_set));
  if (raw.cols() != 1) throw Error(ErrorKind::ShapeMismatch, "network must have one output");
  return make_report(test_set, raw.data(), num_clusters, reference);
}

// ---- artifact formats ----------------------------------------------------------

std::string format_evaluation_csv(const EvaluationReport& report) {
  std::string out(kEvaluationHeader);
  out += '\n';
  for (const auto& r : report.rows) {
    out += r.ticker + ',' + num(r.volatility) + ',' + num(r.ret) + ',' + num(r.raw_output) + ',' +
           std::to_string(r.predicted) + ',' + std::to_string(r.kmeans) + ',' +
           (r.missed() ? "X" : "") + '\n';
  }
  return out;
}

std::vector<EvaluationRow> parse_evaluation_csv(std::string_view csv) {
  std::vector<std::vector<std::string_view>> rows;
  csv_rows(csv, {kEvaluationHeader}, rows);
  std::vector<EvaluationRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto where = "row " + std::to_string(i + 1);
    const auto& f = rows[i];
    EvaluationRow r{std::string(f[0]), field_double(f[1], where), field_double(f[2], where),
                    field_double(f[3], where), static_cast<int>(field_int(f[4], where)),
                    static_cast<int>(field_int(f[5], where))};
    if (r.missed() != (f[6] == "X")) {
      throw Error(ErrorKind::FormatError, where + ": missed flag disagrees with labels");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_disagreements(const EvaluationReport& report) {
  std::string out = "accuracy=" + text::shortest(report.accuracy) + " (" +
                    std::to_string(report.correct) + "/" + std::to_string(report.total) + ")\n";
  out += "cluster bounds (volatility, return):\n";
  for (const auto& b : report.bounds) {
    out += "  cluster " + std::to_string(b.cluster) + " n=" + std::to_string(b.count) +
           " volatility [" + text::general(b.min_volatility, 6) + ", " +
           text::general(b.max_volatility, 6) + "] return [" + text::general(b.min_return, 6) +
           ", " + text::general(b.max_return, 6) + "]\n";
  }
  out += "disagreements: " + std::to_string(report.disagreements.size()) + "\n";
  for (const auto& d : report.disagreements) {
    out += "  " + d.row.ticker + " volatility=" + text::general(d.row.volatility, 6) +
           " return=" + text::general(d.row.ret, 6) + " raw=" + text::general(d.row.raw_output, 8) +
           " predicted=" + std::to_string(d.row.predicted) +
           " kmeans=" + std::to_string(d.row.kmeans) +
           (d.inside_predicted_bounds ? " inside-predicted-bounds" : " outside-predicted-bounds") +
           "\n";
  }
  return out;
}

std::string format_loss_csv(const TrainHistory& history) {
  std::string out(kLossHeader);
  out += '\n';
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    out += std::to_string(i + 1) + ',' + num(history.loss[i]) + '\n';
  }
  return out;
}

TrainHistory parse_loss_csv(std::string_view csv) {
  std::vector<std::vector<std::string_view>> rows;
  csv_rows(csv, {kLossHeader}, rows);
  TrainHistory h;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto where = "row " + std::to_string(i + 1);
    if (field_int(rows[i][0], where) != static_cast<long long>(i + 1)) {
      throw Error(ErrorKind::FormatError, where + ": epochs must count up from 1");
    }
    h.loss.push_back(field_double(rows[i][1], where));
  }
  return h;
}

std::string format_k_sweep_csv(const SelectKResult& sweep) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& s : sweep.scores) out += std::to_string(s.k) + ',' + num(s.silhouette) + '\n';
  return out;
}

std::vector<KScore> parse_k_sweep_csv(std::string_view csv) {
  std::vector<std::vector<std::string_view>> rows;
  csv_rows(csv, {kSweepHeader}, rows);
  std::vector<KScore> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto where = "row " + std::to_string(i + 1);
    out.push_back({static_cast<int>(field_int(rows[i][0], where)), field_double(rows[i][1], where)});
  }
  return out;
}

// ---- config ------------------------------------------------------------------

PipelineConfig parse_config(std::string_view doc) {
  PipelineConfig c;
  std::set<std::string, std::less<>> seen;
  bool have_prices = false;
  const auto rows = text::lines(doc);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto line = rows[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(i + 1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::FormatError, where + ": expected key = value");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) {
      throw Error(ErrorKind::FormatError, where + ": duplicate key '" + std::string(key) + "'");
    }
    auto integer = [&](long long lo) {
      const auto v = field_int(value, where);
      if (v < lo) throw Error(ErrorKind::FormatError, where + ": " + std::string(key) + " must be >= " + std::to_string(lo));
      return v;
    };
    auto boolean = [&] {
      if (value == "true" || value == "1" || value == "yes") return true;
      if (value == "false" || value == "0" || value == "no") return false;
      throw Error(ErrorKind::FormatError, where + ": expected true/false");
    };

    if (key == "prices_path") {
      c.prices_path = std::string(value);
      have_prices = !value.empty();
    } else if (key == "tickers_path") {
      if (!value.empty()) c.tickers_path = std::string(value);
    } else if (key == "start_date") {
      if (!value.empty()) c.start_date = Date::parse(value);
    } else if (key == "k") {
      if (value == "auto") {
        c.k.reset();
      } else {
        c.k = static_cast<int>(integer(2));
      }
    } else if (key == "k_min") {
      c.k_min = static_cast<int>(integer(2));
    } else if (key == "k_max") {
      c.k_max = static_cast<int>(integer(2));
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(integer(0));
    } else if (key == "restarts") {
      c.restarts = static_cast<int>(integer(1));
    } else if (key == "epochs") {
      c.epochs = static_cast<int>(integer(1));
    } else if (key == "batch_size") {
      c.batch_size = static_cast<std::size_t>(integer(1));
    } else if (key == "test_fraction") {
      c.test_fraction = field_double(value, where);
      if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
        throw Error(ErrorKind::FormatError, where + ": test_fraction must lie in (0, 1)");
      }
    } else if (key == "trading_days") {
      c.trading_days = field_double(value, where);
      if (!(c.trading_days > 0.0)) throw Error(ErrorKind::FormatError, where + ": trading_days must be > 0");
    } else if (key == "out_dir") {
      c.out_dir = std::string(value);
    } else if (key == "canonical_labels") {
      c.canonical_labels = boolean();
    } else if (key == "stratify") {
      c.stratify = boolean();
    } else {
      throw Error(ErrorKind::FormatError, where + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_prices) throw Error(ErrorKind::FormatError, "config requires prices_path");
  if (c.k_min > c.k_max) throw Error(ErrorKind::FormatError, "k_min must not exceed k_max");
  return c;
}

std::string format_config(const PipelineConfig& c) {
  std::string out;
  out += "prices_path = " + c.prices_path + "\n";
  if (c.tickers_path) out += "tickers_path = " + *c.tickers_path + "\n";
  if (c.start_date) out += "start_date = " + c.start_date->to_string() + "\n";
  out += "k = " + (c.k ? std::to_string(*c.k) : std::string("auto")) + "\n";
  out += "k_min = " + std::to_string(c.k_min) + "\n";
  out += "k_max = " + std::to_string(c.k_max) + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += "restarts = " + std::to_string(c.restarts) + "\n";
  out += "epochs = " + std::to_string(c.epochs) + "\n";
  out += "batch_size = " + std::to_string(c.batch_size) + "\n";
  out += "test_fraction = " + text::shortest(c.test_fraction) + "\n";
  out += "trading_days = " + text::shortest(c.trading_days) + "\n";
  out += "out_dir = " + c.out_dir + "\n";
  out += std::string("canonical_labels = ") + (c.canonical_labels ? "true" : "false") + "\n";
  out += std::string("stratify = ") + (c.stratify ? "true" : "false") + "\n";
  return out;
}

// ---- end-to-end ----------------------------------------------------------------

std::string format_manifest(std::span<const ArtifactEntry> entries) {
  std::string out;
  for (const auto& e : entries) out += e.sha256 + "  " + e.name + "\n";
  return out;
}

namespace {

plot::ScatterChart evaluation_scatter(const std::vector<EvaluationRow>& rows, bool by_prediction,
                                      std::string title) {
  plot::ScatterChart chart{std::move(title), "Volatility", "Return", {}};
  for (const auto& r : rows) {
    chart.points.push_back({r.volatility, r.ret, by_prediction ? r.predicted : r.kmeans, r.missed(),
                            r.ticker});
  }
  return chart;
}

// Tracks files written by one run so a failure can take them back.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  ArtifactSet(const ArtifactSet&) = delete;
  ArtifactSet& operator=(const ArtifactSet&) = delete;
  ~ArtifactSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
  }

  void write(std::string_view name, const std::string& contents, bool listed = true) {
    const auto path = dir_ / name;
    text::write_file_atomic(path.string(), contents);
    written_.push_back(path);
    if (listed) entries_.push_back({std::string(name), sha256_hex(contents)});
  }

  [[nodiscard]] const std::vector<ArtifactEntry>& entries() const { return entries_; }
  void commit() { committed_ = true; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  std::vector<ArtifactEntry> entries_;
  bool committed_ = false;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;

  const auto table = in_stage("ingest", [&] {
    LoadOptions load;
    if (config.tickers_path) load.tickers = parse_ticker_list(text::read_file(*config.tickers_path));
    load.start_date = config.start_date;
    auto loaded = load_price_table(config.prices_path, load);
    result.warnings = loaded.warnings;
    return std::move(loaded.table);
  });

  result.stage1 = in_stage("stage1", [&] {
    Stage1Options s1;
    s1.k = config.k;
    s1.k_min = config.k_min;
    s1.k_max = config.k_max;
    s1.seed = config.seed;
    s1.restarts = config.restarts;
    s1.trading_days = config.trading_days;
    s1.canonical_labels = config.canonical_labels;
    if (s1.k && *s1.k < 2) throw Error(ErrorKind::BadK, "the pipeline needs k >= 2");
    return stage1_label(table, s1);
  });
  result.warnings.insert(result.warnings.end(), result.stage1.warnings.begin(),
                         result.stage1.warnings.end());
  const int k = result.stage1.model.k;

  result.split = in_stage("split", [&] {
    return split(result.stage1.records, SplitSpec{config.test_fraction, config.seed, config.stratify});
  });

  result.stage2 = in_stage("stage2", [&] {
    Stage2Options s2;
    s2.shape.latent_width = static_cast<std::size_t>(k);
    s2.train.epochs = config.epochs;
    s2.train.batch_size = config.batch_size;
    s2.train.seed = config.seed;
    return stage2_train(result.split.train, s2);
  });

  result.report = in_stage("evaluate", [&] {
    return evaluate(result.stage2.net, result.split.test, k, result.stage1.records);
  });

  in_stage("artifacts", [&] {
    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    ArtifactSet artifacts(dir);
    artifacts.write(kLabelsFile, format_labels_csv(result.stage1.records));
    artifacts.write(kSweepFile,
                    format_k_sweep_csv(result.stage1.sweep.value_or(SelectKResult{})));
    artifacts.write(kModelFile, format_model(result.stage2.net));
    artifacts.write(kLossFile, format_loss_csv(result.stage2.history));
    artifacts.write(kEvaluationFile, format_evaluation_csv(result.report));
    artifacts.write(kScatterFile,
                    plot::scatter_panels({evaluation_scatter(result.report.rows, false, "KMeans Clustering"),
                                          evaluation_scatter(result.report.rows, true, "Autoencoder Clustering")}));
    artifacts.write(kManifestFile, format_manifest(artifacts.entries()), false);
    result.manifest = artifacts.entries();
    artifacts.commit();
  });
  return result;
}

}  // namespace tsc
