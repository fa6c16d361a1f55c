#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/autonet.hpp"
#include "tsc/features.hpp"
#include "tsc/ingest.hpp"
#include "tsc/kmeans.hpp"

namespace tsc {

/// Stage I output row: `ticker,volatility,return,cluster`.
struct LabeledRecord {
  std::string ticker;
  double volatility = 0.0;
  double ret = 0.0;
  int cluster = 0;

  friend bool operator==(const LabeledRecord&, const LabeledRecord&) = default;
};

[[nodiscard]] std::string format_labels_csv(std::span<const LabeledRecord> records);

/// Reads `ticker,volatility,return[,cluster]`. Without a cluster column,
/// `require_cluster` must be false and clusters are set to -1.
[[nodiscard]] std::vector<LabeledRecord> parse_labels_csv(std::string_view csv,
                                                          bool require_cluster = true);

[[nodiscard]] Matrix feature_matrix(std::span<const LabeledRecord> records);
[[nodiscard]] Matrix target_matrix(std::span<const LabeledRecord> records);

// ---- Stage I -------------------------------------------------------------

struct Stage1Options {
  std::optional<int> k = 4;  // nullopt selects k by silhouette over [k_min, k_max]
  int k_min = 2;
  int k_max = 10;
  std::uint64_t seed = 7;
  int restarts = 10;
  double trading_days = kTradingDaysPerYear;
  bool canonical_labels = false;
};

struct Stage1Result {
  std::vector<LabeledRecord> records;  // ticker order
  KMeansModel model;
  std::optional<SelectKResult> sweep;  // empty when too few points for a sweep
  std::vector<Warning> warnings;
};

/// Clusters precomputed feature vectors. The silhouette sweep is always run
/// when the data allow it (it feeds the k-vs-silhouette artifact); when k is
/// fixed it does not influence the chosen k. k_max is capped at n - 1.
[[nodiscard]] Stage1Result stage1_label(std::span<const FeatureVector> features,
                                        const Stage1Options& options);
[[nodiscard]] Stage1Result stage1_label(const PriceTable& table, const Stage1Options& options);

// ---- Split ---------------------------------------------------------------

struct SplitSpec {
  double test_fraction = 0.33;
  std::uint64_t seed = 7;
  bool stratify = false;
};

struct SplitResult {
  std::vector<LabeledRecord> train;
  std::vector<LabeledRecord> test;
};

/// Test size is ceil(test_fraction * n), clamped so both sides are non-empty.
[[nodiscard]] std::size_t test_size(std::size_t n, double test_fraction);

/// Seeded shuffle partition; each side keeps its records in shuffled order.
[[nodiscard]] SplitResult split(std::span<const LabeledRecord> records, const SplitSpec& spec);

// ---- Stage II ------------------------------------------------------------

struct Stage2Options {
  AutoencoderShape shape;  // latent_width is normally the cluster count
  TrainOptions train;
};

struct Stage2Result {
  DenseNetwork net;
  TrainHistory history;
};

[[nodiscard]] Stage2Result stage2_train(std::span<const LabeledRecord> train_set,
                                        const Stage2Options& options);

struct EvaluationRow {
  std::string ticker;
  double volatility = 0.0;
  double ret = 0.0;
  double raw_output = 0.0;
  int predicted = 0;
  int kmeans = 0;
  [[nodiscard]] bool missed() const noexcept { return predicted != kmeans; }
};

struct ClusterBounds {
  int cluster = 0;
  std::size_t count = 0;
  double min_volatility = 0.0, max_volatility = 0.0;
  double min_return = 0.0, max_return = 0.0;

  [[nodiscard]] bool contains(double volatility, double ret) const noexcept;
};

struct Disagreement {
  EvaluationRow row;
  // True when the point lies inside the feature bounding box of the
  // network's predicted cluster, i.e. on the border between clusters.
  bool inside_predicted_bounds = false;
  bool inside_kmeans_bounds = false;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  std::vector<Disagreement> disagreements;
  std::vector<ClusterBounds> bounds;  // by cluster id, from the reference records
};

/// correct / total over paired labels. Throws EmptyDataset / ShapeMismatch.
[[nodiscard]] double accuracy(std::span<const int> predicted, std::span<const int> reference);

[[nodiscard]] std::vector<ClusterBounds> cluster_bounds(std::span<const LabeledRecord> records);

/// Builds the report from raw network outputs (one per test record).
[[nodiscard]] EvaluationReport make_report(std::span<const LabeledRecord> test_set,
                                           std::span<const double> raw_outputs, int num_clusters,
                                           std::span<const LabeledRecord> reference);

/// Runs the network on `test_set`. Cluster bounds come from `reference`
/// (all Stage I records), or from the test set when `reference` is empty.
[[nodiscard]] EvaluationReport evaluate(const DenseNetwork& net,
                                        std::span<const LabeledRecord> test_set, int num_clusters,
                                        std::span<const LabeledRecord> reference = {});

// ---- Artifact formats ----------------------------------------------------

/// `ticker,volatility,return,raw_output,predicted,kmeans,missed`
[[nodiscard]] std::string format_evaluation_csv(const EvaluationReport& report);
[[nodiscard]] std::vector<EvaluationRow> parse_evaluation_csv(std::string_view csv);

/// Human-readable disagreement analysis with per-cluster bounds.
[[nodiscard]] std::string format_disagreements(const EvaluationReport& report);

/// `epoch,loss`, epochs numbered from 1.
[[nodiscard]] std::string format_loss_csv(const TrainHistory& history);
[[nodiscard]] TrainHistory parse_loss_csv(std::string_view csv);

/// `k,silhouette`
[[nodiscard]] std::string format_k_sweep_csv(const SelectKResult& sweep);
[[nodiscard]] std::vector<KScore> parse_k_sweep_csv(std::string_view csv);

// ---- End-to-end ----------------------------------------------------------

struct PipelineConfig {
  std::string prices_path;
  std::optional<std::string> tickers_path;
  std::optional<Date> start_date;
  std::optional<int> k = 4;  // nullopt = "auto"
  int k_min = 2;
  int k_max = 10;
  std::uint64_t seed = 7;
  int restarts = 10;
  int epochs = 1000;
  std::size_t batch_size = 1024;
  double test_fraction = 0.33;
  double trading_days = kTradingDaysPerYear;
  std::string out_dir = "out";
  bool canonical_labels = false;
  bool stratify = false;
};

/// `key = value` lines; '#' starts a comment. Unknown keys are rejected.
[[nodiscard]] PipelineConfig parse_config(std::string_view text);
[[nodiscard]] std::string format_config(const PipelineConfig& config);

/// Failure inside run_pipeline, tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct ArtifactEntry {
  std::string name;  // file name relative to out_dir
  std::string sha256;
};

struct PipelineResult {
  std::vector<ArtifactEntry> manifest;
  Stage1Result stage1;
  SplitResult split;
  Stage2Result stage2;
  EvaluationReport report;
  std::vector<Warning> warnings;
};

inline constexpr std::string_view kLabelsFile = "labels.csv";
inline constexpr std::string_view kModelFile = "model.tscnet";
inline constexpr std::string_view kSweepFile = "k_sweep.csv";
inline constexpr std::string_view kLossFile = "loss.csv";
inline constexpr std::string_view kEvaluationFile = "evaluation.csv";
inline constexpr std::string_view kScatterFile = "scatter.svg";
inline constexpr std::string_view kManifestFile = "manifest.txt";

/// Stage I then Stage II, writing artifacts and `manifest.txt` into out_dir.
/// On failure, artifacts already written by this run are removed and a
/// StageError is thrown.
PipelineResult run_pipeline(const PipelineConfig& config);

/// `<sha256>  <name>` per line (sha256sum -c compatible inside out_dir).
[[nodiscard]] std::string format_manifest(std::span<const ArtifactEntry> entries);

}  // namespace tsc
