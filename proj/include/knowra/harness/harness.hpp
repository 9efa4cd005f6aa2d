#ifndef KNOWRA_HARNESS_HARNESS_HPP
#define KNOWRA_HARNESS_HARNESS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "knowra/harness/metrics.hpp"
#include "knowra/model.hpp"

namespace knowra::harness {

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 100;
  double lr = 3e-3;
  std::size_t batch_size = 4;
  double lambda = 0.2;
  double warmup_fraction = 0.06;
  double clip_norm = 1.0;
  std::size_t eval_every = 1;

  std::string train_path;
  std::string dev_path;  // may equal train_path
  std::string kb_path;
  std::string vocab_path;
  std::string coref_provider = "rule";  // "rule" | "fixture" | "none"
  std::string coref_fixture;
  std::string checkpoint_path = "checkpoint.json";
  std::string log_path;

  model::ModelConfig model;

  void validate() const;
  std::string to_json_text() const;
  static TrainConfig from_json_text(const std::string& text);
  static TrainConfig load(const std::string& path);  // file + KNOWRA_* env overrides
  // Applies KNOWRA_<FIELD> environment overrides (nested fields use
  // KNOWRA_ENCODER_* / KNOWRA_MODEL_*).
  void apply_env_overrides(const std::function<const char*(const char*)>& getenv_fn);
  std::string config_hash() const;
};

// In-memory corpora and KB shared by train/eval/sweep.
struct Workbench {
  corpus::RelationVocab vocab;
  corpus::Corpus train_docs;
  corpus::Corpus dev_docs;
  std::unique_ptr<knowledge::KBClient> kb;
  corpus::Vocabulary token_vocab;
  std::unique_ptr<coref::CorefProvider> coref_provider;

  static Workbench load(const TrainConfig& cfg);
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<MetricsReport> dev;
};

struct TrainResult {
  std::vector<EpochLog> log;
  MetricsReport best_dev;
  std::size_t best_epoch = 0;
  bool aborted_nan = false;
  std::shared_ptr<model::Model> trained;  // holds best parameters
  FactSet best_predictions;
};

// End-to-end joint optimization. Deterministic for a fixed seed with the
// trainable backend. On divergence (non-finite loss) training stops and the
// best checkpoint so far is kept.
TrainResult train(const TrainConfig& cfg, Workbench& bench);

FactSet gold_facts(const corpus::Corpus& corpus);
FactSet predictions_for(model::Model& m, const corpus::Corpus& docs, Workbench& bench,
                        std::vector<double>* scores = nullptr);
// Deterministic JSONL dump: {doc_id, h, t, r, score}.
std::string prediction_dump(model::Model& m, const corpus::Corpus& docs, Workbench& bench);

// ---------------------------------------------------------------------
// Checkpoints: single JSON file of named tensors, config and vocabulary,
// version-stamped.
void save_checkpoint(const std::string& path, const model::Model& m, const TrainConfig& cfg,
                     const corpus::Corpus& train_docs);
struct LoadedCheckpoint {
  TrainConfig cfg;
  std::shared_ptr<model::Model> model;
  std::unique_ptr<Workbench> bench;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------
// Sweeps

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  MetricsReport dev;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;
  std::string to_csv() const;
};

// axis is "lambda" or "context_length"; one full train/eval per value and
// seed.
SweepResult sweep(const TrainConfig& cfg, const std::string& axis,
                  const std::vector<double>& values, const std::vector<std::uint64_t>& seeds);

// ---------------------------------------------------------------------
// Graph inspection

// K-MHDG export with per-knowledge-edge confidence and accept flag; label
// edges come from dataset annotations.
std::string inspect_graph(model::Model& m, Workbench& bench, const std::string& doc_id);

// Structural export without scores (no trained model needed).
std::string build_graph_json(const corpus::Corpus& docs, knowledge::KBClient& kb,
                             const corpus::RelationVocab& vocab);

}  // namespace knowra::harness

#endif  // KNOWRA_HARNESS_HARNESS_HPP
