#ifndef KNOWRA_MODEL_HPP
#define KNOWRA_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "knowra/coref.hpp"
#include "knowra/corpus.hpp"
#include "knowra/docgraph.hpp"
#include "knowra/encoder.hpp"
#include "knowra/knowledge.hpp"
#include "knowra/objective.hpp"
#include "knowra/params.hpp"
#include "knowra/reasoner.hpp"

namespace knowra::model {

struct ModelConfig {
  encoder::EncoderConfig enc;
  std::string pretrained_dump;  // only for the "pretrained" backend
  std::size_t gat_layers = 2;
  double leaky_slope = 0.2;
  bool self_loops = true;
  std::size_t bilinear_group = 64;  // clamped to hidden size
  bool axial_scale = true;
  bool kra_full_backprop = true;
  // Component switches; the full model has all of them on.
  bool use_graph = true;
  bool use_coref = true;
  bool use_knowledge = true;
  bool use_filtration = true;
  bool use_axial = true;

  std::size_t effective_group() const {
    return bilinear_group < enc.hidden ? bilinear_group : enc.hidden;
  }
};

// Everything static about one document: tokenization, graphs, retrieved
// knowledge and coreference sets. Computed once, reused every epoch.
struct PreparedDocument {
  const corpus::Document* doc = nullptr;
  corpus::TokenizedDocument tdoc;
  docgraph::MHDG mhdg;
  knowledge::KMHDG kmhdg;
  std::vector<coref::CorefSet> csets;
  std::vector<int> kra_labels;
};

std::unique_ptr<PreparedDocument> prepare_document(const corpus::Document& doc,
                                                   const corpus::SubwordMapper& mapper,
                                                   std::size_t max_len, knowledge::KBClient* kb,
                                                   coref::CorefProvider* coref_provider,
                                                   Counters* counters);

struct ForwardResult {
  ad::Var loss_re;
  ad::Var loss_kra;
  ad::Var loss;
  objective::PairLogits logits;
  std::vector<double> taus;  // per knowledge edge, empty without knowledge
};

// The full pipeline: encoder, document graph, coreference, knowledge
// retrieval with confidence filtration, pair fusion, axial reasoning and
// the adaptive-threshold classifier.
class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed, const corpus::RelationVocab& vocab,
        std::size_t token_vocab_size, const std::vector<std::string>& kb_relation_ids);

  ForwardResult forward(ad::Graph& g, const PreparedDocument& pd, double lambda, bool training);

  std::vector<objective::Prediction> predict(const PreparedDocument& pd);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const ModelConfig& config() const { return cfg_; }
  const corpus::RelationVocab& vocab() const { return vocab_; }
  Counters& counters() { return counters_; }
  std::size_t token_vocab_size() const { return token_vocab_size_; }
  const std::vector<std::string>& kb_relation_ids() const { return rel_table_.ids(); }

 private:
  ModelConfig cfg_;
  corpus::RelationVocab vocab_;
  std::size_t token_vocab_size_;
  ParamStore params_;
  std::unique_ptr<encoder::Backend> backend_;
  knowledge::RelationEmbeddingTable rel_table_;
  Counters counters_;
};

}  // namespace knowra::model

#endif  // KNOWRA_MODEL_HPP
