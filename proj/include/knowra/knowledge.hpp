#ifndef KNOWRA_KNOWLEDGE_HPP
#define KNOWRA_KNOWLEDGE_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "knowra/ad.hpp"
#include "knowra/coref.hpp"
#include "knowra/corpus.hpp"
#include "knowra/docgraph.hpp"
#include "knowra/params.hpp"

namespace knowra::knowledge {

// External knowledge access. Lookups are deterministic per snapshot
// version and results are cached by the live implementation.
class KBClient {
 public:
  virtual ~KBClient() = default;
  virtual std::vector<std::string> lookup_qids(const std::string& name) = 0;
  virtual std::vector<std::string> lookup_relations(const std::string& qid_head,
                                                    const std::string& qid_tail) = 0;
  virtual std::string version() const = 0;
  // Every relation id that can appear on a knowledge edge (sorted). Used to
  // size the relation embedding table.
  virtual std::vector<std::string> known_relation_ids() const = 0;
};

// Immutable in-memory snapshot loaded from JSON:
//   { "qids": {name: [qid,...]}, "triples": [[qid_h, rel, qid_t],...],
//     "version": string, "gold_flags": [bool,...] (optional, synthetic) }
class SnapshotKB : public KBClient {
 public:
  static SnapshotKB load(const std::string& path);
  static SnapshotKB from_json_text(const std::string& text);
  SnapshotKB() = default;

  std::vector<std::string> lookup_qids(const std::string& name) override;
  std::vector<std::string> lookup_relations(const std::string& qid_head,
                                            const std::string& qid_tail) override;
  std::string version() const override { return version_; }
  std::vector<std::string> known_relation_ids() const override;

  // Gold flag for a triple, when the snapshot carries them.
  std::optional<bool> gold_flag(const std::string& qid_head, const std::string& rel,
                                const std::string& qid_tail) const;

  void add_qids(const std::string& name, const std::vector<std::string>& qids);
  void add_triple(const std::string& qid_head, const std::string& rel,
                  const std::string& qid_tail);
  std::string to_json_text() const;
  void save(const std::string& path) const;

 private:
  std::string version_ = "empty";
  std::map<std::string, std::vector<std::string>> qids_;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> relations_;
  std::map<std::tuple<std::string, std::string, std::string>, bool> gold_flags_;
};

struct LiveKBConfig {
  std::string endpoint;       // e.g. http://host:port
  int timeout_ms = 5000;
  int max_retries = 3;
  int backoff_ms = 100;       // doubled per retry
  std::string cache_path;     // write-through snapshot cache, optional
};

// HTTP-backed client with retry, exponential backoff and a write-through
// snapshot cache. After retries are exhausted a lookup degrades to an empty
// result and bumps the failure counter.
class LiveKB : public KBClient {
 public:
  LiveKB(LiveKBConfig cfg, Counters* counters);
  ~LiveKB() override;

  std::vector<std::string> lookup_qids(const std::string& name) override;
  std::vector<std::string> lookup_relations(const std::string& qid_head,
                                            const std::string& qid_tail) override;
  std::string version() const override;
  std::vector<std::string> known_relation_ids() const override;

 private:
  std::optional<std::string> fetch(const std::string& path);

  LiveKBConfig cfg_;
  Counters* counters_;
  SnapshotKB cache_;
  std::map<std::string, bool> qid_cached_;
  std::map<std::pair<std::string, std::string>, bool> rel_cached_;
};

// One retrieved relation edge between two document entities.
struct KnowledgeEdge {
  std::size_t head = 0;  // entity indices
  std::size_t tail = 0;
  std::string relation;
  std::string qid_head;
  std::string qid_tail;
  std::string source;       // KB version string
  double confidence = 0.0;  // raw score tau, filled after scoring
  std::optional<bool> gold_flag;
};

// Document graph extended with knowledge edges.
struct KMHDG {
  const docgraph::MHDG* base = nullptr;
  std::vector<KnowledgeEdge> knowledge_edges;
};

// For every ordered entity pair and every qid pair, adds each retrieved
// relation once. Deduplicates on (head, tail, relation).
KMHDG augment_graph(const docgraph::MHDG& mhdg, const corpus::Document& doc, KBClient& kb);

// Embedding table for external relation ids, one learned d-vector each.
class RelationEmbeddingTable {
 public:
  RelationEmbeddingTable() = default;
  // Registers one parameter per relation id under "know/rel/<id>".
  RelationEmbeddingTable(const std::vector<std::string>& relation_ids, ParamStore& params,
                         Rng& rng, std::size_t dim);

  ad::Var bind(ad::Graph& g, const std::string& relation_id, bool trainable,
               ParamStore& params) const;
  bool contains(const std::string& relation_id) const;
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

// Entity embedding: elementwise log of (mean exp of mention vectors ++ mean
// exp of pronoun vectors), projected back to d. With no pronouns the
// mention half is duplicated.
ad::Var entity_embedding(const std::vector<ad::Var>& mention_vecs,
                         const std::vector<ad::Var>& pronoun_vecs, ad::Var proj);

// Trilinear confidence score of one knowledge edge.
ad::Var confidence_score(ad::Var h_head, ad::Var h_tail, ad::Var relation_vec);

// Accept-weighted fusion of knowledge neighbors into one entity:
//   sum over edges of sigma(tau) * (h_tail ∘ r). `accept_all` replaces the
// sigmoid weights with 1 (filtration ablated). Entities without edges keep
// their own embedding.
struct ScoredEdge {
  std::size_t tail_entity;
  ad::Var relation_vec;
  ad::Var tau;
};
ad::Var knowledge_fuse_entity(ad::Var h_self, const std::vector<ScoredEdge>& edges,
                              const std::vector<ad::Var>& entity_embeddings, bool accept_all);

// Binary cross-entropy over edge confidences, exactly as stated: mean of
// y*log(sigma(tau)) + (1-y)*log(sigma(1-tau)), negated. Empty input is 0.
ad::Var filtration_loss(ad::Graph& g, const std::vector<ad::Var>& taus,
                        const std::vector<int>& labels);

// y=1 iff the edge triple matches an annotated fact of the document.
std::vector<int> filtration_labels(const KMHDG& kg, const corpus::Document& doc);

std::unique_ptr<KBClient> make_kb_client(const std::string& snapshot_path);

}  // namespace knowra::knowledge

#endif  // KNOWRA_KNOWLEDGE_HPP
