#ifndef KNOWRA_CORPUS_HPP
#define KNOWRA_CORPUS_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "knowra/common.hpp"

namespace knowra::corpus {

// Half-open token interval within one sentence.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct Mention {
  std::size_t sent_id = 0;
  Span span;
  std::string surface;
};

struct Entity {
  std::string name;
  std::string type_tag;
  std::vector<Mention> mentions;
};

struct RelationFact {
  std::size_t head = 0;
  std::size_t tail = 0;
  std::string relation;
  std::vector<std::size_t> evidence;
};

struct Document {
  std::string doc_id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<Entity> entities;
  std::vector<RelationFact> facts;

  std::size_t num_mentions() const;
};

using Corpus = std::vector<Document>;

// Relation vocabulary: relation id -> ordinal class index. Index 0 is the
// learned threshold class, so ordinals start at 1 and must be dense.
class RelationVocab {
 public:
  static RelationVocab from_map(const std::map<std::string, std::size_t>& m);
  static RelationVocab load(const std::string& path);

  std::size_t size() const { return by_index_.size(); }   // relation types, excluding threshold
  std::size_t num_classes() const { return size() + 1; }  // including threshold class 0
  bool contains(const std::string& id) const { return by_id_.count(id) > 0; }
  std::size_t index_of(const std::string& id) const;
  const std::string& id_at(std::size_t index) const;  // index in [1, size()]

 private:
  std::map<std::string, std::size_t> by_id_;
  std::vector<std::string> by_index_;  // by_index_[k] holds class k+1
};

// Validates every Document invariant; throws ValidationError naming the
// offending document.
void validate_document(const Document& doc, const RelationVocab& vocab);

Corpus load_docred_json(const std::string& path, const RelationVocab& vocab);
Corpus parse_docred_json(const std::string& text, const RelationVocab& vocab);
std::string serialize_docred_json(const Corpus& corpus);
void save_docred_json(const Corpus& corpus, const std::string& path);

// Minimum sentence distance between any head mention and any tail mention.
std::size_t sentence_interval(const RelationFact& fact, const Document& doc);

// ---------------------------------------------------------------------
// Tokenization

// Maps one word to its subword id sequence (never empty).
using SubwordMapper = std::function<std::vector<int>(const std::string&)>;

constexpr int kClsTokenId = 0;
constexpr int kMarkerTokenId = 1;
constexpr int kUnkTokenId = 2;
constexpr int kFirstWordTokenId = 3;

struct TokenizedDocument {
  std::string doc_id;
  std::vector<int> tokens;  // [CLS] followed by sentence subwords with markers
  // (entity idx, mention idx) -> position of the marker token
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> marker_positions;
  // (entity idx, pronoun idx) -> subword span; filled after coref resolution
  std::map<std::pair<std::size_t, std::size_t>, Span> coref_positions;
  // (entity idx, mention idx) -> subword span of the mention body
  std::map<std::pair<std::size_t, std::size_t>, Span> mention_subword_spans;
  std::vector<std::vector<Span>> word_subword_spans;  // [sentence][word] -> subword span
  std::vector<Span> sentence_spans;  // partition of [1, tokens.size())
  std::size_t max_len = 0;

  std::size_t length() const { return tokens.size(); }
  bool needs_windowing() const { return tokens.size() > max_len; }
};

TokenizedDocument tokenize_with_markers(const Document& doc, const SubwordMapper& mapper,
                                        std::size_t max_len);

// Whole-word vocabulary for the trainable backend; deterministic id
// assignment by sorted surface form. Unknown words map to a shared id.
class Vocabulary {
 public:
  static Vocabulary build(const Corpus& corpus);
  static Vocabulary from_words(std::vector<std::string> words);
  std::size_t size() const { return kFirstWordTokenId + words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  SubwordMapper mapper() const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

// ---------------------------------------------------------------------
// Synthetic corpora

struct SyntheticSpec {
  std::size_t num_docs = 20;
  std::size_t entities_per_doc = 5;
  std::size_t num_relations = 4;
  double kb_only_fraction = 0.25;     // world facts with no textual signal
  double wrong_triple_fraction = 0.3; // planted-wrong share of KB triples
  double bridge_fraction = 0.25;      // world facts expressed via an intermediary
  double pronoun_prob = 0.3;
  std::size_t entity_pool = 16;
  std::size_t world_facts = 24;
  double textual_triple_prob = 0.5;  // chance a textual fact also gets a KB triple
};

struct SyntheticKbTriple {
  std::string qid_head;
  std::string relation;
  std::string qid_tail;
  bool gold_correct = false;
};

struct SyntheticCorpus {
  Corpus docs;
  std::map<std::string, std::vector<std::string>> qids;  // entity name -> qids
  std::vector<SyntheticKbTriple> triples;
  std::string kb_version;
  RelationVocab vocab;
};

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, const SyntheticSpec& spec);

// Serializes the companion snapshot (gold flags included for filtration tests).
std::string serialize_kb_snapshot(const SyntheticCorpus& synth);
void save_kb_snapshot(const SyntheticCorpus& synth, const std::string& path);
std::string serialize_relation_vocab(const RelationVocab& vocab);

}  // namespace knowra::corpus

#endif  // KNOWRA_CORPUS_HPP
