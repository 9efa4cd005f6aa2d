#ifndef KNOWRA_COREF_HPP
#define KNOWRA_COREF_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "knowra/ad.hpp"
#include "knowra/corpus.hpp"
#include "knowra/encoder.hpp"

namespace knowra::coref {

struct Pronoun {
  corpus::Span span;  // subword positions in the tokenized document
  std::string surface;
};

struct CorefSet {
  std::size_t entity = 0;
  std::vector<Pronoun> pronouns;
};

// Pluggable coreference source. resolve() must be deterministic for fixed
// inputs; failures are reported via exceptions and the pipeline degrades to
// an empty set with a warning counter.
class CorefProvider {
 public:
  virtual ~CorefProvider() = default;
  virtual CorefSet resolve(const corpus::TokenizedDocument& tdoc,
                           const corpus::Document& doc, std::size_t entity_idx) = 0;
  virtual std::string id() const = 0;
};

// resolve() with validation and soft-failure accounting.
CorefSet resolve(CorefProvider& provider, const corpus::TokenizedDocument& tdoc,
                 const corpus::Document& doc, std::size_t entity_idx, Counters* counters);

// Gold spans from a JSON file: doc_id -> [{entity, spans: [[start,end],...]}].
class FixtureProvider : public CorefProvider {
 public:
  explicit FixtureProvider(const std::string& path);
  static FixtureProvider from_json_text(const std::string& text);

  CorefSet resolve(const corpus::TokenizedDocument& tdoc, const corpus::Document& doc,
                   std::size_t entity_idx) override;
  std::string id() const override { return "fixture"; }

 private:
  FixtureProvider() = default;
  // doc_id -> entity -> spans
  std::map<std::string, std::map<std::size_t, std::vector<corpus::Span>>> spans_;
};

// Nearest-antecedent heuristic: "he"/"she" link to the closest preceding
// PER mention, "it" to LOC, "they" to ORG.
class RuleProvider : public CorefProvider {
 public:
  CorefSet resolve(const corpus::TokenizedDocument& tdoc, const corpus::Document& doc,
                   std::size_t entity_idx) override;
  std::string id() const override { return "rule"; }
};

std::unique_ptr<CorefProvider> make_provider(const std::string& id, const std::string& fixture_path);

// Token-attention profile of an entity: attention rows at the entity's
// marker positions, averaged over markers and summed over heads. Length-L
// vector; also the per-entity profile used for pair context pooling.
ad::Var entity_attention_profile(const encoder::EncodedGraph& enc,
                                 const corpus::TokenizedDocument& tdoc, std::size_t entity_idx);

// Attention-weighted pronoun embeddings: the profile restricted to each
// pronoun span, renormalized to sum 1, applied to the token embeddings.
// Keyed by (entity, pronoun index).
std::map<std::pair<std::size_t, std::size_t>, ad::Var> pronoun_embeddings(
    const encoder::EncodedGraph& enc, const corpus::TokenizedDocument& tdoc,
    const std::vector<CorefSet>& csets);

}  // namespace knowra::coref

#endif  // KNOWRA_COREF_HPP
