#ifndef KNOWRA_HARNESS_METRICS_HPP
#define KNOWRA_HARNESS_METRICS_HPP

#include <map>
#include <set>
#include <string>
#include <tuple>

#include "knowra/corpus.hpp"

namespace knowra::harness {

// (doc_id, head entity, tail entity, relation id)
using Fact = std::tuple<std::string, std::size_t, std::size_t, std::string>;
using FactSet = std::set<Fact>;

// (head name, tail name, relation id) — the identity used for the
// train-overlap exclusion.
using NamedFact = std::tuple<std::string, std::string, std::string>;
using NamedFactSet = std::set<NamedFact>;

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ign_f1 = 0.0;
  double intra_f1 = 0.0;
  double inter_f1 = 0.0;
  // sentence interval -> (f1, gold support)
  std::map<std::size_t, std::pair<double, std::size_t>> interval_buckets;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::string to_json_text() const;
};

NamedFactSet named_facts(const corpus::Corpus& corpus);

// Micro precision/recall/F1 over exact triple match, the train-overlap
// variant (matched facts removed from both sides), same-sentence and
// cross-sentence restrictions, and per-interval buckets.
MetricsReport evaluate(const FactSet& preds, const FactSet& gold, const NamedFactSet& train_facts,
                       const corpus::Corpus& corpus);

}  // namespace knowra::harness

#endif  // KNOWRA_HARNESS_METRICS_HPP
