#include "knowra/harness/metrics.hpp"

#include <json.hpp>

namespace knowra::harness {

using nlohmann::json;

NamedFactSet named_facts(const corpus::Corpus& corpus) {
  NamedFactSet out;
  for (const corpus::Document& doc : corpus) {
    for (const corpus::RelationFact& f : doc.facts) {
      out.insert({doc.entities[f.head].name, doc.entities[f.tail].name, f.relation});
    }
  }
  return out;
}

namespace {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Prf micro(const FactSet& preds, const FactSet& gold) {
  std::size_t correct = 0;
  for (const Fact& p : preds) {
    if (gold.count(p)) ++correct;
  }
  Prf out;
  out.precision = preds.empty() ? 0.0 : static_cast<double>(correct) / preds.size();
  out.recall = gold.empty() ? 0.0 : static_cast<double>(correct) / gold.size();
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace

MetricsReport evaluate(const FactSet& preds, const FactSet& gold, const NamedFactSet& train_facts,
                       const corpus::Corpus& corpus) {
  std::map<std::string, const corpus::Document*> by_id;
  for (const corpus::Document& doc : corpus) by_id[doc.doc_id] = &doc;

  auto doc_of = [&](const Fact& f) -> const corpus::Document& {
    auto it = by_id.find(std::get<0>(f));
    if (it == by_id.end()) {
      throw ValidationError("evaluate: unknown document '" + std::get<0>(f) + "'");
    }
    return *it->second;
  };
  auto interval_of = [&](const Fact& f) {
    const corpus::Document& doc = doc_of(f);
    if (std::get<1>(f) >= doc.entities.size() || std::get<2>(f) >= doc.entities.size()) {
      throw ValidationError("evaluate: fact references entity out of range in " + doc.doc_id);
    }
    corpus::RelationFact rf;
    rf.head = std::get<1>(f);
    rf.tail = std::get<2>(f);
    return corpus::sentence_interval(rf, doc);
  };
  auto in_train = [&](const Fact& f) {
    const corpus::Document& doc = doc_of(f);
    return train_facts.count({doc.entities[std::get<1>(f)].name,
                              doc.entities[std::get<2>(f)].name, std::get<3>(f)}) > 0;
  };

  MetricsReport report;
  const Prf overall = micro(preds, gold);
  report.precision = overall.precision;
  report.recall = overall.recall;
  report.f1 = overall.f1;

  // Train-overlap-ignoring F1: facts seen in training (by entity names and
  // relation) are dropped from both predictions and gold.
  FactSet preds_ign, gold_ign;
  for (const Fact& p : preds) {
    if (!in_train(p)) preds_ign.insert(p);
  }
  for (const Fact& gfact : gold) {
    if (!in_train(gfact)) gold_ign.insert(gfact);
  }
  report.ign_f1 = micro(preds_ign, gold_ign).f1;

  // Same-sentence vs cross-sentence splits, each fact attributed by its own
  // minimum mention distance.
  FactSet preds_intra, preds_inter, gold_intra, gold_inter;
  for (const Fact& p : preds) {
    (interval_of(p) == 0 ? preds_intra : preds_inter).insert(p);
  }
  for (const Fact& gfact : gold) {
    (interval_of(gfact) == 0 ? gold_intra : gold_inter).insert(gfact);
  }
  report.intra_f1 = micro(preds_intra, gold_intra).f1;
  report.inter_f1 = micro(preds_inter, gold_inter).f1;

  std::map<std::size_t, FactSet> preds_by_interval, gold_by_interval;
  for (const Fact& p : preds) preds_by_interval[interval_of(p)].insert(p);
  for (const Fact& gfact : gold) gold_by_interval[interval_of(gfact)].insert(gfact);
  for (const auto& [interval, facts] : gold_by_interval) {
    report.interval_buckets[interval] = {micro(preds_by_interval[interval], facts).f1,
                                         facts.size()};
  }
  for (const auto& [interval, facts] : preds_by_interval) {
    if (!report.interval_buckets.count(interval)) {
      report.interval_buckets[interval] = {0.0, 0};
    }
  }
  return report;
}

std::string MetricsReport::to_json_text() const {
  json j;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["ign_f1"] = ign_f1;
  j["intra_f1"] = intra_f1;
  j["inter_f1"] = inter_f1;
  json buckets = json::object();
  for (const auto& [interval, fs] : interval_buckets) {
    buckets[std::to_string(interval)] = {{"f1", fs.first}, {"support", fs.second}};
  }
  j["interval_buckets"] = std::move(buckets);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j.dump(2);
}

}  // namespace knowra::harness
