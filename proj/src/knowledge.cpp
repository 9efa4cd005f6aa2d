#include "knowra/knowledge.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

namespace knowra::knowledge {

using ad::Var;
using nlohmann::json;

// ---------------------------------------------------------------------
// SnapshotKB

SnapshotKB SnapshotKB::from_json_text(const std::string& text) {
  SnapshotKB kb;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("KB snapshot: ") + e.what());
  }
  if (j.contains("version")) kb.version_ = j.at("version").get<std::string>();
  if (j.contains("qids")) {
    for (auto it = j.at("qids").begin(); it != j.at("qids").end(); ++it) {
      kb.qids_[it.key()] = it.value().get<std::vector<std::string>>();
    }
  }
  const bool has_flags = j.contains("gold_flags");
  if (j.contains("triples")) {
    const auto& triples = j.at("triples");
    for (std::size_t i = 0; i < triples.size(); ++i) {
      const auto& t = triples.at(i);
      if (t.size() != 3) throw ParseError("KB snapshot: triple must have three elements");
      const std::string h = t.at(0).get<std::string>();
      const std::string r = t.at(1).get<std::string>();
      const std::string q = t.at(2).get<std::string>();
      kb.relations_[{h, q}].push_back(r);
      if (has_flags) kb.gold_flags_[{h, r, q}] = j.at("gold_flags").at(i).get<bool>();
    }
  }
  return kb;
}

SnapshotKB SnapshotKB::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open KB snapshot: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::vector<std::string> SnapshotKB::lookup_qids(const std::string& name) {
  if (name.empty()) throw ValidationError("lookup_qids: empty entity name");
  auto it = qids_.find(name);
  return it == qids_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> SnapshotKB::lookup_relations(const std::string& qid_head,
                                                      const std::string& qid_tail) {
  if (qid_head.empty() || qid_tail.empty()) throw ValidationError("lookup_relations: empty qid");
  auto it = relations_.find({qid_head, qid_tail});
  return it == relations_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> SnapshotKB::known_relation_ids() const {
  std::set<std::string> ids;
  for (const auto& [key, rels] : relations_) ids.insert(rels.begin(), rels.end());
  return {ids.begin(), ids.end()};
}

std::optional<bool> SnapshotKB::gold_flag(const std::string& qid_head, const std::string& rel,
                                          const std::string& qid_tail) const {
  auto it = gold_flags_.find({qid_head, rel, qid_tail});
  if (it == gold_flags_.end()) return std::nullopt;
  return it->second;
}

void SnapshotKB::add_qids(const std::string& name, const std::vector<std::string>& qids) {
  qids_[name] = qids;
}

void SnapshotKB::add_triple(const std::string& qid_head, const std::string& rel,
                            const std::string& qid_tail) {
  auto& rels = relations_[{qid_head, qid_tail}];
  if (std::find(rels.begin(), rels.end(), rel) == rels.end()) rels.push_back(rel);
}

std::string SnapshotKB::to_json_text() const {
  json j;
  j["version"] = version_;
  json q = json::object();
  for (const auto& [name, ids] : qids_) q[name] = ids;
  j["qids"] = std::move(q);
  json triples = json::array();
  for (const auto& [key, rels] : relations_) {
    for (const std::string& r : rels) triples.push_back({key.first, r, key.second});
  }
  j["triples"] = std::move(triples);
  return j.dump(2);
}

void SnapshotKB::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write KB snapshot: " + path);
  out << to_json_text() << '\n';
}

// ---------------------------------------------------------------------
// LiveKB

LiveKB::LiveKB(LiveKBConfig cfg, Counters* counters) : cfg_(std::move(cfg)), counters_(counters) {
  if (!cfg_.cache_path.empty()) {
    std::ifstream probe(cfg_.cache_path);
    if (probe) cache_ = SnapshotKB::load(cfg_.cache_path);
  }
}

LiveKB::~LiveKB() = default;

std::string LiveKB::version() const { return "live:" + cfg_.endpoint; }

std::vector<std::string> LiveKB::known_relation_ids() const { return cache_.known_relation_ids(); }

std::optional<std::string> LiveKB::fetch(const std::string& path) {
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0 && cfg_.backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
    }
    httplib::Client client(cfg_.endpoint);
    client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
    client.set_read_timeout(0, cfg_.timeout_ms * 1000);
    auto res = client.Get(path);
    if (res && res->status == 200) return res->body;
  }
  if (counters_) ++counters_->kb_lookup_failures;
  std::cerr << "[kb] lookup failed after " << cfg_.max_retries + 1 << " attempts: " << path
            << " (treated as empty)\n";
  return std::nullopt;
}

std::vector<std::string> LiveKB::lookup_qids(const std::string& name) {
  if (name.empty()) throw ValidationError("lookup_qids: empty entity name");
  if (qid_cached_.count(name)) return cache_.lookup_qids(name);
  auto body = fetch("/qids?name=" + httplib::detail::encode_url(name));
  std::vector<std::string> out;
  if (body) {
    try {
      out = json::parse(*body).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("live KB qid response: ") + e.what());
    }
  }
  cache_.add_qids(name, out);
  qid_cached_[name] = true;
  if (!cfg_.cache_path.empty()) cache_.save(cfg_.cache_path);
  return out;
}

std::vector<std::string> LiveKB::lookup_relations(const std::string& qid_head,
                                                  const std::string& qid_tail) {
  if (qid_head.empty() || qid_tail.empty()) throw ValidationError("lookup_relations: empty qid");
  const auto key = std::make_pair(qid_head, qid_tail);
  if (rel_cached_.count(key)) return cache_.lookup_relations(qid_head, qid_tail);
  auto body = fetch("/relations?h=" + httplib::detail::encode_url(qid_head) +
                    "&t=" + httplib::detail::encode_url(qid_tail));
  std::vector<std::string> out;
  if (body) {
    try {
      out = json::parse(*body).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("live KB relation response: ") + e.what());
    }
  }
  for (const std::string& r : out) cache_.add_triple(qid_head, r, qid_tail);
  rel_cached_[key] = true;
  if (!cfg_.cache_path.empty()) cache_.save(cfg_.cache_path);
  return out;
}

// ---------------------------------------------------------------------
// Graph augmentation

KMHDG augment_graph(const docgraph::MHDG& mhdg, const corpus::Document& doc, KBClient& kb) {
  KMHDG out;
  out.base = &mhdg;
  std::set<std::tuple<std::size_t, std::size_t, std::string>> seen;
  const std::string source = kb.version();

  std::vector<std::vector<std::string>> qids(doc.entities.size());
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    qids[e] = kb.lookup_qids(doc.entities[e].name);
  }

  for (std::size_t i = 0; i < doc.entities.size(); ++i) {
    for (std::size_t j = 0; j < doc.entities.size(); ++j) {
      if (i == j) continue;
      for (const std::string& qi : qids[i]) {
        for (const std::string& qj : qids[j]) {
          for (const std::string& rel : kb.lookup_relations(qi, qj)) {
            if (!seen.insert({i, j, rel}).second) continue;
            KnowledgeEdge edge;
            edge.head = i;
            edge.tail = j;
            edge.relation = rel;
            edge.qid_head = qi;
            edge.qid_tail = qj;
            edge.source = source;
            if (auto* snap = dynamic_cast<SnapshotKB*>(&kb)) {
              edge.gold_flag = snap->gold_flag(qi, rel, qj);
            }
            out.knowledge_edges.push_back(std::move(edge));
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------
// Embeddings, scoring, fusion, filtration

RelationEmbeddingTable::RelationEmbeddingTable(const std::vector<std::string>& relation_ids,
                                               ParamStore& params, Rng& rng, std::size_t dim) {
  std::vector<std::string> sorted = relation_ids;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const std::string& id : sorted) {
    params.add("know/rel/" + id, init_normal(rng, {dim}, 0.02));
    ids_.push_back(id);
  }
}

bool RelationEmbeddingTable::contains(const std::string& relation_id) const {
  return std::binary_search(ids_.begin(), ids_.end(), relation_id);
}

ad::Var RelationEmbeddingTable::bind(ad::Graph& g, const std::string& relation_id, bool trainable,
                                     ParamStore& params) const {
  if (!contains(relation_id)) {
    throw ValidationError("no relation embedding for id '" + relation_id + "'");
  }
  const std::string name = "know/rel/" + relation_id;
  return trainable ? params.bind(g, name) : params.bind_const(g, name);
}

ad::Var entity_embedding(const std::vector<Var>& mention_vecs,
                         const std::vector<Var>& pronoun_vecs, Var proj) {
  if (mention_vecs.empty()) throw ValidationError("entity_embedding: no mentions");
  auto log_mean_exp = [](const std::vector<Var>& vs) {
    std::vector<Var> exps;
    exps.reserve(vs.size());
    for (const Var& v : vs) exps.push_back(ad::exp(v));
    return ad::log(ad::smul(ad::add_n(exps), 1.0 / static_cast<double>(vs.size())));
  };
  Var mention_half = log_mean_exp(mention_vecs);
  Var coref_half = pronoun_vecs.empty() ? mention_half : log_mean_exp(pronoun_vecs);
  return ad::matvec(proj, ad::concat(mention_half, coref_half));
}

ad::Var confidence_score(Var h_head, Var h_tail, Var relation_vec) {
  return ad::sum(ad::mul(ad::mul(h_head, relation_vec), h_tail));
}

ad::Var knowledge_fuse_entity(Var h_self, const std::vector<ScoredEdge>& edges,
                              const std::vector<Var>& entity_embeddings, bool accept_all) {
  if (edges.empty()) return h_self;
  std::vector<Var> parts;
  parts.reserve(edges.size());
  for (const ScoredEdge& e : edges) {
    Var msg = ad::mul(entity_embeddings[e.tail_entity], e.relation_vec);
    parts.push_back(accept_all ? msg : ad::mulvs(msg, ad::sigmoid(e.tau)));
  }
  return ad::add_n(parts);
}

ad::Var filtration_loss(ad::Graph& g, const std::vector<Var>& taus, const std::vector<int>& labels) {
  if (taus.size() != labels.size()) throw InternalError("filtration_loss: size mismatch");
  if (taus.empty()) return g.constant(Tensor::scalar(0.0));
  // log(sigmoid(z)) written as -softplus(-z); identical in exact arithmetic
  // and finite for any z.
  auto log_sigmoid = [](Var z) { return ad::neg(ad::softplus(ad::neg(z))); };
  std::vector<Var> terms;
  terms.reserve(taus.size());
  for (std::size_t n = 0; n < taus.size(); ++n) {
    if (labels[n] == 1) {
      terms.push_back(log_sigmoid(taus[n]));
    } else {
      terms.push_back(log_sigmoid(ad::sadd(ad::neg(taus[n]), 1.0)));  // sigma(1 - tau)
    }
  }
  return ad::smul(ad::add_n(terms), -1.0 / static_cast<double>(taus.size()));
}

std::vector<int> filtration_labels(const KMHDG& kg, const corpus::Document& doc) {
  std::set<std::tuple<std::size_t, std::size_t, std::string>> gold;
  for (const corpus::RelationFact& f : doc.facts) gold.insert({f.head, f.tail, f.relation});
  std::vector<int> labels;
  labels.reserve(kg.knowledge_edges.size());
  for (const KnowledgeEdge& e : kg.knowledge_edges) {
    labels.push_back(gold.count({e.head, e.tail, e.relation}) ? 1 : 0);
  }
  return labels;
}

std::unique_ptr<KBClient> make_kb_client(const std::string& snapshot_path) {
  return std::make_unique<SnapshotKB>(SnapshotKB::load(snapshot_path));
}

}  // namespace knowra::knowledge
