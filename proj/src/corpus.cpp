#include "knowra/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "knowra/rng.hpp"

namespace knowra::corpus {

using nlohmann::json;

std::size_t Document::num_mentions() const {
  std::size_t n = 0;
  for (const Entity& e : entities) n += e.mentions.size();
  return n;
}

RelationVocab RelationVocab::from_map(const std::map<std::string, std::size_t>& m) {
  RelationVocab v;
  v.by_index_.resize(m.size());
  std::vector<bool> seen(m.size(), false);
  for (const auto& [id, index] : m) {
    if (index == 0) throw ValidationError("relation vocabulary: index 0 is reserved for the threshold class (" + id + ")");
    if (index > m.size()) throw ValidationError("relation vocabulary: indices must be dense starting at 1, got " + std::to_string(index));
    if (seen[index - 1]) throw ValidationError("relation vocabulary: duplicate index " + std::to_string(index));
    seen[index - 1] = true;
    v.by_index_[index - 1] = id;
    v.by_id_[id] = index;
  }
  return v;
}

RelationVocab RelationVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open relation vocabulary file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("relation vocabulary: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("relation vocabulary must be a JSON object");
  std::map<std::string, std::size_t> m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_unsigned()) {
      throw ParseError("relation vocabulary: index for " + it.key() + " must be a non-negative integer");
    }
    m[it.key()] = it.value().get<std::size_t>();
  }
  return from_map(m);
}

std::size_t RelationVocab::index_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw ValidationError("unknown relation id: " + id);
  return it->second;
}

const std::string& RelationVocab::id_at(std::size_t index) const {
  if (index == 0 || index > by_index_.size()) throw InternalError("relation index out of range");
  return by_index_[index - 1];
}

void validate_document(const Document& doc, const RelationVocab& vocab) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("document " + doc.doc_id + ": " + what);
  };
  std::vector<std::string> unknown_relations;
  for (std::size_t ei = 0; ei < doc.entities.size(); ++ei) {
    const Entity& e = doc.entities[ei];
    if (e.mentions.empty()) fail("entity " + std::to_string(ei) + " has no mentions");
    for (const Mention& m : e.mentions) {
      if (m.sent_id >= doc.sentences.size()) {
        fail("mention of entity " + std::to_string(ei) + " references sentence " + std::to_string(m.sent_id));
      }
      const auto& sent = doc.sentences[m.sent_id];
      if (m.span.start >= m.span.end || m.span.end > sent.size()) {
        fail("mention span [" + std::to_string(m.span.start) + "," + std::to_string(m.span.end) +
             ") out of range in sentence " + std::to_string(m.sent_id));
      }
      std::string joined;
      for (std::size_t t = m.span.start; t < m.span.end; ++t) {
        if (t > m.span.start) joined += ' ';
        joined += sent[t];
      }
      if (joined != m.surface) {
        fail("mention surface '" + m.surface + "' does not match tokens '" + joined + "'");
      }
    }
  }
  for (const RelationFact& f : doc.facts) {
    if (f.head >= doc.entities.size() || f.tail >= doc.entities.size()) {
      fail("fact references entity out of range");
    }
    if (f.head == f.tail) fail("fact head equals tail");
    if (!vocab.contains(f.relation)) unknown_relations.push_back(f.relation);
    for (std::size_t ev : f.evidence) {
      if (ev >= doc.sentences.size()) fail("fact evidence sentence out of range");
    }
  }
  if (!unknown_relations.empty()) {
    std::sort(unknown_relations.begin(), unknown_relations.end());
    unknown_relations.erase(std::unique(unknown_relations.begin(), unknown_relations.end()),
                            unknown_relations.end());
    std::string list;
    for (const auto& r : unknown_relations) list += (list.empty() ? "" : ", ") + r;
    fail("unknown relation ids: " + list);
  }
}

static Document document_from_json(const json& j) {
  Document doc;
  doc.doc_id = j.at("title").get<std::string>();
  for (const auto& sent : j.at("sents")) {
    doc.sentences.push_back(sent.get<std::vector<std::string>>());
  }
  for (const auto& vertex : j.at("vertexSet")) {
    Entity e;
    for (const auto& mention : vertex) {
      Mention m;
      m.sent_id = mention.at("sent_id").get<std::size_t>();
      const auto& pos = mention.at("pos");
      m.span.start = pos.at(0).get<std::size_t>();
      m.span.end = pos.at(1).get<std::size_t>();
      m.surface = mention.at("name").get<std::string>();
      if (e.name.empty()) e.name = m.surface;
      if (mention.contains("type")) e.type_tag = mention.at("type").get<std::string>();
      e.mentions.push_back(std::move(m));
    }
    doc.entities.push_back(std::move(e));
  }
  if (j.contains("labels")) {
    for (const auto& label : j.at("labels")) {
      RelationFact f;
      f.head = label.at("h").get<std::size_t>();
      f.tail = label.at("t").get<std::size_t>();
      f.relation = label.at("r").get<std::string>();
      if (label.contains("evidence")) {
        f.evidence = label.at("evidence").get<std::vector<std::size_t>>();
      }
      doc.facts.push_back(std::move(f));
    }
  }
  return doc;
}

Corpus parse_docred_json(const std::string& text, const RelationVocab& vocab) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed corpus JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError("corpus JSON must be an array of document records");
  Corpus corpus;
  for (const auto& rec : j) {
    Document doc;
    try {
      doc = document_from_json(rec);
    } catch (const json::exception& e) {
      throw ParseError(std::string("document record missing required field: ") + e.what());
    }
    validate_document(doc, vocab);
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_docred_json(const std::string& path, const RelationVocab& vocab) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_docred_json(ss.str(), vocab);
}

std::string serialize_docred_json(const Corpus& corpus) {
  json out = json::array();
  for (const Document& doc : corpus) {
    json rec;
    rec["title"] = doc.doc_id;
    rec["sents"] = doc.sentences;
    json vertex_set = json::array();
    for (const Entity& e : doc.entities) {
      json mentions = json::array();
      for (const Mention& m : e.mentions) {
        mentions.push_back({{"name", m.surface},
                            {"sent_id", m.sent_id},
                            {"pos", {m.span.start, m.span.end}},
                            {"type", e.type_tag}});
      }
      vertex_set.push_back(std::move(mentions));
    }
    rec["vertexSet"] = std::move(vertex_set);
    json labels = json::array();
    for (const RelationFact& f : doc.facts) {
      labels.push_back({{"h", f.head}, {"t", f.tail}, {"r", f.relation}, {"evidence", f.evidence}});
    }
    rec["labels"] = std::move(labels);
    out.push_back(std::move(rec));
  }
  return out.dump(2);
}

void save_docred_json(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write corpus file: " + path);
  out << serialize_docred_json(corpus) << '\n';
}

std::size_t sentence_interval(const RelationFact& fact, const Document& doc) {
  if (fact.head >= doc.entities.size() || fact.tail >= doc.entities.size()) {
    throw ValidationError("sentence_interval: fact references entity out of range");
  }
  std::size_t best = SIZE_MAX;
  for (const Mention& mh : doc.entities[fact.head].mentions) {
    for (const Mention& mt : doc.entities[fact.tail].mentions) {
      const std::size_t d = mh.sent_id > mt.sent_id ? mh.sent_id - mt.sent_id : mt.sent_id - mh.sent_id;
      best = std::min(best, d);
    }
  }
  return best;
}

// ---------------------------------------------------------------------
// Tokenization

TokenizedDocument tokenize_with_markers(const Document& doc, const SubwordMapper& mapper,
                                        std::size_t max_len) {
  TokenizedDocument out;
  out.doc_id = doc.doc_id;
  out.max_len = max_len;
  out.tokens.push_back(kClsTokenId);

  // Reject overlapping spans of the same entity before emitting anything.
  for (std::size_t ei = 0; ei < doc.entities.size(); ++ei) {
    const auto& mentions = doc.entities[ei].mentions;
    for (std::size_t a = 0; a < mentions.size(); ++a) {
      for (std::size_t b = a + 1; b < mentions.size(); ++b) {
        if (mentions[a].sent_id != mentions[b].sent_id) continue;
        const Span& sa = mentions[a].span;
        const Span& sb = mentions[b].span;
        if (sa.start < sb.end && sb.start < sa.end) {
          throw ValidationError("document " + doc.doc_id + ": overlapping mention spans of entity " +
                                std::to_string(ei));
        }
      }
    }
  }

  // Markers at the same word boundary are ordered by span start, then by
  // entity index.
  struct Insertion {
    std::size_t word;
    std::size_t entity;
    std::size_t mention;
  };
  std::vector<std::vector<Insertion>> per_sentence(doc.sentences.size());
  for (std::size_t ei = 0; ei < doc.entities.size(); ++ei) {
    const Entity& e = doc.entities[ei];
    for (std::size_t mi = 0; mi < e.mentions.size(); ++mi) {
      const Mention& m = e.mentions[mi];
      per_sentence[m.sent_id].push_back({m.span.start, ei, mi});
    }
  }
  for (auto& ins : per_sentence) {
    std::sort(ins.begin(), ins.end(), [](const Insertion& a, const Insertion& b) {
      if (a.word != b.word) return a.word < b.word;
      if (a.entity != b.entity) return a.entity < b.entity;
      return a.mention < b.mention;
    });
  }

  out.word_subword_spans.resize(doc.sentences.size());
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto& words = doc.sentences[si];
    const std::size_t sent_begin = out.tokens.size();
    std::size_t next_insertion = 0;
    const auto& ins = per_sentence[si];
    for (std::size_t w = 0; w <= words.size(); ++w) {
      while (next_insertion < ins.size() && ins[next_insertion].word == w) {
        out.marker_positions[{ins[next_insertion].entity, ins[next_insertion].mention}] =
            out.tokens.size();
        out.tokens.push_back(kMarkerTokenId);
        ++next_insertion;
      }
      if (w == words.size()) break;
      const std::vector<int> pieces = mapper(words[w]);
      if (pieces.empty()) {
        throw ValidationError("subword mapper returned no pieces for '" + words[w] + "'");
      }
      const std::size_t word_begin = out.tokens.size();
      out.tokens.insert(out.tokens.end(), pieces.begin(), pieces.end());
      out.word_subword_spans[si].push_back({word_begin, out.tokens.size()});
      for (const Insertion& i : ins) {
        const Mention& m = doc.entities[i.entity].mentions[i.mention];
        if (m.span.start == w) {
          out.mention_subword_spans[{i.entity, i.mention}].start = word_begin;
        }
        if (m.span.end == w + 1) {
          out.mention_subword_spans[{i.entity, i.mention}].end = out.tokens.size();
        }
      }
    }
    out.sentence_spans.push_back({sent_begin, out.tokens.size()});
    if (out.tokens.size() - sent_begin + 1 > max_len) {
      throw ValidationError("document " + doc.doc_id + ": sentence " + std::to_string(si) +
                            " exceeds max_len after subword expansion");
    }
  }
  return out;
}

Vocabulary Vocabulary::build(const Corpus& corpus) {
  std::set<std::string> words;
  for (const Document& doc : corpus) {
    for (const auto& sent : doc.sentences) {
      words.insert(sent.begin(), sent.end());
    }
  }
  Vocabulary v;
  for (const std::string& w : words) {
    v.ids_[w] = static_cast<int>(kFirstWordTokenId + v.words_.size());
    v.words_.push_back(w);
  }
  return v;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  Vocabulary v;
  v.words_ = std::move(words);
  for (std::size_t i = 0; i < v.words_.size(); ++i) {
    v.ids_[v.words_[i]] = static_cast<int>(kFirstWordTokenId + i);
  }
  return v;
}

SubwordMapper Vocabulary::mapper() const {
  auto ids = ids_;
  return [ids](const std::string& word) -> std::vector<int> {
    auto it = ids.find(word);
    if (it == ids.end()) return {kUnkTokenId};
    return {it->second};
  };
}

// ---------------------------------------------------------------------
// Synthetic corpora

namespace {

const char* kTypeTags[] = {"PER", "LOC", "ORG"};

std::string pool_name(std::size_t i) {
  std::string s = "ent";
  if (i < 10) s += '0';
  s += std::to_string(i);
  return s;
}

std::string pool_qid(std::size_t i) { return "Q" + std::to_string(1000 + i); }

std::string relation_id(std::size_t r) { return "P" + std::to_string(r + 1); }

const char* pronoun_for(const std::string& type_tag) {
  if (type_tag == "PER") return "he";
  if (type_tag == "LOC") return "it";
  return "they";
}

enum class FactKind { Text, Bridge, KbOnly };

struct WorldFact {
  std::size_t head = 0;
  std::size_t tail = 0;
  std::size_t rel = 0;  // zero-based relation
  FactKind kind = FactKind::Text;
  std::size_t mid = 0;  // bridge intermediary
  bool kb_triple = false;
};

}  // namespace

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, const SyntheticSpec& spec) {
  if (spec.num_relations == 0) throw ValidationError("synthetic corpus needs at least one relation type");
  if (spec.entities_per_doc < 2) throw ValidationError("synthetic corpus needs at least two entities per document");
  if (spec.entity_pool < spec.entities_per_doc) {
    throw ValidationError("entity pool smaller than entities per document");
  }

  Rng rng(seed);
  const std::size_t R = spec.num_relations;
  const std::size_t pool = spec.entity_pool;

  // Sample unordered entity pairs with one direction each, so no fact ever
  // has a sibling in the reverse direction.
  std::vector<std::pair<std::size_t, std::size_t>> all_pairs;
  for (std::size_t a = 0; a < pool; ++a) {
    for (std::size_t b = a + 1; b < pool; ++b) all_pairs.emplace_back(a, b);
  }
  rng.shuffle(all_pairs);

  std::set<std::pair<std::size_t, std::size_t>> used_unordered;
  std::vector<WorldFact> world;
  auto take_pair = [&](std::size_t& h, std::size_t& t) -> bool {
    while (!all_pairs.empty()) {
      auto [a, b] = all_pairs.back();
      all_pairs.pop_back();
      if (used_unordered.count({a, b})) continue;
      used_unordered.insert({a, b});
      if (rng.uniform() < 0.5) std::swap(a, b);
      h = a;
      t = b;
      return true;
    }
    return false;
  };

  const std::size_t n_kb = static_cast<std::size_t>(spec.kb_only_fraction * spec.world_facts + 0.5);
  const std::size_t n_bridge = static_cast<std::size_t>(spec.bridge_fraction * spec.world_facts + 0.5);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> fact_of_pair;

  for (std::size_t i = 0; i < spec.world_facts; ++i) {
    WorldFact f;
    if (!take_pair(f.head, f.tail)) break;
    f.rel = rng.uniform_int(R);
    if (i < n_kb) {
      f.kind = FactKind::KbOnly;
      f.kb_triple = true;
    } else if (i < n_kb + n_bridge) {
      f.kind = FactKind::Bridge;
    } else {
      f.kind = FactKind::Text;
      f.kb_triple = rng.uniform() < spec.textual_triple_prob;
    }
    fact_of_pair[{f.head, f.tail}] = world.size();
    world.push_back(f);
  }

  // Bridge facts get two textual legs through a fresh intermediary; the
  // composed relation is a fixed function of the leg relations so it stays
  // learnable across documents.
  const std::size_t base_count = world.size();
  for (std::size_t i = 0; i < base_count; ++i) {
    if (world[i].kind != FactKind::Bridge) continue;
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const std::size_t mid = rng.uniform_int(pool);
      if (mid == world[i].head || mid == world[i].tail) continue;
      auto key1 = std::minmax(world[i].head, mid);
      auto key2 = std::minmax(mid, world[i].tail);
      if (used_unordered.count({key1.first, key1.second})) continue;
      if (used_unordered.count({key2.first, key2.second})) continue;
      used_unordered.insert({key1.first, key1.second});
      used_unordered.insert({key2.first, key2.second});
      world[i].mid = mid;
      const std::size_t r1 = rng.uniform_int(R);
      const std::size_t r2 = (world[i].rel + R - r1 % R) % R;  // compose(r1, r2) == rel
      WorldFact leg1{world[i].head, mid, r1, FactKind::Text, 0, false};
      WorldFact leg2{mid, world[i].tail, r2, FactKind::Text, 0, false};
      fact_of_pair[{leg1.head, leg1.tail}] = world.size();
      world.push_back(leg1);
      fact_of_pair[{leg2.head, leg2.tail}] = world.size();
      world.push_back(leg2);
      placed = true;
    }
    if (!placed) world[i].kind = FactKind::Text;  // pool too dense; degrade
  }

  // Relation vocabulary and entity catalog.
  std::map<std::string, std::size_t> vocab_map;
  for (std::size_t r = 0; r < R; ++r) vocab_map[relation_id(r)] = r + 1;

  SyntheticCorpus synth;
  synth.vocab = RelationVocab::from_map(vocab_map);
  synth.kb_version = "synthetic-" + std::to_string(seed);
  for (std::size_t i = 0; i < pool; ++i) {
    synth.qids[pool_name(i)] = {pool_qid(i)};
  }

  // Documents.
  std::set<std::pair<std::size_t, std::size_t>> cooccurring;
  std::vector<std::size_t> bridge_ids;
  for (std::size_t i = 0; i < world.size(); ++i) {
    if (world[i].kind == FactKind::Bridge) bridge_ids.push_back(i);
  }

  for (std::size_t di = 0; di < spec.num_docs; ++di) {
    Document doc;
    {
      std::string n = std::to_string(di);
      while (n.size() < 3) n = "0" + n;
      doc.doc_id = "synth" + n;
    }

    // Entity subset; seeded from a bridge fact most of the time so multi-hop
    // signal appears in nearly every document.
    std::set<std::size_t> subset;
    if (!bridge_ids.empty() && rng.uniform() < 0.8) {
      const WorldFact& bf = world[bridge_ids[rng.uniform_int(bridge_ids.size())]];
      subset.insert(bf.head);
      subset.insert(bf.mid);
      subset.insert(bf.tail);
    }
    while (subset.size() < spec.entities_per_doc) {
      subset.insert(rng.uniform_int(pool));
    }
    std::vector<std::size_t> members(subset.begin(), subset.end());

    std::map<std::size_t, std::size_t> local_index;
    for (std::size_t i = 0; i < members.size(); ++i) {
      local_index[members[i]] = i;
      Entity e;
      e.name = pool_name(members[i]);
      e.type_tag = kTypeTags[members[i] % 3];
      doc.entities.push_back(std::move(e));
    }
    for (std::size_t a : members) {
      for (std::size_t b : members) {
        if (a < b) cooccurring.insert({a, b});
      }
    }

    // Facts whose endpoints (and intermediary, for bridges) are present.
    std::vector<std::size_t> doc_facts;
    for (std::size_t fi = 0; fi < world.size(); ++fi) {
      const WorldFact& f = world[fi];
      if (!subset.count(f.head) || !subset.count(f.tail)) continue;
      if (f.kind == FactKind::Bridge && !subset.count(f.mid)) continue;
      doc_facts.push_back(fi);
    }

    auto add_sentence = [&](const std::vector<std::string>& words,
                            const std::vector<std::size_t>& entity_words) {
      const std::size_t sid = doc.sentences.size();
      doc.sentences.push_back(words);
      for (std::size_t w : entity_words) {
        const std::string& name = words[w];
        for (std::size_t i = 0; i < pool; ++i) {
          if (pool_name(i) == name) {
            doc.entities[local_index[i]].mentions.push_back({sid, {w, w + 1}, name});
            break;
          }
        }
      }
      return sid;
    };

    std::set<std::size_t> mentioned;
    for (std::size_t fi : doc_facts) {
      const WorldFact& f = world[fi];
      RelationFact fact;
      fact.head = local_index[f.head];
      fact.tail = local_index[f.tail];
      fact.relation = relation_id(f.rel);
      if (f.kind == FactKind::Text) {
        const std::size_t sid = add_sentence(
            {pool_name(f.head), "rel" + std::to_string(f.rel), pool_name(f.tail)}, {0, 2});
        fact.evidence.push_back(sid);
        mentioned.insert(f.head);
        mentioned.insert(f.tail);
        if (rng.uniform() < spec.pronoun_prob) {
          const std::string& tag = doc.entities[local_index[f.head]].type_tag;
          add_sentence({pronoun_for(tag), "spoke", "again"}, {});
        }
      }
      doc.facts.push_back(std::move(fact));
    }
    for (std::size_t m : members) {
      if (mentioned.count(m)) continue;
      add_sentence({pool_name(m), "appears", "here"}, {0});
    }

    synth.docs.push_back(std::move(doc));
  }

  // KB snapshot: correct triples from flagged world facts, wrong triples
  // between co-occurring non-fact pairs so every planted-wrong triple can
  // surface as a knowledge edge.
  std::size_t correct_count = 0;
  for (const WorldFact& f : world) {
    if (!f.kb_triple) continue;
    synth.triples.push_back({pool_qid(f.head), relation_id(f.rel), pool_qid(f.tail), true});
    ++correct_count;
  }
  std::size_t wrong_target = 0;
  if (spec.wrong_triple_fraction > 0.0 && spec.wrong_triple_fraction < 1.0) {
    wrong_target = static_cast<std::size_t>(
        spec.wrong_triple_fraction / (1.0 - spec.wrong_triple_fraction) * correct_count + 0.5);
  }
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (const auto& pr : cooccurring) {
    if (used_unordered.count(pr)) continue;
    candidates.push_back(pr);
  }
  rng.shuffle(candidates);
  std::set<std::tuple<std::string, std::string, std::string>> triple_keys;
  for (const auto& t : synth.triples) triple_keys.insert({t.qid_head, t.relation, t.qid_tail});
  for (const auto& [a, b] : candidates) {
    if (wrong_target == 0) break;
    std::size_t h = a, t = b;
    if (rng.uniform() < 0.5) std::swap(h, t);
    SyntheticKbTriple triple{pool_qid(h), relation_id(rng.uniform_int(R)), pool_qid(t), false};
    if (!triple_keys.insert({triple.qid_head, triple.relation, triple.qid_tail}).second) continue;
    synth.triples.push_back(std::move(triple));
    --wrong_target;
  }

  for (const Document& doc : synth.docs) validate_document(doc, synth.vocab);
  return synth;
}

std::string serialize_kb_snapshot(const SyntheticCorpus& synth) {
  json j;
  j["version"] = synth.kb_version;
  json qids = json::object();
  for (const auto& [name, ids] : synth.qids) qids[name] = ids;
  j["qids"] = std::move(qids);
  json triples = json::array();
  json flags = json::array();
  for (const auto& t : synth.triples) {
    triples.push_back({t.qid_head, t.relation, t.qid_tail});
    flags.push_back(t.gold_correct);
  }
  j["triples"] = std::move(triples);
  j["gold_flags"] = std::move(flags);
  return j.dump(2);
}

void save_kb_snapshot(const SyntheticCorpus& synth, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write snapshot file: " + path);
  out << serialize_kb_snapshot(synth) << '\n';
}

std::string serialize_relation_vocab(const RelationVocab& vocab) {
  json j = json::object();
  for (std::size_t k = 1; k <= vocab.size(); ++k) j[vocab.id_at(k)] = k;
  return j.dump(2);
}

}  // namespace knowra::corpus
