#include "knowra/coref.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

namespace knowra::coref {

using ad::Var;
using nlohmann::json;

static void validate_cset(const CorefSet& cset, const corpus::TokenizedDocument& tdoc) {
  for (const Pronoun& p : cset.pronouns) {
    if (p.span.start >= p.span.end || p.span.end > tdoc.tokens.size()) {
      throw ValidationError("coref span out of tokenized range in " + tdoc.doc_id);
    }
    for (const auto& [key, mspan] : tdoc.mention_subword_spans) {
      if (key.first != cset.entity) continue;
      if (p.span.start < mspan.end && mspan.start < p.span.end) {
        throw ValidationError("coref span overlaps a mention of its own entity in " + tdoc.doc_id);
      }
    }
  }
}

CorefSet resolve(CorefProvider& provider, const corpus::TokenizedDocument& tdoc,
                 const corpus::Document& doc, std::size_t entity_idx, Counters* counters) {
  if (entity_idx >= doc.entities.size()) {
    throw ValidationError("coref resolve: entity index out of range");
  }
  CorefSet cset;
  try {
    cset = provider.resolve(tdoc, doc, entity_idx);
    validate_cset(cset, tdoc);
  } catch (const std::exception& e) {
    if (counters) {
      ++counters->coref_provider_failures;
      std::cerr << "[coref] provider '" << provider.id() << "' failed on " << tdoc.doc_id
                << " entity " << entity_idx << ": " << e.what() << " (using empty set)\n";
      return CorefSet{entity_idx, {}};
    }
    throw;
  }
  cset.entity = entity_idx;
  return cset;
}

FixtureProvider::FixtureProvider(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open coref fixture file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("coref fixture: ") + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    for (const auto& rec : it.value()) {
      const std::size_t entity = rec.at("entity").get<std::size_t>();
      for (const auto& sp : rec.at("spans")) {
        spans_[it.key()][entity].push_back(
            {sp.at(0).get<std::size_t>(), sp.at(1).get<std::size_t>()});
      }
    }
  }
}

FixtureProvider FixtureProvider::from_json_text(const std::string& text) {
  FixtureProvider p;
  json j = json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it) {
    for (const auto& rec : it.value()) {
      const std::size_t entity = rec.at("entity").get<std::size_t>();
      for (const auto& sp : rec.at("spans")) {
        p.spans_[it.key()][entity].push_back(
            {sp.at(0).get<std::size_t>(), sp.at(1).get<std::size_t>()});
      }
    }
  }
  return p;
}

CorefSet FixtureProvider::resolve(const corpus::TokenizedDocument& tdoc, const corpus::Document&,
                                  std::size_t entity_idx) {
  CorefSet out;
  out.entity = entity_idx;
  auto dit = spans_.find(tdoc.doc_id);
  if (dit == spans_.end()) return out;
  auto eit = dit->second.find(entity_idx);
  if (eit == dit->second.end()) return out;
  for (const corpus::Span& sp : eit->second) {
    std::string surface;
    for (std::size_t t = sp.start; t < sp.end; ++t) {
      surface += (t > sp.start ? " " : "") + std::to_string(tdoc.tokens[t]);
    }
    out.pronouns.push_back({sp, surface});
  }
  return out;
}

namespace {

// Pronoun -> compatible entity type tag.
const std::map<std::string, std::string> kPronounTypes = {
    {"he", "PER"}, {"she", "PER"}, {"it", "LOC"}, {"they", "ORG"}};

}  // namespace

CorefSet RuleProvider::resolve(const corpus::TokenizedDocument& tdoc, const corpus::Document& doc,
                               std::size_t entity_idx) {
  CorefSet out;
  out.entity = entity_idx;
  const std::string& want_type = doc.entities[entity_idx].type_tag;

  // Word-position bookkeeping: map (sentence, word) -> subword span, walking
  // sentences the same way the tokenizer does (markers skipped by surface).
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto& words = doc.sentences[si];
    for (std::size_t w = 0; w < words.size(); ++w) {
      auto pit = kPronounTypes.find(words[w]);
      if (pit == kPronounTypes.end() || pit->second != want_type) continue;

      // Nearest preceding mention of a compatible type, across all entities.
      std::size_t best_entity = SIZE_MAX;
      std::size_t best_sent = 0, best_word = 0;
      bool found = false;
      for (std::size_t e = 0; e < doc.entities.size(); ++e) {
        if (doc.entities[e].type_tag != pit->second) continue;
        for (const corpus::Mention& m : doc.entities[e].mentions) {
          if (m.sent_id > si || (m.sent_id == si && m.span.end > w)) continue;
          if (!found || m.sent_id > best_sent ||
              (m.sent_id == best_sent && m.span.end > best_word)) {
            found = true;
            best_entity = e;
            best_sent = m.sent_id;
            best_word = m.span.end;
          }
        }
      }
      if (!found || best_entity != entity_idx) continue;

      const corpus::Span sub = tdoc.word_subword_spans.at(si).at(w);
      out.pronouns.push_back({sub, words[w]});
    }
  }
  return out;
}

std::unique_ptr<CorefProvider> make_provider(const std::string& id, const std::string& fixture_path) {
  if (id == "fixture") return std::make_unique<FixtureProvider>(fixture_path);
  if (id == "rule") return std::make_unique<RuleProvider>();
  if (id == "none") return nullptr;
  throw ConfigError("unknown coref provider '" + id + "'");
}

ad::Var entity_attention_profile(const encoder::EncodedGraph& enc,
                                 const corpus::TokenizedDocument& tdoc, std::size_t entity_idx) {
  std::vector<std::size_t> markers;
  for (const auto& [key, pos] : tdoc.marker_positions) {
    if (key.first == entity_idx) markers.push_back(pos);
  }
  if (markers.empty()) {
    throw InternalError("entity " + std::to_string(entity_idx) + " has no marker positions");
  }
  std::vector<Var> head_profiles;
  for (const Var& A : enc.A) {
    std::vector<Var> rows;
    for (std::size_t pos : markers) rows.push_back(ad::row(A, pos));
    head_profiles.push_back(ad::smul(ad::add_n(rows), 1.0 / static_cast<double>(markers.size())));
  }
  return ad::add_n(head_profiles);
}

std::map<std::pair<std::size_t, std::size_t>, ad::Var> pronoun_embeddings(
    const encoder::EncodedGraph& enc, const corpus::TokenizedDocument& tdoc,
    const std::vector<CorefSet>& csets) {
  std::map<std::pair<std::size_t, std::size_t>, Var> out;
  for (const CorefSet& cset : csets) {
    if (cset.pronouns.empty()) continue;
    Var profile = entity_attention_profile(enc, tdoc, cset.entity);
    for (std::size_t k = 0; k < cset.pronouns.size(); ++k) {
      const corpus::Span& span = cset.pronouns[k].span;
      if (span.start >= span.end) throw ValidationError("empty pronoun span");
      Var local = ad::slice(profile, span.start, span.end - span.start);
      Var weights = ad::vdiv(local, ad::sum(local));
      std::vector<Var> weighted;
      for (std::size_t t = span.start; t < span.end; ++t) {
        weighted.push_back(ad::mulvs(ad::row(enc.H, t), ad::at(weights, t - span.start)));
      }
      out[{cset.entity, k}] = ad::add_n(weighted);
    }
  }
  return out;
}

}  // namespace knowra::coref
