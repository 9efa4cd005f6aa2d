#include "knowra/model.hpp"

#include <cmath>

namespace knowra::model {

using ad::Var;

std::unique_ptr<PreparedDocument> prepare_document(const corpus::Document& doc,
                                                   const corpus::SubwordMapper& mapper,
                                                   std::size_t max_len, knowledge::KBClient* kb,
                                                   coref::CorefProvider* coref_provider,
                                                   Counters* counters) {
  auto pd = std::make_unique<PreparedDocument>();
  pd->doc = &doc;
  pd->tdoc = corpus::tokenize_with_markers(doc, mapper, max_len);
  pd->mhdg = docgraph::build_mhdg(doc);
  if (kb) {
    pd->kmhdg = knowledge::augment_graph(pd->mhdg, doc, *kb);
  } else {
    pd->kmhdg.base = &pd->mhdg;
  }
  pd->kra_labels = knowledge::filtration_labels(pd->kmhdg, doc);
  if (coref_provider) {
    for (std::size_t e = 0; e < doc.entities.size(); ++e) {
      coref::CorefSet cset = coref::resolve(*coref_provider, pd->tdoc, doc, e, counters);
      for (std::size_t k = 0; k < cset.pronouns.size(); ++k) {
        pd->tdoc.coref_positions[{e, k}] = cset.pronouns[k].span;
      }
      pd->csets.push_back(std::move(cset));
    }
  }
  return pd;
}

Model::Model(ModelConfig cfg, std::uint64_t seed, const corpus::RelationVocab& vocab,
             std::size_t token_vocab_size, const std::vector<std::string>& kb_relation_ids)
    : cfg_(std::move(cfg)), vocab_(vocab), token_vocab_size_(token_vocab_size) {
  cfg_.enc.validate();
  const std::size_t d = cfg_.enc.hidden;

  backend_ = encoder::make_backend(cfg_.enc, seed, token_vocab_size_, params_,
                                   cfg_.pretrained_dump);

  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  params_.add("gat/W_alpha", init_normal(rng, {2 * d}, 0.02));
  params_.add("gat/W_beta1", init_xavier(rng, d, d));
  params_.add("gat/W_beta2", init_xavier(rng, d, d));
  params_.add("gat/W_beta", init_xavier(rng, d, d));
  params_.add("know/proj", init_xavier(rng, d, 2 * d));
  rel_table_ = knowledge::RelationEmbeddingTable(kb_relation_ids, params_, rng, d);
  params_.add("pair/W_head", init_xavier(rng, d, d));
  params_.add("pair/W_tail", init_xavier(rng, d, d));
  params_.add("pair/W_ctx", init_xavier(rng, d, d));
  const std::size_t s = cfg_.effective_group();
  if (d % s != 0) throw ConfigError("bilinear group size must divide hidden size");
  params_.add("pair/W_bilinear", init_xavier(rng, d, d * s));
  params_.add("pair/bias", Tensor::zeros({d}));
  params_.add("axial/W_q", init_xavier(rng, d, d));
  params_.add("axial/W_k", init_xavier(rng, d, d));
  params_.add("axial/W_v", init_xavier(rng, d, d));
  params_.add("cls/W", init_normal(rng, {vocab_.num_classes(), d}, 0.02));
  params_.add("cls/b", Tensor::zeros({vocab_.num_classes()}));
}

ForwardResult Model::forward(ad::Graph& g, const PreparedDocument& pd, double lambda,
                             bool training) {
  const corpus::Document& doc = *pd.doc;
  const std::size_t n_entities = doc.entities.size();
  auto bind = [&](const std::string& name) {
    return training ? params_.bind(g, name) : params_.bind_const(g, name);
  };

  encoder::EncodedGraph enc = backend_->encode_graph(g, pd.tdoc, training);

  // Node embeddings over the document graph, optionally refined by graph
  // attention.
  docgraph::NodeEmbeddings nodes = docgraph::init_node_embeddings(pd.mhdg, enc, pd.tdoc);
  if (cfg_.use_graph) {
    docgraph::GATParams gat;
    gat.W_alpha = bind("gat/W_alpha");
    gat.W_beta1 = bind("gat/W_beta1");
    gat.W_beta2 = bind("gat/W_beta2");
    gat.W_beta = bind("gat/W_beta");
    gat.leaky_slope = cfg_.leaky_slope;
    gat.num_layers = cfg_.gat_layers;
    gat.self_loops = cfg_.self_loops;
    nodes = docgraph::gat_propagate(pd.mhdg, nodes, gat);
  }

  // Coreference pronoun embeddings from the raw attention and token
  // embeddings (pronouns are token spans, not graph nodes).
  std::map<std::pair<std::size_t, std::size_t>, Var> pron;
  if (cfg_.use_coref && !pd.csets.empty()) {
    pron = coref::pronoun_embeddings(enc, pd.tdoc, pd.csets);
  }

  // Entity embeddings: pooled mentions and pronouns, projected back to d.
  Var proj = bind("know/proj");
  std::vector<Var> h_entity(n_entities);
  for (std::size_t e = 0; e < n_entities; ++e) {
    std::vector<Var> mention_vecs;
    for (std::size_t node_id : pd.mhdg.mention_nodes[e]) {
      mention_vecs.push_back(nodes.vectors[node_id]);
    }
    std::vector<Var> pronoun_vecs;
    for (const auto& [key, v] : pron) {
      if (key.first == e) pronoun_vecs.push_back(v);
    }
    h_entity[e] = knowledge::entity_embedding(mention_vecs, pronoun_vecs, proj);
  }

  // Knowledge scoring and fusion.
  ForwardResult result;
  std::vector<Var> taus_for_loss;
  std::vector<Var> h_final(n_entities);
  const bool knowledge_on = cfg_.use_knowledge && !pd.kmhdg.knowledge_edges.empty();
  if (knowledge_on) {
    std::vector<std::vector<knowledge::ScoredEdge>> outgoing(n_entities);
    for (const knowledge::KnowledgeEdge& edge : pd.kmhdg.knowledge_edges) {
      Var r = rel_table_.bind(g, edge.relation, training, params_);
      Var tau = knowledge::confidence_score(h_entity[edge.head], h_entity[edge.tail], r);
      result.taus.push_back(tau.val()(0));
      if (cfg_.kra_full_backprop) {
        taus_for_loss.push_back(tau);
      } else {
        taus_for_loss.push_back(knowledge::confidence_score(
            ad::detach(h_entity[edge.head]), ad::detach(h_entity[edge.tail]), r));
      }
      outgoing[edge.head].push_back({edge.tail, r, tau});
    }
    for (std::size_t e = 0; e < n_entities; ++e) {
      Var fused = knowledge::knowledge_fuse_entity(h_entity[e], outgoing[e], h_entity,
                                                   /*accept_all=*/!cfg_.use_filtration);
      h_final[e] = ad::add(h_entity[e], fused);
    }
  } else {
    for (std::size_t e = 0; e < n_entities; ++e) {
      h_final[e] = ad::add(h_entity[e], h_entity[e]);
    }
  }

  // Entity token-attention profiles for context pooling.
  std::vector<Var> profiles(n_entities);
  for (std::size_t e = 0; e < n_entities; ++e) {
    profiles[e] = coref::entity_attention_profile(enc, pd.tdoc, e);
  }

  // Pair matrix.
  reasoner::PairFusionParams pfp;
  pfp.W_head = bind("pair/W_head");
  pfp.W_tail = bind("pair/W_tail");
  pfp.W_ctx = bind("pair/W_ctx");
  pfp.W_bilinear = bind("pair/W_bilinear");
  pfp.bias = bind("pair/bias");
  pfp.group_size = cfg_.effective_group();

  reasoner::PairTensor z;
  z.n = n_entities;
  z.cells.resize(n_entities * n_entities);
  for (std::size_t i = 0; i < n_entities; ++i) {
    for (std::size_t j = 0; j < n_entities; ++j) {
      Var ctx = reasoner::pair_context(profiles[i], profiles[j], enc.H, &counters_);
      z.cells[i * n_entities + j] = reasoner::fuse_pair(h_final[i], h_final[j], ctx, pfp);
    }
  }

  reasoner::PairTensor reasoned;
  if (cfg_.use_axial) {
    reasoner::AxialParams ap;
    ap.W_q = bind("axial/W_q");
    ap.W_k = bind("axial/W_k");
    ap.W_v = bind("axial/W_v");
    ap.scale_scores = cfg_.axial_scale;
    reasoned = reasoner::axial_attention(z, ap);
  } else {
    reasoned = z;
  }

  objective::ClassifierParams cp{bind("cls/W"), bind("cls/b")};
  result.logits = objective::logits(reasoned, cp);

  objective::GoldSet gold;
  for (const corpus::RelationFact& f : doc.facts) {
    gold.insert({f.head, f.tail, vocab_.index_of(f.relation)});
  }
  result.loss_re = objective::atl_loss(g, result.logits, gold);
  result.loss_kra = knowledge::filtration_loss(g, taus_for_loss, pd.kra_labels);
  const bool kra_active = knowledge_on && cfg_.use_filtration;
  result.loss = objective::total_loss(result.loss_re, result.loss_kra,
                                      kra_active ? lambda : 0.0);
  return result;
}

std::vector<objective::Prediction> Model::predict(const PreparedDocument& pd) {
  ad::Graph g;
  ForwardResult r = forward(g, pd, 0.0, /*training=*/false);
  return objective::decode(r.logits);
}

}  // namespace knowra::model
