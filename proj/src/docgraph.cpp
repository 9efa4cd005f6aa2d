#include "knowra/docgraph.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace knowra::docgraph {

using ad::Var;
using nlohmann::json;

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Mention: return "MENTION";
    case NodeKind::Sentence: return "SENTENCE";
    case NodeKind::Document: return "DOCUMENT";
  }
  return "?";
}

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::DS: return "DS";
    case EdgeKind::SS: return "SS";
    case EdgeKind::MS: return "MS";
    case EdgeKind::CoMME: return "CO_MME";
    case EdgeKind::CrMME: return "CR_MME";
  }
  return "?";
}

std::size_t MHDG::count(EdgeKind k) const {
  std::size_t n = 0;
  for (const Edge& e : edges) {
    if (e.kind == k) ++n;
  }
  return n;
}

MHDG build_mhdg(const corpus::Document& doc) {
  MHDG g;
  g.document_node = 0;
  g.nodes.push_back({NodeKind::Document, 0, 0, 0});
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    g.sentence_nodes.push_back(g.nodes.size());
    g.nodes.push_back({NodeKind::Sentence, 0, 0, s});
  }
  g.mention_nodes.resize(doc.entities.size());
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    for (std::size_t m = 0; m < doc.entities[e].mentions.size(); ++m) {
      g.mention_nodes[e].push_back(g.nodes.size());
      g.nodes.push_back({NodeKind::Mention, e, m, doc.entities[e].mentions[m].sent_id});
    }
  }

  auto add_edge = [&](EdgeKind k, std::size_t a, std::size_t b) {
    g.edges.push_back({k, a, b});
  };

  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    add_edge(EdgeKind::DS, g.document_node, g.sentence_nodes[s]);
    if (s + 1 < doc.sentences.size()) {
      add_edge(EdgeKind::SS, g.sentence_nodes[s], g.sentence_nodes[s + 1]);
    }
  }
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    for (std::size_t m = 0; m < doc.entities[e].mentions.size(); ++m) {
      add_edge(EdgeKind::MS, g.mention_nodes[e][m],
               g.sentence_nodes[doc.entities[e].mentions[m].sent_id]);
    }
  }
  // Mention-mention edges: same entity (coreference) or different entities
  // sharing a sentence (co-occurrence).
  std::vector<std::pair<std::size_t, std::size_t>> all_mentions;  // (entity, mention)
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    for (std::size_t m = 0; m < doc.entities[e].mentions.size(); ++m) {
      all_mentions.emplace_back(e, m);
    }
  }
  for (std::size_t i = 0; i < all_mentions.size(); ++i) {
    for (std::size_t j = i + 1; j < all_mentions.size(); ++j) {
      const auto [ei, mi] = all_mentions[i];
      const auto [ej, mj] = all_mentions[j];
      const std::size_t ni = g.mention_nodes[ei][mi];
      const std::size_t nj = g.mention_nodes[ej][mj];
      if (ei == ej) {
        add_edge(EdgeKind::CrMME, ni, nj);
      } else if (doc.entities[ei].mentions[mi].sent_id == doc.entities[ej].mentions[mj].sent_id) {
        add_edge(EdgeKind::CoMME, ni, nj);
      }
    }
  }

  g.adjacency.assign(g.nodes.size(), {});
  for (const Edge& e : g.edges) {
    g.adjacency[e.a].push_back(e.b);
    g.adjacency[e.b].push_back(e.a);
  }
  for (auto& nbrs : g.adjacency) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return g;
}

NodeEmbeddings init_node_embeddings(const MHDG& graph, const encoder::EncodedGraph& enc,
                                    const corpus::TokenizedDocument& tdoc) {
  NodeEmbeddings out;
  out.vectors.resize(graph.nodes.size());
  const std::size_t L = enc.H.val().rows();

  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const Node& node = graph.nodes[n];
    switch (node.kind) {
      case NodeKind::Document:
        out.vectors[n] = enc.cls;
        break;
      case NodeKind::Sentence: {
        const corpus::Span span = tdoc.sentence_spans.at(node.sent_id);
        if (span.start >= span.end || span.end > L) {
          throw InternalError("sentence span out of encoded range");
        }
        std::vector<Var> rows;
        for (std::size_t t = span.start; t < span.end; ++t) rows.push_back(ad::row(enc.H, t));
        out.vectors[n] = ad::colwise_logsumexp(ad::stack_rows(rows));
        break;
      }
      case NodeKind::Mention: {
        auto it = tdoc.marker_positions.find({node.entity, node.mention});
        if (it == tdoc.marker_positions.end()) {
          throw InternalError("marker position missing for entity " + std::to_string(node.entity) +
                              " mention " + std::to_string(node.mention));
        }
        if (it->second >= L) throw InternalError("marker position out of encoded range");
        out.vectors[n] = ad::row(enc.H, it->second);
        break;
      }
    }
  }
  return out;
}

NodeEmbeddings gat_propagate(const MHDG& graph, const NodeEmbeddings& emb, const GATParams& params) {
  NodeEmbeddings cur = emb;
  for (std::size_t layer = 0; layer < params.num_layers; ++layer) {
    // Transform once per node, reuse across every incident edge.
    std::vector<Var> proj1(graph.nodes.size()), proj2(graph.nodes.size()), projb(graph.nodes.size());
    for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
      proj1[n] = ad::matvec(params.W_beta1, cur.vectors[n]);
      proj2[n] = ad::matvec(params.W_beta2, cur.vectors[n]);
      projb[n] = ad::matvec(params.W_beta, cur.vectors[n]);
    }
    NodeEmbeddings next;
    next.vectors.resize(graph.nodes.size());
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      std::vector<std::size_t> nbrs = graph.adjacency[i];
      if (params.self_loops) nbrs.push_back(i);
      if (nbrs.empty()) {
        throw ValidationError("graph attention over an isolated node (node " + std::to_string(i) +
                              ") with self loops disabled");
      }
      std::vector<Var> scores;
      scores.reserve(nbrs.size());
      for (std::size_t j : nbrs) {
        Var cat = ad::concat(proj1[i], proj2[j]);
        scores.push_back(ad::leaky_relu(ad::dot(params.W_alpha, cat), params.leaky_slope));
      }
      Var weights = ad::softmax(ad::stack_scalars(scores));
      std::vector<Var> weighted;
      weighted.reserve(nbrs.size());
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        weighted.push_back(ad::mulvs(projb[nbrs[k]], ad::at(weights, k)));
      }
      next.vectors[i] = ad::add_n(weighted);
    }
    cur = std::move(next);
  }
  return cur;
}

std::string to_json(const MHDG& graph, const corpus::Document& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  json nodes = json::array();
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const Node& node = graph.nodes[n];
    json rec;
    rec["id"] = n;
    rec["kind"] = to_string(node.kind);
    if (node.kind == NodeKind::Mention) {
      rec["entity"] = node.entity;
      rec["mention"] = node.mention;
      rec["sent_id"] = node.sent_id;
      rec["surface"] = doc.entities[node.entity].mentions[node.mention].surface;
    } else if (node.kind == NodeKind::Sentence) {
      rec["sent_id"] = node.sent_id;
    }
    nodes.push_back(std::move(rec));
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const Edge& e : graph.edges) {
    edges.push_back({{"kind", to_string(e.kind)}, {"a", e.a}, {"b", e.b}});
  }
  j["edges"] = std::move(edges);
  return j.dump(2);
}

}  // namespace knowra::docgraph
