#ifndef KNOWRA_DOCGRAPH_HPP
#define KNOWRA_DOCGRAPH_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "knowra/ad.hpp"
#include "knowra/corpus.hpp"
#include "knowra/encoder.hpp"

namespace knowra::docgraph {

enum class NodeKind { Mention, Sentence, Document };
enum class EdgeKind { DS, SS, MS, CoMME, CrMME };

const char* to_string(NodeKind k);
const char* to_string(EdgeKind k);

struct Node {
  NodeKind kind;
  // back-references into the Document: mention nodes carry (entity, mention),
  // sentence nodes carry sent_id.
  std::size_t entity = 0;
  std::size_t mention = 0;
  std::size_t sent_id = 0;
};

struct Edge {
  EdgeKind kind;
  std::size_t a = 0;  // node ids; stored once, adjacency is symmetric
  std::size_t b = 0;
};

// Multi-level heterogeneous document graph: one document node, one node per
// sentence, one node per mention; edges connect document-sentence, adjacent
// sentences, mention-sentence, co-occurring mentions of different entities
// and co-referring mentions of the same entity.
struct MHDG {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t document_node = 0;
  std::vector<std::size_t> sentence_nodes;                  // sent_id -> node id
  std::vector<std::vector<std::size_t>> mention_nodes;      // entity -> mention idx -> node id

  std::size_t count(EdgeKind k) const;
};

MHDG build_mhdg(const corpus::Document& doc);

// Per-node embedding columns, keyed by node id.
struct NodeEmbeddings {
  std::vector<ad::Var> vectors;  // one d-vector per node
};

// Document node takes the classifier-token embedding, mention nodes the
// embedding at their marker position, sentence nodes an elementwise
// log-sum-exp over their token embeddings.
NodeEmbeddings init_node_embeddings(const MHDG& graph, const encoder::EncodedGraph& enc,
                                    const corpus::TokenizedDocument& tdoc);

struct GATParams {
  ad::Var W_alpha;   // 2d
  ad::Var W_beta1;   // d x d
  ad::Var W_beta2;   // d x d
  ad::Var W_beta;    // d x d
  double leaky_slope = 0.2;
  std::size_t num_layers = 2;
  bool self_loops = true;
};

// Graph-attention propagation: per layer, edge scores from a leaky-ReLU of
// a learned concatenation, softmax-normalized over each neighborhood,
// aggregating linearly transformed neighbor states.
NodeEmbeddings gat_propagate(const MHDG& graph, const NodeEmbeddings& emb, const GATParams& params);

// JSON export of the graph structure (nodes with kind and back-references,
// edges with kind) for the inspection CLI.
std::string to_json(const MHDG& graph, const corpus::Document& doc);

}  // namespace knowra::docgraph

#endif  // KNOWRA_DOCGRAPH_HPP
