#ifndef KNOWRA_TESTS_ORACLES_HPP
#define KNOWRA_TESTS_ORACLES_HPP

#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "knowra/corpus.hpp"
#include "knowra/docgraph.hpp"

namespace knowra::testsupport {

// (kind, low node id, high node id)
using EdgeKey = std::tuple<std::string, std::size_t, std::size_t>;

inline EdgeKey edge_key(const std::string& kind, std::size_t a, std::size_t b) {
  return {kind, std::min(a, b), std::max(a, b)};
}

// Brute-force edge enumeration straight from the edge-family definitions,
// over every node pair of the graph's node list.
inline std::set<EdgeKey> edge_oracle(const docgraph::MHDG& g, const corpus::Document& doc) {
  std::set<EdgeKey> expected;
  const auto& nodes = g.nodes;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const auto& na = nodes[a];
      const auto& nb = nodes[b];
      using docgraph::NodeKind;
      auto is = [&](NodeKind x, NodeKind y) {
        return (na.kind == x && nb.kind == y) || (na.kind == y && nb.kind == x);
      };
      if (is(NodeKind::Document, NodeKind::Sentence)) {
        expected.insert(edge_key("DS", a, b));
      } else if (na.kind == NodeKind::Sentence && nb.kind == NodeKind::Sentence) {
        const std::size_t d =
            na.sent_id > nb.sent_id ? na.sent_id - nb.sent_id : nb.sent_id - na.sent_id;
        if (d == 1) expected.insert(edge_key("SS", a, b));
      } else if (is(NodeKind::Mention, NodeKind::Sentence)) {
        const auto& mention = na.kind == NodeKind::Mention ? na : nb;
        const auto& sentence = na.kind == NodeKind::Mention ? nb : na;
        if (mention.sent_id == sentence.sent_id) expected.insert(edge_key("MS", a, b));
      } else if (na.kind == NodeKind::Mention && nb.kind == NodeKind::Mention) {
        if (na.entity == nb.entity) {
          expected.insert(edge_key("CR_MME", a, b));
        } else if (doc.entities[na.entity].mentions[na.mention].sent_id ==
                   doc.entities[nb.entity].mentions[nb.mention].sent_id) {
          expected.insert(edge_key("CO_MME", a, b));
        }
      }
    }
  }
  return expected;
}

inline std::set<EdgeKey> edge_set(const docgraph::MHDG& g) {
  std::set<EdgeKey> out;
  for (const auto& e : g.edges) out.insert(edge_key(docgraph::to_string(e.kind), e.a, e.b));
  return out;
}

// Plain-vector graph attention transcription: per layer, edge scores from
// leaky-relu of W_alpha . [W_b1 h_i ++ W_b2 h_j], softmax over the
// neighborhood, then the weighted sum of W_b h_j.
struct GatOracleParams {
  std::vector<double> w_alpha;                 // 2d
  std::vector<std::vector<double>> w_b1, w_b2, w_b;  // d x d
  double slope = 0.2;
  std::size_t layers = 1;
  bool self_loops = false;
};

inline std::vector<double> mat_apply(const std::vector<std::vector<double>>& M,
                                     const std::vector<double>& x) {
  std::vector<double> y(M.size(), 0.0);
  for (std::size_t i = 0; i < M.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += M[i][j] * x[j];
  }
  return y;
}

inline std::vector<std::vector<double>> gat_oracle(
    const std::vector<std::vector<std::size_t>>& adjacency,
    std::vector<std::vector<double>> h, const GatOracleParams& p) {
  const std::size_t d = h[0].size();
  for (std::size_t layer = 0; layer < p.layers; ++layer) {
    std::vector<std::vector<double>> next(h.size(), std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < h.size(); ++i) {
      std::vector<std::size_t> nbrs = adjacency[i];
      if (p.self_loops) nbrs.push_back(i);
      std::vector<double> scores;
      for (std::size_t j : nbrs) {
        const auto pi = mat_apply(p.w_b1, h[i]);
        const auto pj = mat_apply(p.w_b2, h[j]);
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += p.w_alpha[k] * pi[k];
        for (std::size_t k = 0; k < d; ++k) s += p.w_alpha[d + k] * pj[k];
        scores.push_back(s > 0 ? s : p.slope * s);
      }
      double mx = scores[0];
      for (double s : scores) mx = std::max(mx, s);
      double z = 0.0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        z += s;
      }
      for (double& s : scores) s /= z;
      for (std::size_t n = 0; n < nbrs.size(); ++n) {
        const auto pj = mat_apply(p.w_b, h[nbrs[n]]);
        for (std::size_t k = 0; k < d; ++k) next[i][k] += scores[n] * pj[k];
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace knowra::testsupport

#endif  // KNOWRA_TESTS_ORACLES_HPP
