#ifndef KNOWRA_REASONER_HPP
#define KNOWRA_REASONER_HPP

#include <vector>

#include "knowra/ad.hpp"
#include "knowra/common.hpp"

namespace knowra::reasoner {

// N x N grid of entity-pair vectors. Diagonal cells participate in axial
// attention as intermediaries but are never classified.
struct PairTensor {
  std::size_t n = 0;
  std::vector<ad::Var> cells;  // row-major, n*n entries

  ad::Var& at(std::size_t i, std::size_t j) { return cells[i * n + j]; }
  const ad::Var& at(std::size_t i, std::size_t j) const { return cells[i * n + j]; }
};

struct PairFusionParams {
  ad::Var W_head;      // d x d
  ad::Var W_tail;      // d x d
  ad::Var W_ctx;       // d x d
  ad::Var W_bilinear;  // d x (d * group_size): maps stacked per-group outer
                       // products of the two fused vectors to a d-vector
  ad::Var bias;        // d
  std::size_t group_size = 64;
};

struct AxialParams {
  ad::Var W_q;  // d x d
  ad::Var W_k;  // d x d
  ad::Var W_v;  // d x d
  bool scale_scores = true;  // 1/sqrt(d) inside the softmax
};

// Context of common concern for a pair of token-attention profiles:
// weights = elementwise product of the profiles normalized by their inner
// product, pooled over token embeddings. A vanishing overlap falls back to
// the uniform context and bumps the degeneracy counter.
ad::Var pair_context(ad::Var profile_head, ad::Var profile_tail, ad::Var H, Counters* counters);

// tanh-gated fusion of entity embeddings with the pair context, combined by
// a grouped bilinear map into one d-vector per pair.
ad::Var fuse_pair(ad::Var h_head, ad::Var h_tail, ad::Var context, const PairFusionParams& p);

// Row plus column attention over the pair matrix: each cell attends over
// its row and its column with shared q/k/v projections; both axes add the
// cell's own vector back, so the result is 2*z plus the two attention
// pools.
PairTensor axial_attention(const PairTensor& z, const AxialParams& p);

}  // namespace knowra::reasoner

#endif  // KNOWRA_REASONER_HPP
