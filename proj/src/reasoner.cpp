#include "knowra/reasoner.hpp"

#include <cmath>

namespace knowra::reasoner {

using ad::Var;

Var pair_context(Var profile_head, Var profile_tail, Var H, Counters* counters) {
  const std::size_t L = H.val().rows();
  if (profile_head.val().size() != L || profile_tail.val().size() != L) {
    throw InternalError("pair_context: profile length mismatch");
  }
  Var joint = ad::mul(profile_head, profile_tail);
  const Var overlap = ad::dot(profile_head, profile_tail);
  if (overlap.val()(0) <= 1e-12) {
    if (counters) ++counters->context_degeneracies;
    Tensor uniform = Tensor::zeros({L});
    for (double& x : uniform.data) x = 1.0 / static_cast<double>(L);
    return ad::matvec_t(H, H.g->constant(uniform));
  }
  return ad::vdiv(ad::matvec_t(H, joint), overlap);
}

Var fuse_pair(Var h_head, Var h_tail, Var context, const PairFusionParams& p) {
  const std::size_t d = h_head.val().size();
  if (d % p.group_size != 0) throw ConfigError("fuse_pair: group size must divide hidden size");
  Var ctx_proj = ad::matvec(p.W_ctx, context);
  Var z_head = ad::tanh(ad::add(ad::matvec(p.W_head, h_head), ctx_proj));
  Var z_tail = ad::tanh(ad::add(ad::matvec(p.W_tail, h_tail), ctx_proj));

  // Per-group outer products, stacked and mapped linearly: equivalent to a
  // block-diagonal bilinear form per output coordinate.
  const std::size_t groups = d / p.group_size;
  std::vector<Var> blocks;
  blocks.reserve(groups);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    Var a = ad::slice(z_head, gi * p.group_size, p.group_size);
    Var b = ad::slice(z_tail, gi * p.group_size, p.group_size);
    blocks.push_back(ad::flatten(ad::outer(a, b)));
  }
  Var stacked = blocks.size() == 1 ? blocks[0] : [&] {
    Var acc = blocks[0];
    for (std::size_t i = 1; i < blocks.size(); ++i) acc = ad::concat(acc, blocks[i]);
    return acc;
  }();
  return ad::add(ad::matvec(p.W_bilinear, stacked), p.bias);
}

PairTensor axial_attention(const PairTensor& z, const AxialParams& p) {
  const std::size_t n = z.n;
  if (n == 0) throw InternalError("axial_attention: empty pair matrix");
  const std::size_t d = z.cells[0].val().size();
  const double scale = p.scale_scores ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;

  std::vector<Var> q(n * n), k(n * n), v(n * n);
  for (std::size_t c = 0; c < n * n; ++c) {
    q[c] = ad::matvec(p.W_q, z.cells[c]);
    k[c] = ad::matvec(p.W_k, z.cells[c]);
    v[c] = ad::matvec(p.W_v, z.cells[c]);
  }

  auto attend = [&](std::size_t qi, std::size_t qj, bool horizontal) {
    std::vector<Var> scores;
    scores.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t cell = horizontal ? qi * n + m : m * n + qj;
      scores.push_back(ad::smul(ad::dot(q[qi * n + qj], k[cell]), scale));
    }
    Var weights = ad::softmax(ad::stack_scalars(scores));
    std::vector<Var> pooled;
    pooled.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t cell = horizontal ? qi * n + m : m * n + qj;
      pooled.push_back(ad::mulvs(v[cell], ad::at(weights, m)));
    }
    return ad::add_n(pooled);
  };

  PairTensor out;
  out.n = n;
  out.cells.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Var hor = ad::add(z.at(i, j), attend(i, j, true));
      Var vert = ad::add(z.at(i, j), attend(i, j, false));
      out.at(i, j) = ad::add(hor, vert);
    }
  }
  return out;
}

}  // namespace knowra::reasoner
