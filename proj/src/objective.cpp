#include "knowra/objective.hpp"

namespace knowra::objective {

using ad::Var;

PairLogits logits(const reasoner::PairTensor& g, const ClassifierParams& p) {
  PairLogits out;
  out.n = g.n;
  out.num_classes = p.W.val().rows();
  out.cells.reserve(g.cells.size());
  for (const Var& cell : g.cells) {
    out.cells.push_back(ad::add(ad::matvec(p.W, cell), p.b));
  }
  return out;
}

Var atl_loss(ad::Graph& g, const PairLogits& logits, const GoldSet& gold) {
  const std::size_t n = logits.n;
  const std::size_t classes = logits.num_classes;
  std::vector<Var> terms;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<std::size_t> positives;
      for (std::size_t r = 1; r < classes; ++r) {
        if (gold.count({i, j, r})) positives.push_back(r);
      }
      const Var& cell = logits.at(i, j);

      // Threshold against the negatives.
      std::vector<std::size_t> neg_and_th{kThresholdClass};
      for (std::size_t r = 1; r < classes; ++r) {
        if (!gold.count({i, j, r})) neg_and_th.push_back(r);
      }
      Var th_logit = ad::at(cell, kThresholdClass);
      terms.push_back(ad::sub(ad::logsumexp(ad::gather(cell, neg_and_th)), th_logit));

      // Each positive against the positives plus the threshold.
      if (!positives.empty()) {
        std::vector<std::size_t> pos_and_th{kThresholdClass};
        pos_and_th.insert(pos_and_th.end(), positives.begin(), positives.end());
        Var lse_pos = ad::logsumexp(ad::gather(cell, pos_and_th));
        for (std::size_t r : positives) {
          terms.push_back(ad::sub(lse_pos, ad::at(cell, r)));
        }
      }
    }
  }
  if (terms.empty()) return g.constant(Tensor::scalar(0.0));
  return ad::add_n(terms);
}

std::vector<Prediction> decode(const PairLogits& logits) {
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < logits.n; ++i) {
    for (std::size_t j = 0; j < logits.n; ++j) {
      if (i == j) continue;
      const Tensor& cell = logits.at(i, j).val();
      const double th = cell(kThresholdClass);
      for (std::size_t r = 1; r < logits.num_classes; ++r) {
        if (cell(r) > th) out.push_back({i, j, r, cell(r) - th});
      }
    }
  }
  return out;
}

double total_loss(double loss_re, double loss_kra, double lambda) {
  if (lambda < 0.0) throw ConfigError("total_loss: lambda must be non-negative");
  return loss_re + lambda * loss_kra;
}

Var total_loss(Var loss_re, Var loss_kra, double lambda) {
  if (lambda < 0.0) throw ConfigError("total_loss: lambda must be non-negative");
  if (lambda == 0.0) return loss_re;
  return ad::add(loss_re, ad::smul(loss_kra, lambda));
}

}  // namespace knowra::objective
