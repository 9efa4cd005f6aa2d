#ifndef KNOWRA_OBJECTIVE_HPP
#define KNOWRA_OBJECTIVE_HPP

#include <set>
#include <tuple>
#include <vector>

#include "knowra/ad.hpp"
#include "knowra/reasoner.hpp"

namespace knowra::objective {

// Classifier over R relation classes plus the learned threshold class at
// index 0.
struct ClassifierParams {
  ad::Var W;  // (R+1) x d
  ad::Var b;  // R+1
};

constexpr std::size_t kThresholdClass = 0;

// One (R+1)-logit vector per pair, row-major like the pair tensor. The
// diagonal is still computed (cheap) but masked from loss and decoding.
struct PairLogits {
  std::size_t n = 0;
  std::size_t num_classes = 0;
  std::vector<ad::Var> cells;

  const ad::Var& at(std::size_t i, std::size_t j) const { return cells[i * n + j]; }
};

PairLogits logits(const reasoner::PairTensor& g, const ClassifierParams& p);

using GoldSet = std::set<std::tuple<std::size_t, std::size_t, std::size_t>>;  // (i, j, class)

// Adaptive-threshold loss: per ordered pair, the threshold class is pushed
// above every negative class and each positive class above the threshold,
// via two grouped log-softmax terms, summed over off-diagonal pairs.
ad::Var atl_loss(ad::Graph& g, const PairLogits& logits, const GoldSet& gold);

struct Prediction {
  std::size_t head;
  std::size_t tail;
  std::size_t relation;  // class index in [1, R]
  double score;          // logit margin over the threshold class
};

// Predicts class r for pair (i, j) iff its logit strictly exceeds the
// threshold logit.
std::vector<Prediction> decode(const PairLogits& logits);

double total_loss(double loss_re, double loss_kra, double lambda);
ad::Var total_loss(ad::Var loss_re, ad::Var loss_kra, double lambda);

}  // namespace knowra::objective

#endif  // KNOWRA_OBJECTIVE_HPP
