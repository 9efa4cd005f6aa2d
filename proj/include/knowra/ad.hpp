#ifndef KNOWRA_AD_HPP
#define KNOWRA_AD_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "knowra/tensor.hpp"

namespace knowra::ad {

class Graph;

// Lightweight handle to a node in a Graph. Valid until Graph::clear().
struct Var {
  Graph* g = nullptr;
  int id = -1;

  bool defined() const { return g != nullptr; }
  const Tensor& val() const;
  const Tensor& grad() const;
};

// Define-by-run reverse-mode tape. Nodes are created in topological order,
// so a single reverse sweep over creation order backpropagates correctly.
// A fresh graph is built per document per step; clear() recycles storage.
class Graph {
 public:
  Var constant(Tensor t) { return make(std::move(t), false); }
  Var input(Tensor t, bool needs_grad = true) { return make(std::move(t), needs_grad); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape. loss must be scalar.
  void backward(Var loss);

  void clear() { nodes_.clear(); }
  std::size_t num_nodes() const { return nodes_.size(); }

  const Tensor& val(int id) const { return nodes_[id].val; }
  Tensor& grad_ref(int id);
  bool has_grad(int id) const { return !nodes_[id].grad.data.empty(); }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  Var make(Tensor t, bool needs_grad, std::function<void()> back = nullptr);

 private:
  struct Node {
    Tensor val;
    Tensor grad;  // empty until first accumulation
    bool needs_grad = false;
    std::function<void()> back;
  };
  std::vector<Node> nodes_;
};

// --- elementwise ------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var smul(Var a, double c);
Var sadd(Var a, double c);
Var mul_cvec(Var a, const Tensor& c);  // elementwise by a constant tensor
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var leaky_relu(Var a, double slope);

// --- scalar-node arithmetic ------------------------------------------
Var vdiv(Var a, Var s);   // tensor / scalar node
Var mulvs(Var a, Var s);  // tensor * scalar node

// --- linear algebra ---------------------------------------------------
Var matmul(Var a, Var b);     // [m,k] x [k,n]
Var matmul_nt(Var a, Var b);  // a * b^T, b is [n,k]
Var matvec(Var a, Var x);     // [m,k] x [k]
Var matvec_t(Var a, Var x);   // a^T x, a is [m,k], x is [m]
Var dot(Var a, Var b);
Var outer(Var a, Var b);  // [m] x [n] -> [m,n]

// --- shape / selection -------------------------------------------------
Var concat(Var a, Var b);
Var slice(Var a, std::size_t off, std::size_t len);
Var pad(Var a, std::size_t total, std::size_t off);  // embed vector in zeros
Var row(Var a, std::size_t i);
Var at(Var a, std::size_t i);  // scalar element
Var gather(Var a, std::vector<std::size_t> idx);
Var flatten(Var a);
Var stack_rows(const std::vector<Var>& rows);
Var stack_scalars(const std::vector<Var>& xs);  // scalars -> vector
Var hconcat(const std::vector<Var>& mats);  // concat matrices along columns
Var add_n(const std::vector<Var>& xs);
Var detach(Var a);

// --- reductions / normalization ----------------------------------------
Var sum(Var a);
Var mean(Var a);
Var colwise_sum(Var a);
Var colwise_logsumexp(Var a);
Var logsumexp(Var a);  // over a vector, scalar result
Var softmax(Var a);    // over a vector
Var rowwise_softmax(Var a);

}  // namespace knowra::ad

#endif  // KNOWRA_AD_HPP
