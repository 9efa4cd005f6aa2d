#ifndef KNOWRA_PARAMS_HPP
#define KNOWRA_PARAMS_HPP

#include <map>
#include <string>
#include <vector>

#include "knowra/ad.hpp"
#include "knowra/rng.hpp"
#include "knowra/tensor.hpp"

namespace knowra {

// Named trainable tensors plus their accumulated gradients and Adam state.
// Creation order is fixed by the model assembly code, which keeps
// initialization and optimizer sweeps deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
  };

  // Registers a tensor (error if the name exists). Returns its index.
  std::size_t add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;
  Tensor& value(const std::string& name) { return entry(name).value; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t total_size() const;

  void zero_grads();

  // Binds a parameter into a graph as a differentiable input and remembers
  // the pairing; flush_grads() copies graph gradients back into the store.
  ad::Var bind(ad::Graph& g, const std::string& name);
  // Inference binding: no gradient tracking, no pairing recorded.
  ad::Var bind_const(ad::Graph& g, const std::string& name);
  void flush_grads();

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::pair<std::size_t, ad::Var>> bindings_;
};

// Common initializers.
Tensor init_normal(Rng& rng, std::vector<std::size_t> shape, double stddev);
Tensor init_xavier(Rng& rng, std::size_t fan_out, std::size_t fan_in);

// Adam with linear warmup and linear decay to zero. Hyperparameters are
// fixed at construction; step() consumes accumulated gradients.
class AdamOptimizer {
 public:
  struct Options {
    double lr = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double warmup_fraction = 0.06;
    std::size_t total_steps = 0;  // 0 disables the schedule (constant lr)
    double clip_norm = 1.0;       // <= 0 disables clipping
  };

  explicit AdamOptimizer(Options opt) : opt_(opt) {}

  double current_lr() const;
  void step(ParamStore& params);
  std::size_t steps_taken() const { return t_; }

 private:
  Options opt_;
  std::size_t t_ = 0;
};

}  // namespace knowra

#endif  // KNOWRA_PARAMS_HPP
