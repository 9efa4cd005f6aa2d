#include "knowra/params.hpp"

#include <cmath>

#include "knowra/common.hpp"

namespace knowra {

std::size_t ParamStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) throw InternalError("duplicate parameter: " + name);
  Entry e;
  e.name = name;
  e.grad = Tensor::zeros(value.shape);
  e.adam_m = Tensor::zeros(value.shape);
  e.adam_v = Tensor::zeros(value.shape);
  e.value = std::move(value);
  entries_.push_back(std::move(e));
  index_[name] = entries_.size() - 1;
  return entries_.size() - 1;
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter: " + name);
  return entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter: " + name);
  return entries_[it->second];
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (Entry& e : entries_) {
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }
  bindings_.clear();
}

ad::Var ParamStore::bind(ad::Graph& g, const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter: " + name);
  ad::Var v = g.input(entries_[it->second].value, true);
  bindings_.emplace_back(it->second, v);
  return v;
}

ad::Var ParamStore::bind_const(ad::Graph& g, const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InternalError("unknown parameter: " + name);
  return g.input(entries_[it->second].value, false);
}

void ParamStore::flush_grads() {
  for (auto& [idx, var] : bindings_) {
    if (!var.g->has_grad(var.id)) continue;
    const Tensor& dg = var.g->grad_ref(var.id);
    Tensor& acc = entries_[idx].grad;
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += dg.data[i];
  }
  bindings_.clear();
}

Tensor init_normal(Rng& rng, std::vector<std::size_t> shape, double stddev) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& x : t.data) x = rng.normal(0.0, stddev);
  return t;
}

Tensor init_xavier(Rng& rng, std::size_t fan_out, std::size_t fan_in) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::zeros({fan_out, fan_in});
  for (double& x : t.data) x = rng.uniform(-bound, bound);
  return t;
}

double AdamOptimizer::current_lr() const {
  if (opt_.total_steps == 0) return opt_.lr;
  const double warmup = std::max(1.0, opt_.warmup_fraction * static_cast<double>(opt_.total_steps));
  const double step = static_cast<double>(t_ + 1);
  if (step <= warmup) return opt_.lr * step / warmup;
  const double total = static_cast<double>(opt_.total_steps);
  const double frac = (total - step) / std::max(1.0, total - warmup);
  return opt_.lr * std::max(0.0, frac);
}

void AdamOptimizer::step(ParamStore& params) {
  const double lr = current_lr();
  ++t_;

  if (opt_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& e : params.entries()) {
      for (double gv : e.grad.data) sq += gv * gv;
    }
    const double norm = std::sqrt(sq);
    if (norm > opt_.clip_norm) {
      const double scale = opt_.clip_norm / norm;
      for (auto& e : params.entries()) {
        for (double& gv : e.grad.data) gv *= scale;
      }
    }
  }

  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (auto& e : params.entries()) {
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double gv = e.grad.data[i];
      e.adam_m.data[i] = opt_.beta1 * e.adam_m.data[i] + (1.0 - opt_.beta1) * gv;
      e.adam_v.data[i] = opt_.beta2 * e.adam_v.data[i] + (1.0 - opt_.beta2) * gv * gv;
      const double mhat = e.adam_m.data[i] / bc1;
      const double vhat = e.adam_v.data[i] / bc2;
      e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + opt_.eps);
    }
  }
}

}  // namespace knowra
