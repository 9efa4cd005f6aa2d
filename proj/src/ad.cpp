#include "knowra/ad.hpp"

#include <algorithm>
#include <cmath>

namespace knowra::ad {

const Tensor& Var::val() const { return g->val(id); }
const Tensor& Var::grad() const { return g->grad_ref(id); }

Tensor& Graph::grad_ref(int id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty()) {
    n.grad.shape = n.val.shape;
    n.grad.data.assign(n.val.data.size(), 0.0);
  }
  return n.grad;
}

Var Graph::make(Tensor t, bool needs_grad, std::function<void()> back) {
  Node n;
  n.val = std::move(t);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var loss) {
  if (loss.val().size() != 1) throw InternalError("backward: loss must be scalar");
  grad_ref(loss.id)(0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || !n.back || n.grad.data.empty()) continue;
    n.back();
  }
}

namespace {

bool any_grad(std::initializer_list<Var> vs) {
  for (const Var& v : vs) {
    if (v.g->needs_grad(v.id)) return true;
  }
  return false;
}

bool any_grad(const std::vector<Var>& vs) {
  for (const Var& v : vs) {
    if (v.g->needs_grad(v.id)) return true;
  }
  return false;
}

// Accumulates into the gradient of `v` only if that input participates in
// differentiation; constants never allocate gradient storage.
struct Acc {
  Var v;
  Tensor* t = nullptr;
  explicit Acc(Var v_) : v(v_) {
    if (v.g->needs_grad(v.id)) t = &v.g->grad_ref(v.id);
  }
  void add(std::size_t i, double x) {
    if (t) t->data[i] += x;
  }
  bool active() const { return t != nullptr; }
};

}  // namespace

// Elementwise helper with closure installed at construction.
static Var unary(Var a, const std::function<double(double)>& f,
                 const std::function<double(double y, double x)>& df) {
  Graph& g = *a.g;
  Tensor out = a.val();
  for (double& x : out.data) x = f(x);
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, df]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& y = gp->val(rid);
      const Tensor& x = gp->val(aid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        dx.data[i] += dy.data[i] * df(y.data[i], x.data[i]);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var add(Var a, Var b) {
  Graph& g = *a.g;
  if (!a.val().same_shape(b.val())) throw InternalError("add: shape mismatch");
  Tensor out = a.val();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.val().data[i];
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        da.add(i, dy.data[i]);
        db.add(i, dy.data[i]);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var sub(Var a, Var b) {
  Graph& g = *a.g;
  if (!a.val().same_shape(b.val())) throw InternalError("sub: shape mismatch");
  Tensor out = a.val();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.val().data[i];
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        da.add(i, dy.data[i]);
        db.add(i, -dy.data[i]);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var mul(Var a, Var b) {
  Graph& g = *a.g;
  if (!a.val().same_shape(b.val())) throw InternalError("mul: shape mismatch");
  Tensor out = a.val();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.val().data[i];
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& av = gp->val(aid);
      const Tensor& bv = gp->val(bid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        da.add(i, dy.data[i] * bv.data[i]);
        db.add(i, dy.data[i] * av.data[i]);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var neg(Var a) { return smul(a, -1.0); }

Var smul(Var a, double c) {
  Graph& g = *a.g;
  Tensor out = a.val();
  for (double& x : out.data) x *= c;
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, c]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += c * dy.data[i];
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var sadd(Var a, double c) {
  Graph& g = *a.g;
  Tensor out = a.val();
  for (double& x : out.data) x += c;
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += dy.data[i];
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var mul_cvec(Var a, const Tensor& c) {
  Graph& g = *a.g;
  if (!a.val().same_shape(c)) throw InternalError("mul_cvec: shape mismatch");
  Tensor out = a.val();
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= c.data[i];
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    Tensor cc = c;
    back = [gp, aid, rid, cc]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += cc.data[i] * dy.data[i];
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); },
               [](double y, double) { return y; });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); },
               [](double, double x) { return 1.0 / x; });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double y, double) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(a,
               [](double x) {
                 if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [](double y, double) { return y * (1.0 - y); });
}

Var softplus(Var a) {
  return unary(a,
               [](double x) {
                 if (x > 30.0) return x;
                 if (x < -30.0) return std::exp(x);
                 return std::log1p(std::exp(x));
               },
               [](double, double x) {
                 if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               });
}

Var leaky_relu(Var a, double slope) {
  return unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double, double x) { return x > 0.0 ? 1.0 : slope; });
}

Var vdiv(Var a, Var s) {
  Graph& g = *a.g;
  if (s.val().size() != 1) throw InternalError("vdiv: divisor must be scalar");
  const double sv = s.val()(0);
  Tensor out = a.val();
  for (double& x : out.data) x /= sv;
  const bool ng = any_grad({a, s});
  Graph* gp = &g;
  const int aid = a.id, sid = s.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, sid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& av = gp->val(aid);
      const double sv2 = gp->val(sid)(0);
      Acc da(Var{gp, aid}), ds(Var{gp, sid});
      double acc = 0.0;
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        da.add(i, dy.data[i] / sv2);
        acc += dy.data[i] * av.data[i];
      }
      ds.add(0, -acc / (sv2 * sv2));
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var mulvs(Var a, Var s) {
  Graph& g = *a.g;
  if (s.val().size() != 1) throw InternalError("mulvs: factor must be scalar");
  const double sv = s.val()(0);
  Tensor out = a.val();
  for (double& x : out.data) x *= sv;
  const bool ng = any_grad({a, s});
  Graph* gp = &g;
  const int aid = a.id, sid = s.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, sid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& av = gp->val(aid);
      const double sv2 = gp->val(sid)(0);
      Acc da(Var{gp, aid}), ds(Var{gp, sid});
      double acc = 0.0;
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        da.add(i, dy.data[i] * sv2);
        acc += dy.data[i] * av.data[i];
      }
      ds.add(0, acc);
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var matmul(Var a, Var b) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[0]) {
    throw InternalError("matmul: shape mismatch");
  }
  const std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A(i, p);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += av * B(p, j);
    }
  }
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid, m, k, n]() {
      const Tensor& dY = gp->grad_ref(rid);
      const Tensor& A2 = gp->val(aid);
      const Tensor& B2 = gp->val(bid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      if (da.active()) {
        // dA = dY B^T
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += dY(i, j) * B2(p, j);
            da.add(i * k + p, s);
          }
      }
      if (db.active()) {
        // dB = A^T dY
        for (std::size_t p = 0; p < k; ++p)
          for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += A2(i, p) * dY(i, j);
            db.add(p * n + j, s);
          }
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var matmul_nt(Var a, Var b) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[1]) {
    throw InternalError("matmul_nt: shape mismatch");
  }
  const std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[0];
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += A(i, p) * B(j, p);
      out(i, j) = s;
    }
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid, m, k, n]() {
      const Tensor& dY = gp->grad_ref(rid);
      const Tensor& A2 = gp->val(aid);
      const Tensor& B2 = gp->val(bid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      if (da.active()) {
        // dA = dY B
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += dY(i, j) * B2(j, p);
            da.add(i * k + p, s);
          }
      }
      if (db.active()) {
        // dB = dY^T A
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += dY(i, j) * A2(i, p);
            db.add(j * k + p, s);
          }
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var matvec(Var a, Var x) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  const Tensor& X = x.val();
  if (A.rank() != 2 || X.rank() != 1 || A.shape[1] != X.shape[0]) {
    throw InternalError("matvec: shape mismatch");
  }
  const std::size_t m = A.shape[0], k = A.shape[1];
  Tensor out = Tensor::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += A(i, p) * X(p);
    out(i) = s;
  }
  const bool ng = any_grad({a, x});
  Graph* gp = &g;
  const int aid = a.id, xid = x.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, xid, rid, m, k]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& A2 = gp->val(aid);
      const Tensor& X2 = gp->val(xid);
      Acc da(Var{gp, aid}), dx(Var{gp, xid});
      for (std::size_t i = 0; i < m; ++i) {
        const double d = dy(i);
        if (d == 0.0) continue;
        for (std::size_t p = 0; p < k; ++p) {
          da.add(i * k + p, d * X2(p));
          dx.add(p, d * A2(i, p));
        }
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var matvec_t(Var a, Var x) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  const Tensor& X = x.val();
  if (A.rank() != 2 || X.rank() != 1 || A.shape[0] != X.shape[0]) {
    throw InternalError("matvec_t: shape mismatch");
  }
  const std::size_t m = A.shape[0], k = A.shape[1];
  Tensor out = Tensor::zeros({k});
  for (std::size_t i = 0; i < m; ++i) {
    const double xv = X(i);
    if (xv == 0.0) continue;
    for (std::size_t p = 0; p < k; ++p) out(p) += A(i, p) * xv;
  }
  const bool ng = any_grad({a, x});
  Graph* gp = &g;
  const int aid = a.id, xid = x.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, xid, rid, m, k]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& A2 = gp->val(aid);
      const Tensor& X2 = gp->val(xid);
      Acc da(Var{gp, aid}), dx(Var{gp, xid});
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
          da.add(i * k + p, X2(i) * dy(p));
          s += A2(i, p) * dy(p);
        }
        dx.add(i, s);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var dot(Var a, Var b) {
  Graph& g = *a.g;
  if (a.val().size() != b.val().size()) throw InternalError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.val().size(); ++i) s += a.val().data[i] * b.val().data[i];
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid]() {
      const double d = gp->grad_ref(rid)(0);
      const Tensor& av = gp->val(aid);
      const Tensor& bv = gp->val(bid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      for (std::size_t i = 0; i < av.data.size(); ++i) {
        da.add(i, d * bv.data[i]);
        db.add(i, d * av.data[i]);
      }
    };
  }
  return g.make(Tensor::scalar(s), ng, std::move(back));
}

Var outer(Var a, Var b) {
  Graph& g = *a.g;
  const std::size_t m = a.val().size(), n = b.val().size();
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = a.val().data[i] * b.val().data[j];
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid, m, n]() {
      const Tensor& dY = gp->grad_ref(rid);
      const Tensor& av = gp->val(aid);
      const Tensor& bv = gp->val(bid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          da.add(i, dY(i, j) * bv.data[j]);
          db.add(j, dY(i, j) * av.data[i]);
        }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var concat(Var a, Var b) {
  Graph& g = *a.g;
  const std::size_t m = a.val().size(), n = b.val().size();
  Tensor out = Tensor::zeros({m + n});
  std::copy(a.val().data.begin(), a.val().data.end(), out.data.begin());
  std::copy(b.val().data.begin(), b.val().data.end(), out.data.begin() + m);
  const bool ng = any_grad({a, b});
  Graph* gp = &g;
  const int aid = a.id, bid = b.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, bid, rid, m, n]() {
      const Tensor& dy = gp->grad_ref(rid);
      Acc da(Var{gp, aid}), db(Var{gp, bid});
      for (std::size_t i = 0; i < m; ++i) da.add(i, dy(i));
      for (std::size_t j = 0; j < n; ++j) db.add(j, dy(m + j));
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var slice(Var a, std::size_t off, std::size_t len) {
  Graph& g = *a.g;
  if (off + len > a.val().size()) throw InternalError("slice: out of range");
  Tensor out = Tensor::zeros({len});
  std::copy(a.val().data.begin() + off, a.val().data.begin() + off + len, out.data.begin());
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, off, len]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < len; ++i) dx.data[off + i] += dy(i);
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var pad(Var a, std::size_t total, std::size_t off) {
  Graph& g = *a.g;
  const std::size_t n = a.val().size();
  if (off + n > total) throw InternalError("pad: out of range");
  Tensor out = Tensor::zeros({total});
  std::copy(a.val().data.begin(), a.val().data.end(), out.data.begin() + off);
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, off, n]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < n; ++i) dx.data[i] += dy(off + i);
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var row(Var a, std::size_t i) {
  const Tensor& A = a.val();
  if (A.rank() != 2 || i >= A.shape[0]) throw InternalError("row: out of range");
  return slice(a, i * A.shape[1], A.shape[1]);
}

Var at(Var a, std::size_t i) {
  Graph& g = *a.g;
  if (i >= a.val().size()) throw InternalError("at: out of range");
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, i]() {
      gp->grad_ref(aid).data[i] += gp->grad_ref(rid)(0);
    };
  }
  return g.make(Tensor::scalar(a.val().data[i]), ng, std::move(back));
}

Var gather(Var a, std::vector<std::size_t> idx) {
  Graph& g = *a.g;
  Tensor out = Tensor::zeros({idx.size()});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= a.val().size()) throw InternalError("gather: out of range");
    out(i) = a.val().data[idx[i]];
  }
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, idx]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < idx.size(); ++i) dx.data[idx[i]] += dy(i);
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var flatten(Var a) {
  Graph& g = *a.g;
  Tensor out = a.val();
  out.shape = {out.data.size()};
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += dy.data[i];
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw InternalError("stack_rows: empty");
  Graph& g = *rows[0].g;
  const std::size_t n = rows.size(), d = rows[0].val().size();
  Tensor out = Tensor::zeros({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].val().size() != d) throw InternalError("stack_rows: ragged input");
    std::copy(rows[i].val().data.begin(), rows[i].val().data.end(), out.data.begin() + i * d);
  }
  const bool ng = any_grad(rows);
  Graph* gp = &g;
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = rows[i].id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, ids, rid, d]() {
      const Tensor& dy = gp->grad_ref(rid);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        Acc dr(Var{gp, ids[i]});
        for (std::size_t j = 0; j < d; ++j) dr.add(j, dy.data[i * d + j]);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var stack_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw InternalError("stack_scalars: empty");
  Graph& g = *xs[0].g;
  Tensor out = Tensor::zeros({xs.size()});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].val().size() != 1) throw InternalError("stack_scalars: non-scalar input");
    out(i) = xs[i].val().data[0];
  }
  const bool ng = any_grad(xs);
  Graph* gp = &g;
  std::vector<int> ids;
  for (const Var& v : xs) ids.push_back(v.id);
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, ids, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        Acc dx(Var{gp, ids[i]});
        dx.add(0, dy(i));
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var hconcat(const std::vector<Var>& mats) {
  if (mats.empty()) throw InternalError("hconcat: empty");
  Graph& g = *mats[0].g;
  const std::size_t m = mats[0].val().shape[0];
  std::size_t total = 0;
  for (const Var& v : mats) {
    if (v.val().rank() != 2 || v.val().shape[0] != m) throw InternalError("hconcat: shape mismatch");
    total += v.val().shape[1];
  }
  Tensor out = Tensor::zeros({m, total});
  std::size_t off = 0;
  for (const Var& v : mats) {
    const std::size_t c = v.val().shape[1];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < c; ++j) out(i, off + j) = v.val()(i, j);
    off += c;
  }
  const bool ng = any_grad(mats);
  Graph* gp = &g;
  std::vector<int> ids;
  std::vector<std::size_t> colwidths;
  for (const Var& v : mats) {
    ids.push_back(v.id);
    colwidths.push_back(v.val().shape[1]);
  }
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, ids, colwidths, rid, m, total]() {
      const Tensor& dy = gp->grad_ref(rid);
      std::size_t off2 = 0;
      for (std::size_t v = 0; v < ids.size(); ++v) {
        Acc dm(Var{gp, ids[v]});
        const std::size_t c = colwidths[v];
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) dm.add(i * c + j, dy.data[i * total + off2 + j]);
        off2 += c;
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var add_n(const std::vector<Var>& xs) {
  if (xs.empty()) throw InternalError("add_n: empty");
  Graph& g = *xs[0].g;
  Tensor out = xs[0].val();
  for (std::size_t v = 1; v < xs.size(); ++v) {
    if (!xs[v].val().same_shape(out)) throw InternalError("add_n: shape mismatch");
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += xs[v].val().data[i];
  }
  const bool ng = any_grad(xs);
  Graph* gp = &g;
  std::vector<int> ids;
  for (const Var& v : xs) ids.push_back(v.id);
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, ids, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      for (int id : ids) {
        Acc dx(Var{gp, id});
        for (std::size_t i = 0; i < dy.data.size(); ++i) dx.add(i, dy.data[i]);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var detach(Var a) {
  return a.g->constant(a.val());
}

Var sum(Var a) {
  Graph& g = *a.g;
  double s = 0.0;
  for (double x : a.val().data) s += x;
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid]() {
      const double d = gp->grad_ref(rid)(0);
      Tensor& dx = gp->grad_ref(aid);
      for (double& x : dx.data) x += d;
    };
  }
  return g.make(Tensor::scalar(s), ng, std::move(back));
}

Var mean(Var a) { return smul(sum(a), 1.0 / static_cast<double>(a.val().size())); }

Var colwise_sum(Var a) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  if (A.rank() != 2) throw InternalError("colwise_sum: need matrix");
  const std::size_t m = A.shape[0], n = A.shape[1];
  Tensor out = Tensor::zeros({n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j) += A(i, j);
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, m, n]() {
      const Tensor& dy = gp->grad_ref(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dx.data[i * n + j] += dy(j);
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var colwise_logsumexp(Var a) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  if (A.rank() != 2) throw InternalError("colwise_logsumexp: need matrix");
  const std::size_t m = A.shape[0], n = A.shape[1];
  Tensor out = Tensor::zeros({n});
  for (std::size_t j = 0; j < n; ++j) {
    double mx = A(0, j);
    for (std::size_t i = 1; i < m; ++i) mx = std::max(mx, A(i, j));
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += std::exp(A(i, j) - mx);
    out(j) = mx + std::log(s);
  }
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, m, n]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& y = gp->val(rid);
      const Tensor& A2 = gp->val(aid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t j = 0; j < n; ++j) {
        const double d = dy(j);
        if (d == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) {
          dx.data[i * n + j] += d * std::exp(A2(i, j) - y(j));
        }
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var logsumexp(Var a) {
  Graph& g = *a.g;
  const Tensor& X = a.val();
  double mx = X.data[0];
  for (double x : X.data) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : X.data) s += std::exp(x - mx);
  const double y = mx + std::log(s);
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid]() {
      const double d = gp->grad_ref(rid)(0);
      const double yv = gp->val(rid)(0);
      const Tensor& X2 = gp->val(aid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < X2.data.size(); ++i) {
        dx.data[i] += d * std::exp(X2.data[i] - yv);
      }
    };
  }
  return g.make(Tensor::scalar(y), ng, std::move(back));
}

Var softmax(Var a) {
  Graph& g = *a.g;
  const Tensor& X = a.val();
  Tensor out = X;
  double mx = X.data[0];
  for (double x : X.data) mx = std::max(mx, x);
  double s = 0.0;
  for (std::size_t i = 0; i < X.data.size(); ++i) {
    out.data[i] = std::exp(X.data[i] - mx);
    s += out.data[i];
  }
  for (double& x : out.data) x /= s;
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& y = gp->val(rid);
      Tensor& dx = gp->grad_ref(aid);
      double inner = 0.0;
      for (std::size_t i = 0; i < y.data.size(); ++i) inner += dy.data[i] * y.data[i];
      for (std::size_t i = 0; i < y.data.size(); ++i) {
        dx.data[i] += y.data[i] * (dy.data[i] - inner);
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

Var rowwise_softmax(Var a) {
  Graph& g = *a.g;
  const Tensor& A = a.val();
  if (A.rank() != 2) throw InternalError("rowwise_softmax: need matrix");
  const std::size_t m = A.shape[0], n = A.shape[1];
  Tensor out = A;
  for (std::size_t i = 0; i < m; ++i) {
    double mx = A(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, A(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = std::exp(A(i, j) - mx);
      s += out(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) out(i, j) /= s;
  }
  const bool ng = g.needs_grad(a.id);
  Graph* gp = &g;
  const int aid = a.id;
  const int rid = static_cast<int>(g.num_nodes());
  std::function<void()> back;
  if (ng) {
    back = [gp, aid, rid, m, n]() {
      const Tensor& dy = gp->grad_ref(rid);
      const Tensor& y = gp->val(rid);
      Tensor& dx = gp->grad_ref(aid);
      for (std::size_t i = 0; i < m; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) inner += dy(i, j) * y(i, j);
        for (std::size_t j = 0; j < n; ++j) {
          dx.data[i * n + j] += y(i, j) * (dy(i, j) - inner);
        }
      }
    };
  }
  return g.make(std::move(out), ng, std::move(back));
}

}  // namespace knowra::ad
