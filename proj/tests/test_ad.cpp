#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "knowra/ad.hpp"
#include "knowra/rng.hpp"

using namespace knowra;
using ad::Graph;
using ad::Var;

namespace {

// Finite-difference check of d(loss)/d(x) for a scalar-valued builder.
double fd_max_rel_err(const Tensor& x0,
                      const std::function<Var(Graph&, Var)>& build, double eps = 1e-6) {
  Graph g;
  Var x = g.input(x0, true);
  Var loss = build(g, x);
  g.backward(loss);
  Tensor analytic = x.grad();

  double max_err = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    Tensor xp = x0, xm = x0;
    xp.data[i] += eps;
    xm.data[i] -= eps;
    Graph gp, gm;
    const double fp = build(gp, gp.input(xp, false)).val()(0);
    const double fm = build(gm, gm.input(xm, false)).val()(0);
    const double numeric = (fp - fm) / (2 * eps);
    const double denom = std::max({std::abs(numeric), std::abs(analytic.data[i]), 1e-8});
    max_err = std::max(max_err, std::abs(numeric - analytic.data[i]) / denom);
  }
  return max_err;
}

Tensor random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  Tensor t = Tensor::zeros({n});
  for (double& v : t.data) v = rng.normal(0, scale);
  return t;
}

Tensor random_mat(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t = Tensor::zeros({r, c});
  for (double& v : t.data) v = rng.normal(0, scale);
  return t;
}

}  // namespace

TEST_CASE("forward values of basic ops") {
  Graph g;
  Var a = g.input(Tensor::vec({1.0, 2.0, 3.0}));
  Var b = g.input(Tensor::vec({4.0, -1.0, 0.5}));
  CHECK(ad::add(a, b).val()(1) == doctest::Approx(1.0));
  CHECK(ad::sub(a, b).val()(0) == doctest::Approx(-3.0));
  CHECK(ad::mul(a, b).val()(2) == doctest::Approx(1.5));
  CHECK(ad::dot(a, b).val()(0) == doctest::Approx(4.0 - 2.0 + 1.5));
  CHECK(ad::sum(a).val()(0) == doctest::Approx(6.0));
  CHECK(ad::mean(a).val()(0) == doctest::Approx(2.0));

  Var sm = ad::softmax(a);
  double total = 0.0;
  for (double v : sm.val().data) total += v;
  CHECK(total == doctest::Approx(1.0));
  CHECK(ad::logsumexp(a).val()(0) ==
        doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
}

TEST_CASE("matmul agrees with hand computation") {
  Graph g;
  Var A = g.input(Tensor::mat(2, 3, {1, 2, 3, 4, 5, 6}));
  Var B = g.input(Tensor::mat(3, 2, {7, 8, 9, 10, 11, 12}));
  Tensor C = ad::matmul(A, B).val();
  CHECK(C(0, 0) == doctest::Approx(58));
  CHECK(C(0, 1) == doctest::Approx(64));
  CHECK(C(1, 0) == doctest::Approx(139));
  CHECK(C(1, 1) == doctest::Approx(154));

  Tensor D = ad::matmul_nt(A, g.input(Tensor::mat(2, 3, {1, 0, 1, 0, 1, 0}))).val();
  CHECK(D(0, 0) == doctest::Approx(4));   // 1+3
  CHECK(D(1, 1) == doctest::Approx(5));   // 5
}

TEST_CASE("gradients of every primitive match finite differences") {
  Rng rng(7);
  const double tol = 1e-6;

  auto check = [&](const std::function<Var(Graph&, Var)>& build, const Tensor& x0) {
    CHECK(fd_max_rel_err(x0, build) < tol);
  };

  // Weights mixed into each builder so gradients are non-trivial.
  const Tensor w4 = random_vec(rng, 4);
  const Tensor u4 = random_vec(rng, 4);
  const Tensor w3 = random_vec(rng, 3);
  const Tensor m34 = random_mat(rng, 3, 4);
  const Tensor m43 = random_mat(rng, 4, 3);

  check([&](Graph& g, Var x) { return ad::dot(ad::add(x, g.constant(w4)), g.constant(w4)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::mul(x, g.constant(w4)), g.constant(w4)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::exp(x), g.constant(w4)); }, random_vec(rng, 4, 0.3));
  check([&](Graph& g, Var x) { return ad::dot(ad::log(ad::sadd(ad::mul(x, x), 0.5)), g.constant(w4)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::tanh(x), g.constant(w4)); }, random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::sigmoid(x), g.constant(w4)); }, random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::softplus(x), g.constant(w4)); }, random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::leaky_relu(x, 0.2), g.constant(w4)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::softmax(x), g.constant(w4)); }, random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::logsumexp(x); }, random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::vdiv(x, ad::dot(x, g.constant(w4))), g.constant(u4)); },
        random_vec(rng, 4, 0.8));
  check([&](Graph& g, Var x) { return ad::sum(ad::mulvs(g.constant(w4), ad::dot(x, g.constant(w4)))); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::matvec(g.constant(m34), x), g.constant(w3)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::dot(ad::matvec_t(g.constant(m43), x), g.constant(w3)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::sum(ad::outer(x, g.constant(w3))); }, random_vec(rng, 4));
  const Tensor w6 = random_vec(rng, 6);
  check([&](Graph& g, Var x) { return ad::dot(ad::concat(x, ad::slice(x, 1, 2)), g.constant(w6)); },
        random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::sum(ad::pad(x, 7, 2)); }, random_vec(rng, 4));
  check([&](Graph& g, Var x) { return ad::at(ad::gather(x, {2, 0, 2}), 2); }, random_vec(rng, 4));

  // Matrix-shaped inputs.
  auto mcheck = [&](const std::function<Var(Graph&, Var)>& build, const Tensor& x0) {
    CHECK(fd_max_rel_err(x0, build) < tol);
  };
  mcheck([&](Graph& g, Var x) { return ad::dot(ad::colwise_sum(x), g.constant(w4)); },
         random_mat(rng, 3, 4));
  mcheck([&](Graph& g, Var x) { return ad::dot(ad::colwise_logsumexp(x), g.constant(w4)); },
         random_mat(rng, 3, 4));
  mcheck([&](Graph& g, Var x) {
    return ad::dot(ad::row(ad::rowwise_softmax(x), 1), g.constant(w4));
  }, random_mat(rng, 3, 4));
  mcheck([&](Graph& g, Var x) {
    return ad::sum(ad::matmul(x, g.constant(m43)));
  }, random_mat(rng, 3, 4));
  mcheck([&](Graph& g, Var x) {
    return ad::sum(ad::matmul_nt(x, g.constant(m34)));
  }, random_mat(rng, 3, 4));
  mcheck([&](Graph& g, Var x) { return ad::sum(ad::flatten(x)); }, random_mat(rng, 2, 3));
}

TEST_CASE("stacking ops route gradients") {
  Rng rng(11);
  Tensor x0 = random_vec(rng, 3);
  const Tensor w3 = random_vec(rng, 3);
  auto build = [&](Graph& g, Var x) {
    std::vector<Var> rows{x, ad::smul(x, 2.0), ad::tanh(x)};
    Var M = ad::stack_rows(rows);
    std::vector<Var> scalars{ad::sum(M), ad::dot(x, x), ad::at(x, 0)};
    return ad::dot(ad::softmax(ad::stack_scalars(scalars)), g.constant(w3));
  };
  CHECK(fd_max_rel_err(x0, build) < 1e-6);

  auto build2 = [&](Graph& g, Var x) {
    Var M = ad::stack_rows({x, x});
    Var H = ad::hconcat({M, ad::smul(M, -1.0)});
    return ad::sum(ad::mul(H, H));
  };
  CHECK(fd_max_rel_err(x0, build2) < 1e-6);

  auto build3 = [&](Graph& g, Var x) {
    return ad::sum(ad::add_n({x, ad::smul(x, 3.0), ad::mul(x, x)}));
  };
  CHECK(fd_max_rel_err(x0, build3) < 1e-6);
}

TEST_CASE("detach stops gradient flow") {
  Graph g;
  Var x = g.input(Tensor::vec({2.0, 3.0}));
  Var loss = ad::sum(ad::mul(ad::detach(x), x));
  g.backward(loss);
  CHECK(x.grad()(0) == doctest::Approx(2.0));  // only the live factor
  CHECK(x.grad()(1) == doctest::Approx(3.0));
}

TEST_CASE("constants never allocate gradients") {
  Graph g;
  Var c = g.constant(Tensor::vec({1.0, 2.0}));
  Var x = g.input(Tensor::vec({1.0, 1.0}));
  Var loss = ad::sum(ad::mul(c, x));
  g.backward(loss);
  CHECK_FALSE(g.has_grad(c.id));
  CHECK(x.grad()(1) == doctest::Approx(2.0));
}
