#ifndef KNOWRA_TESTS_GRADCHECK_HPP
#define KNOWRA_TESTS_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "knowra/params.hpp"
#include "knowra/rng.hpp"
#include "knowra/tensor.hpp"

namespace knowra::testsupport {

// Central finite differences along random unit directions, compared against
// the analytic directional derivative grad . v.
//
// `loss_fn` must populate store gradients (zero_grads + backward + flush)
// and return the loss value.
struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t directions = 0;
};

inline double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

inline GradCheckResult gradcheck_params(ParamStore& params,
                                        const std::function<double(bool with_grad)>& loss_fn,
                                        Rng& rng, std::size_t directions, double eps = 1e-6) {
  GradCheckResult result;
  loss_fn(true);  // populate analytic gradients

  std::vector<Tensor> grads;
  for (const auto& e : params.entries()) grads.push_back(e.grad);

  for (std::size_t dir = 0; dir < directions; ++dir) {
    // One random direction across a randomly chosen tensor.
    const std::size_t which = rng.uniform_int(params.entries().size());
    auto& entry = params.entries()[which];
    Tensor direction = Tensor::zeros(entry.value.shape);
    double norm = 0.0;
    for (double& x : direction.data) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : direction.data) x /= norm;

    double analytic = 0.0;
    for (std::size_t i = 0; i < direction.data.size(); ++i) {
      analytic += grads[which].data[i] * direction.data[i];
    }

    Tensor saved = entry.value;
    for (std::size_t i = 0; i < direction.data.size(); ++i) {
      entry.value.data[i] = saved.data[i] + eps * direction.data[i];
    }
    const double plus = loss_fn(false);
    for (std::size_t i = 0; i < direction.data.size(); ++i) {
      entry.value.data[i] = saved.data[i] - eps * direction.data[i];
    }
    const double minus = loss_fn(false);
    entry.value = saved;

    const double numeric = (plus - minus) / (2.0 * eps);
    result.max_rel_err = std::max(result.max_rel_err, relative_error(analytic, numeric));
    ++result.directions;
  }
  return result;
}

}  // namespace knowra::testsupport

#endif  // KNOWRA_TESTS_GRADCHECK_HPP
