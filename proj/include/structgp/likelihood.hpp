#pragma once

// Negative marginal log-likelihood of a zero-mean StructGP, evaluated
// blockwise over independent patients, its gradient in pack() order, and the
// AIC score used for model selection.

#include "structgp/kernel.hpp"
#include "structgp/model.hpp"

namespace structgp {

struct NmllValue {
  double value = 0.0;
  Vector grad;  // aligned with pack(); empty when not requested
};

/// Holds the sorted design of one dataset so repeated evaluations during an
/// optimization do not rebuild it.
class Likelihood {
 public:
  explicit Likelihood(const Dataset& data);

  const Design& design() const { return design_; }
  int tasks() const { return design_.k; }
  std::size_t observations() const { return design_.n; }

  double value(const Theta& theta) const;
  NmllValue value_and_grad(const Theta& theta) const;
  /// Gradient wrt S only (k x k, zero diagonal).
  Matrix weight_gradient(const Theta& theta) const;

 private:
  NmllValue evaluate(const Theta& theta, bool with_grad) const;

  Design design_;
};

double nmll(const Theta& theta, const Dataset& data);
Vector nmll_grad(const Theta& theta, const Dataset& data);

/// Number of off-diagonal S entries that are exactly nonzero.
int weight_count(const Matrix& S);

/// 2 * ||S||_0 + 2 * nmll, evaluated at the given (already thresholded) theta.
double aic(const Theta& theta, const Dataset& data);
double aic(const Theta& theta, const Likelihood& lik);

}  // namespace structgp
