#pragma once

#include "softnet/types.hpp"

namespace softnet {

/// Which published form of the analytic gradient to evaluate. The two are
/// algebraically identical; keeping both executable makes the identity
/// testable.
enum class GradientForm {
  kDefinition,  // <a_l o e_r, S> - <a_l, S> * S_r
  kClaim,       // <a_{l,r} 1_m - a_l, S> * S_r
};

/// Softmax of the hidden pre-activations W^T x. Internally max-shifted;
/// alpha is the unshifted normalizer reconstructed from the shifted sum.
SoftmaxState softmax_state(const Matrix& W, const Vector& x);

/// Network output F(W, x) with F_l = m * <a_l, S>.
Vector forward(const NetworkState& net, const Vector& x);

/// Outputs for every sample; column i is forward(net, x_i).
Prediction predict_all(const NetworkState& net, const Dataset& data);

/// Squared-error objective 0.5 * ||F - Y||_F^2.
double loss(const Prediction& F, const Matrix& Y);

/// Exact gradient of the loss with respect to W, column r = Delta w_r.
Gradient analytic_gradient(const NetworkState& net, const Dataset& data,
                           GradientForm form = GradientForm::kClaim);

/// Central finite differences of the loss, step h * max(1, |w|) per
/// coordinate. Test oracle for analytic_gradient.
Gradient fd_gradient(const NetworkState& net, const Dataset& data, double h);

}  // namespace softnet
