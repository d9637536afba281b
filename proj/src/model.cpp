#include "softnet/model.hpp"

#include <cmath>

namespace softnet {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace

Dataset::Dataset(Matrix X_, Matrix Y_) : X(std::move(X_)), Y(std::move(Y_)) {
  if (X.cols() != Y.cols()) throw DimensionError("Dataset: X and Y sample counts differ");
  if (X.cols() < 1 || X.rows() < 1 || Y.rows() < 1)
    throw ValueError("Dataset: need n >= 1, d1 >= 1, d2 >= 1");
  constexpr double kNormSlack = 1.0 + 1e-12;
  for (int i = 0; i < X.cols(); ++i) {
    if (!X.col(i).allFinite() || !Y.col(i).allFinite())
      throw ValueError("Dataset: non-finite entry");
    if (X.col(i).norm() > kNormSlack)
      throw ValueError("Dataset: ||x_i||_2 > 1");
    if (Y.col(i).norm() > kNormSlack)
      throw ValueError("Dataset: ||y_i||_2 > 1");
  }
}

void NetworkState::validate() const {
  if (a.cols() != W.cols()) throw DimensionError("NetworkState: W and a widths differ");
  if ((a.array().abs() != 1.0).any())
    throw ValueError("NetworkState: sign weights must be exactly +1 or -1");
}

SoftmaxState softmax_state(const Matrix& W, const Vector& x) {
  require(W.rows() == x.size(), "softmax_state: dimension mismatch");
  if (!W.allFinite() || !x.allFinite())
    throw ValueError("softmax_state: non-finite input");

  const Vector logits = W.transpose() * x;
  const double shift = logits.maxCoeff();
  SoftmaxState st;
  st.exps = (logits.array() - shift).exp();
  const double shifted_sum = st.exps.sum();
  st.S = st.exps / shifted_sum;
  const double scale = std::exp(shift);
  st.alpha = scale * shifted_sum;
  st.exps *= scale;
  return st;
}

Vector forward(const NetworkState& net, const Vector& x) {
  require(net.a.cols() == net.W.cols(), "forward: W and a widths differ");
  const SoftmaxState st = softmax_state(net.W, x);
  return static_cast<double>(net.m()) * (net.a * st.S);
}

Prediction predict_all(const NetworkState& net, const Dataset& data) {
  require(net.d1() == data.d1(), "predict_all: input dimension mismatch");
  Prediction F(net.d2(), data.n());
  for (int i = 0; i < data.n(); ++i) F.col(i) = forward(net, data.X.col(i));
  return F;
}

double loss(const Prediction& F, const Matrix& Y) {
  require(F.rows() == Y.rows() && F.cols() == Y.cols(), "loss: shape mismatch");
  return 0.5 * (F - Y).squaredNorm();
}

Gradient analytic_gradient(const NetworkState& net, const Dataset& data,
                           GradientForm form) {
  require(net.d1() == data.d1() && net.d2() == data.d2(),
          "analytic_gradient: dimension mismatch");
  const int m = net.m();
  Gradient DW = Matrix::Zero(net.d1(), m);
  for (int i = 0; i < data.n(); ++i) {
    const SoftmaxState st = softmax_state(net.W, data.X.col(i));
    const Vector aS = net.a * st.S;                          // <a_l, S> per l
    const Vector res = static_cast<double>(m) * aS - data.Y.col(i);
    const Vector u = net.a.transpose() * res;                // sum_l res_l a_{l,r}
    const double cross = res.dot(aS);                        // sum_l res_l <a_l, S>
    Vector coeff(m);
    if (form == GradientForm::kClaim) {
      // (<a_{l,r} 1_m - a_l, S>) * S_r, with the actual sum of S kept so the
      // two forms differ only where floating point does.
      const double sumS = st.S.sum();
      coeff = (u.array() * sumS - cross) * st.S.array();
    } else {
      coeff = (u.array() - cross) * st.S.array();
    }
    DW.noalias() += static_cast<double>(m) * data.X.col(i) * coeff.transpose();
  }
  return DW;
}

Gradient fd_gradient(const NetworkState& net, const Dataset& data, double h) {
  if (!(h > 0.0)) throw ValueError("fd_gradient: h must be positive");
  NetworkState probe = net;
  Gradient G(net.d1(), net.m());
  for (int r = 0; r < net.m(); ++r) {
    for (int k = 0; k < net.d1(); ++k) {
      const double w0 = net.W(k, r);
      const double step = h * std::max(1.0, std::abs(w0));
      probe.W(k, r) = w0 + step;
      const double up = loss(predict_all(probe, data), data.Y);
      probe.W(k, r) = w0 - step;
      const double down = loss(predict_all(probe, data), data.Y);
      probe.W(k, r) = w0;
      G(k, r) = (up - down) / (2.0 * step);
    }
  }
  return G;
}

}  // namespace softnet
