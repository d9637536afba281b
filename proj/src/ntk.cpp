#include "softnet/ntk.hpp"

#include <cmath>

#include "softnet/model.hpp"
#include "softnet/rng.hpp"
#include "softnet/training.hpp"

namespace softnet {

Vector vec_labels(const Matrix& Y) {
  const int d2 = static_cast<int>(Y.rows());
  const int n = static_cast<int>(Y.cols());
  Vector v(n * d2);
  for (int l = 0; l < d2; ++l)
    for (int i = 0; i < n; ++i) v[l * n + i] = Y(l, i);
  return v;
}

Matrix unvec_labels(const Vector& v, int d2, int n) {
  if (v.size() != static_cast<long>(n) * d2)
    throw DimensionError("unvec_labels: length mismatch");
  Matrix Y(d2, n);
  for (int l = 0; l < d2; ++l)
    for (int i = 0; i < n; ++i) Y(l, i) = v[l * n + i];
  return Y;
}

GammaState gamma_zero(int n, int d2) {
  if (n < 1 || d2 < 1) throw DimensionError("gamma_zero: bad dimensions");
  return GammaState{Vector::Zero(n * d2), 0};
}

GammaState gamma_step(const GammaState& state, const GramMatrix& H_star,
                      const Matrix& Y, double eta, int m) {
  const Vector y = vec_labels(Y);
  if (state.gamma.size() != H_star.H.rows() || y.size() != H_star.H.rows())
    throw DimensionError("gamma_step: dimension mismatch");
  GammaState next;
  next.gamma =
      state.gamma - eta * (static_cast<double>(m) * (H_star.H * state.gamma) - y);
  next.step = state.step + 1;
  return next;
}

ClosedFormGamma gamma_closed_form(const GramMatrix& H_star, const Matrix& Y,
                                  int m) {
  const Vector y = vec_labels(Y);
  if (y.size() != H_star.H.rows())
    throw DimensionError("gamma_closed_form: dimension mismatch");
  ClosedFormGamma out;
  const double lam = min_eigenvalue(H_star);
  if (lam > 1e-10) {
    out.state.gamma = H_star.H.ldlt().solve(y) / static_cast<double>(m);
  } else {
    out.degenerate = true;
    out.state.gamma =
        H_star.H.completeOrthogonalDecomposition().solve(y) /
        static_cast<double>(m);
  }
  out.residual =
      (static_cast<double>(m) * (H_star.H * out.state.gamma) - y).norm();
  if (!out.degenerate && out.residual > 1e-8 * std::max(y.norm(), 1e-300))
    throw NumericError("gamma_closed_form: solve residual too large");
  return out;
}

Vector ntk_predict(const GammaState& state, const TestKernel& K_te, int m) {
  if (K_te.K.cols() != state.gamma.size())
    throw DimensionError("ntk_predict: dimension mismatch");
  return static_cast<double>(m) * (K_te.K * state.gamma);
}

std::vector<CouplingTrace> coupling_experiment(
    const Dataset& data, const Matrix& test_points,
    const std::vector<int>& m_list, int steps, std::uint64_t seed,
    const CouplingOptions& opts) {
  if (test_points.rows() != data.d1())
    throw DimensionError("coupling_experiment: test point dimension mismatch");
  for (int k = 0; k < test_points.cols(); ++k)
    if (test_points.col(k).norm() > 1.0 + 1e-12)
      throw ValueError("coupling_experiment: ||x_te||_2 > 1");
  const int n_te = static_cast<int>(test_points.cols());

  std::vector<CouplingTrace> traces;
  traces.reserve(m_list.size());
  for (const int m : m_list) {
    NetworkState net = symmetric_init(m, data.d1(), data.d2(), opts.sigma,
                                      derive_seed(seed, "couple", m));
    const GramMatrix H_star = gram(net, data);
    std::vector<TestKernel> K_star(n_te);
    for (int k = 0; k < n_te; ++k)
      K_star[k] = test_kernel(net, data, test_points.col(k));

    CouplingTrace trace;
    trace.m = m;
    trace.lambda = min_eigenvalue(H_star);
    const double lam_max = max_eigenvalue(H_star);
    trace.eta = opts.eta_scale / (m * lam_max);
    GammaState gamma = gamma_zero(data.n(), data.d2());

    for (int tau = 0; tau <= steps; ++tau) {
      CouplingStep row;
      row.step = tau;
      const GramMatrix H_tau = gram(net, data);
      row.eps_H = (H_star.H - H_tau.H).norm();
      for (int k = 0; k < n_te; ++k) {
        const TestKernel K_tau = test_kernel(net, data, test_points.col(k));
        row.max_eps_test =
            std::max(row.max_eps_test, (K_star[k].K - K_tau.K).norm());
        const Vector f_nn = forward(net, test_points.col(k));
        const Vector f_ntk = ntk_predict(gamma, K_star[k], m);
        row.sup_gap =
            std::max(row.sup_gap, (f_nn - f_ntk).cwiseAbs().maxCoeff());
      }
      trace.max_gap = std::max(trace.max_gap, row.sup_gap);
      trace.steps.push_back(row);
      if (tau == steps) break;

      const Gradient grad = analytic_gradient(net, data);
      net = gd_step(net, trace.eta, grad);
      gamma = gamma_step(gamma, H_star, data.Y, trace.eta, m);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace softnet
