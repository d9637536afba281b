#pragma once

#include <cstdint>
#include <vector>

#include "softnet/kernel.hpp"
#include "softnet/types.hpp"

namespace softnet {

/// Kernel-regression coefficients. gamma has length n * d2 in the same
/// l-major layout as the Gram matrix (index l * n + i).
struct GammaState {
  Vector gamma;
  int step = 0;
};

struct ClosedFormGamma {
  GammaState state;
  bool degenerate = false;  // least-squares fallback was used
  double residual = 0.0;    // ||m H gamma - vec(Y)||
};

struct CouplingStep {
  int step = 0;
  double sup_gap = 0.0;       // max over test points and outputs
  double eps_H = 0.0;         // ||H* - H(tau)||_F
  double max_eps_test = 0.0;  // max over test points of ||K* - K(tau)||_F
};

struct CouplingTrace {
  int m = 0;
  double eta = 0.0;
  double lambda = 0.0;      // lambda_min(H*) for this width
  double max_gap = 0.0;     // max over steps of sup_gap
  std::vector<CouplingStep> steps;
};

struct CouplingOptions {
  double sigma = 0.04;
  double eta_scale = 0.5;  // eta = eta_scale / (m * lambda_max(H*))
};

Vector vec_labels(const Matrix& Y);
Matrix unvec_labels(const Vector& v, int d2, int n);

GammaState gamma_zero(int n, int d2);

/// One step of gamma(tau+1) = gamma(tau) - eta * (m H* gamma - vec(Y)).
GammaState gamma_step(const GammaState& state, const GramMatrix& H_star,
                      const Matrix& Y, double eta, int m);

/// gamma* = (1/m) (H*)^{-1} vec(Y), with a least-squares fallback when
/// the Gram matrix is numerically singular.
ClosedFormGamma gamma_closed_form(const GramMatrix& H_star, const Matrix& Y,
                                  int m);

/// F_ntk(x_te) = m * K_te * gamma.
Vector ntk_predict(const GammaState& state, const TestKernel& K_te, int m);

/// Lockstep GD of the network and the frozen-kernel regressor from
/// matched zero initial predictions; one trace per requested width.
std::vector<CouplingTrace> coupling_experiment(
    const Dataset& data, const Matrix& test_points,
    const std::vector<int>& m_list, int steps, std::uint64_t seed,
    const CouplingOptions& opts = {});

}  // namespace softnet
