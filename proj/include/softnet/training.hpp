#pragma once

#include <cstdint>
#include <vector>

#include "softnet/model.hpp"
#include "softnet/types.hpp"

namespace softnet {

/// Theorem-prescribed hyperparameters. The Omega-constants c_m and c_T
/// default to 1; the published statements only fix the asymptotic order.
struct TheoryParams {
  double sigma = 0.0;
  double delta = 0.1;
  double C = 10.0;
  double B = 1.0;
  double lambda = 0.0;
  double m = 0.0;  // prescribed width, usually astronomically large
  double eta = 0.0;
  double T_hat = 0.0;
  double R = 0.0;
  double D = 0.0;
  double eps = 0.0;
};

enum class TrainMode { kTheory, kPractical };

struct TrainConfig {
  TrainMode mode = TrainMode::kTheory;
  int m = 512;  // actual run width, even
  double sigma = 1e-3;
  double eta = 0.0;  // practical mode: user value; theory mode: from params
  int max_steps = 200;
  double delta = 0.1;
  double eps = 1e-3;
  double C = 10.0;
  bool record_decomposition = false;
};

struct DecompositionRecord {
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double v2_norm = 0.0;
  double q1_inner = 0.0;
  double q1_quadform = 0.0;
};

struct TrainStep {
  int step = 0;
  double loss = 0.0;       // ||F - Y||_F^2
  double max_drift = 0.0;  // max_r ||w_r(tau) - w_r(0)||
  double max_grad = 0.0;   // max_r ||Delta w_r(tau)||
  double ratio = 0.0;      // loss(tau) / loss(tau - 1), NaN at step 0
  bool has_decomposition = false;
  DecompositionRecord decomposition;
};

struct TrainTrace {
  std::vector<TrainStep> steps;
  NetworkState init;
  NetworkState final;
  Dataset data;
  double eta = 0.0;
  bool aborted = false;  // non-finite loss hit; trace ends at the bad step
};

struct CheckReport {
  int violations = 0;
  int first_violation_step = -1;
  double worst_margin = 0.0;  // most positive (stat - bound) seen
};

struct InductionReport {
  CheckReport drift;        // max drift <= D
  CheckReport contraction;  // loss(tau) <= loss(0) * (1 - m eta lambda / 2)^tau
  CheckReport step_ratio;   // loss(tau+1)/loss(tau) <= 1 - m eta lambda / 4
  CheckReport eta_grad;     // eta * max ||Delta w_r|| <= 0.01
  CheckReport grad_bound;   // max ||Delta w_r|| <= exp(3B) sqrt(nd) ||F-Y||_F
  double D = 0.0;
  double R = 0.0;
  bool D_lt_R = false;  // theory precondition, reported separately
  int total_violations() const {
    return drift.violations + contraction.violations + step_ratio.violations +
           eta_grad.violations + grad_bound.violations;
  }
};

NetworkState symmetric_init(int m, int d1, int d2, double sigma,
                            std::uint64_t seed);

double compute_B(double sigma, int n, int d, double delta, double C);

TheoryParams theory_hyperparams(int n, int d, double lambda, double B,
                                double eps, double delta, double c_m = 1.0,
                                double c_T = 1.0);

double compute_D(double m, double lambda, double B, int n, int d,
                 double init_loss_frob);

NetworkState gd_step(const NetworkState& net, double eta,
                     const Gradient& grad);

/// Full GD run from a symmetric init. In theory mode lambda is measured
/// from the initial Gram matrix and eta follows the theorem formula at
/// the run width; in practical mode cfg.eta is used as given.
TrainTrace train(const Dataset& data, const TrainConfig& cfg,
                 std::uint64_t seed, TheoryParams* params_out = nullptr);

InductionReport monitor_induction(const TrainTrace& trace,
                                  const TheoryParams& params);

DecompositionRecord loss_decomposition(const NetworkState& net_tau,
                                       const Dataset& data, double eta);

}  // namespace softnet
