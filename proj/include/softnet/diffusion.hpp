#pragma once

#include <cstdint>
#include <functional>

#include "softnet/rng.hpp"
#include "softnet/training.hpp"
#include "softnet/types.hpp"

namespace softnet {

/// Ornstein-Uhlenbeck forward process dx = -1/2 g(t) x dt + sqrt(g(t)) dB
/// on [0, T], scores evaluated only on [T0, T].
struct OUParams {
  double T = 1.0;
  double T0 = 0.01;
  double g_const = 1.0;
  std::function<double(double)> g_fn;  // optional, overrides g_const

  double g(double t) const { return g_fn ? g_fn(t) : g_const; }
  bool constant_g() const { return !g_fn; }
};

/// m_bar(t) = exp(-1/2 int_0^t g); closed form for constant g, adaptive
/// Simpson quadrature (tol 1e-10) otherwise.
double mean_decay(double t, const OUParams& params);

Vector forward_sample(const Vector& x0, double t, const OUParams& params,
                      Rng& rng);

struct Scaler {
  double T = 1.0;    // time divisor
  double rho = 1.0;  // space divisor
};

/// Denoising dataset: scaled inputs (t, x(t)) / sqrt(2) with t / T and
/// x / rho, labels x(0) / rho. The scaler inverts the normalization.
struct ScoreDataset {
  Dataset data;  // X is (d+1) x n, Y is d x n, both scaled
  Vector raw_t;
  Matrix raw_xt;
  Matrix raw_x0;
  Scaler scaler;
};

using P0Sampler = std::function<Vector(Rng&)>;

ScoreDataset build_dataset(const P0Sampler& p0, int d, int n,
                           const OUParams& params, std::uint64_t seed);

TrainTrace train_score_net(const ScoreDataset& dataset, const TrainConfig& cfg,
                           std::uint64_t seed,
                           TheoryParams* params_out = nullptr);

/// Denoiser output in raw coordinates: rho * F(net, scaled (t, x)).
Vector denoiser_output(const NetworkState& net, double t, const Vector& x,
                       const Scaler& scaler);

/// Tweedie conversion s(t, x) = (m_bar(t) D(t, x) - x) / (1 - m_bar(t)^2).
Vector denoiser_to_score(const NetworkState& net, double t, const Vector& x,
                         const OUParams& params, const Scaler& scaler);

struct GaussianOracle {
  double s2 = 1.0;  // p_0 = Normal(0, s2 I)
};

/// grad log p_t(x) = -x / (m_bar^2 s2 + 1 - m_bar^2) for Gaussian p_0.
Vector gaussian_oracle_score(double t, const Vector& x, const OUParams& params,
                             const GaussianOracle& oracle);

using ScoreFn = std::function<Vector(double, const Vector&)>;
using TimeWeight = std::function<double(double)>;

struct ScoreErrorResult {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Monte Carlo estimate of E_{t ~ U(T0,T)} lambda(t) E ||s - grad log p_t||^2
/// with x(t) drawn from the forward process started at p_0 of the oracle.
ScoreErrorResult score_error(const ScoreFn& score_fn,
                             const GaussianOracle& oracle, int d,
                             const OUParams& params, const TimeWeight& weight,
                             int mc_samples, std::uint64_t seed);

/// Euler-Maruyama on the reverse SDE over [0, T - T0], started from the
/// given state. noise_scale 0 gives the deterministic drift-only scheme.
Vector backward_sample_from(const ScoreFn& score_fn, Vector y,
                            const OUParams& params, int steps, Rng& rng,
                            double noise_scale = 1.0);

/// Same, started from y(0) ~ Normal(0, I_d).
Vector backward_sample(const ScoreFn& score_fn, int d, const OUParams& params,
                       int steps, Rng& rng, double noise_scale = 1.0);

}  // namespace softnet
