#include "softnet/diffusion.hpp"

#include <cmath>
#include <string>

namespace softnet {

namespace {

double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_g(const OUParams& params, double t) {
  if (params.constant_g()) return params.g_const * t;
  if (t == 0.0) return 0.0;
  const auto& f = params.g_fn;
  const double fa = f(0.0), fb = f(t), fm = f(0.5 * t);
  const double whole = simpson(f, 0.0, t, fa, fm, fb);
  return adaptive_simpson(f, 0.0, t, fa, fm, fb, whole, 1e-10, 40);
}

}  // namespace

double mean_decay(double t, const OUParams& params) {
  if (t < 0.0 || t > params.T)
    throw ValueError("mean_decay: t outside [0, T]");
  return std::exp(-0.5 * integrate_g(params, t));
}

Vector forward_sample(const Vector& x0, double t, const OUParams& params,
                      Rng& rng) {
  const double mbar = mean_decay(t, params);
  const double sigma = std::sqrt(std::max(0.0, 1.0 - mbar * mbar));
  return mbar * x0 + sigma * rng.gaussian_vector(static_cast<int>(x0.size()));
}

ScoreDataset build_dataset(const P0Sampler& p0, int d, int n,
                           const OUParams& params, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ValueError("build_dataset: need n, d >= 1");
  Rng rng(derive_seed(seed, "score-dataset"));
  Vector raw_t(n);
  Matrix raw_x0(d, n), raw_xt(d, n);
  double rho = 1.0;
  for (int i = 0; i < n; ++i) {
    const Vector x0 = p0(rng);
    if (x0.size() != d) throw DimensionError("build_dataset: sampler dimension");
    const double t = rng.uniform(params.T0, params.T);
    const Vector xt = forward_sample(x0, t, params, rng);
    raw_t[i] = t;
    raw_x0.col(i) = x0;
    raw_xt.col(i) = xt;
    rho = std::max({rho, x0.norm(), xt.norm()});
  }
  Matrix X(d + 1, n), Y(d, n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    X(0, i) = raw_t[i] / params.T * inv_sqrt2;
    X.block(1, i, d, 1) = raw_xt.col(i) / rho * inv_sqrt2;
    Y.col(i) = raw_x0.col(i) / rho;
  }
  return ScoreDataset{Dataset(std::move(X), std::move(Y)),
                      std::move(raw_t), std::move(raw_xt), std::move(raw_x0),
                      Scaler{params.T, rho}};
}

TrainTrace train_score_net(const ScoreDataset& dataset, const TrainConfig& cfg,
                           std::uint64_t seed, TheoryParams* params_out) {
  return train(dataset.data, cfg, seed, params_out);
}

Vector denoiser_output(const NetworkState& net, double t, const Vector& x,
                       const Scaler& scaler) {
  if (x.size() + 1 != net.d1())
    throw DimensionError("denoiser_output: input dimension mismatch");
  Vector u(x.size() + 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  u[0] = t / scaler.T * inv_sqrt2;
  u.tail(x.size()) = x / scaler.rho * inv_sqrt2;
  return scaler.rho * forward(net, u);
}

Vector denoiser_to_score(const NetworkState& net, double t, const Vector& x,
                         const OUParams& params, const Scaler& scaler) {
  if (t < params.T0)
    throw ValueError("denoiser_to_score: t below the T0 cutoff");
  const double mbar = mean_decay(t, params);
  const double var = 1.0 - mbar * mbar;
  return (mbar * denoiser_output(net, t, x, scaler) - x) / var;
}

Vector gaussian_oracle_score(double t, const Vector& x, const OUParams& params,
                             const GaussianOracle& oracle) {
  if (!(oracle.s2 > 0.0)) throw ValueError("gaussian_oracle_score: s2 <= 0");
  const double mbar = mean_decay(t, params);
  const double var = mbar * mbar * oracle.s2 + (1.0 - mbar * mbar);
  return -x / var;
}

ScoreErrorResult score_error(const ScoreFn& score_fn,
                             const GaussianOracle& oracle, int d,
                             const OUParams& params, const TimeWeight& weight,
                             int mc_samples, std::uint64_t seed) {
  if (mc_samples < 1) throw ValueError("score_error: mc_samples >= 1 required");
  Rng rng(derive_seed(seed, "score-error"));
  const double s = std::sqrt(oracle.s2);
  double sum = 0.0, sum_sq = 0.0;
  for (int j = 0; j < mc_samples; ++j) {
    const double t = rng.uniform(params.T0, params.T);
    const Vector x0 = rng.gaussian_vector(d, s);
    const Vector xt = forward_sample(x0, t, params, rng);
    const double w = weight ? weight(t) : 1.0;
    const double err =
        w * (score_fn(t, xt) - gaussian_oracle_score(t, xt, params, oracle))
                .squaredNorm();
    sum += err;
    sum_sq += err * err;
  }
  ScoreErrorResult res;
  res.samples = mc_samples;
  res.mean = sum / mc_samples;
  const double var =
      std::max(0.0, sum_sq / mc_samples - res.mean * res.mean);
  res.std_error = std::sqrt(var / mc_samples);
  return res;
}

Vector backward_sample_from(const ScoreFn& score_fn, Vector y,
                            const OUParams& params, int steps, Rng& rng,
                            double noise_scale) {
  if (steps < 1) throw ValueError("backward_sample: steps >= 1 required");
  const double horizon = params.T - params.T0;
  const double dt = horizon / steps;
  const int d = static_cast<int>(y.size());
  for (int k = 0; k < steps; ++k) {
    const double t = params.T - k * dt;  // forward-time coordinate
    const double gt = params.g(t);
    y += (0.5 * gt * y + gt * score_fn(t, y)) * dt;
    if (noise_scale != 0.0)
      y += noise_scale * std::sqrt(gt * dt) * rng.gaussian_vector(d);
    if (!y.allFinite())
      throw NumericError("backward_sample: non-finite state at step " +
                         std::to_string(k));
  }
  return y;
}

Vector backward_sample(const ScoreFn& score_fn, int d, const OUParams& params,
                       int steps, Rng& rng, double noise_scale) {
  Vector y = rng.gaussian_vector(d);
  return backward_sample_from(score_fn, std::move(y), params, steps, rng,
                              noise_scale);
}

}  // namespace softnet
