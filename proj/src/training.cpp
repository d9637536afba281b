#include "softnet/training.hpp"

#include <cmath>
#include <limits>

#include "softnet/kernel.hpp"
#include "softnet/rng.hpp"

namespace softnet {

NetworkState symmetric_init(int m, int d1, int d2, double sigma,
                            std::uint64_t seed) {
  if (m < 2 || m % 2 != 0)
    throw ValueError("symmetric_init: m must be even and >= 2");
  if (d1 < 1 || d2 < 1) throw DimensionError("symmetric_init: bad dimensions");
  if (!(sigma > 0.0)) throw ValueError("symmetric_init: sigma must be positive");
  Rng rng(seed);
  NetworkState net;
  net.W.resize(d1, m);
  net.a.resize(d2, m);
  for (int k = 0; k < m / 2; ++k) {
    const Vector w = rng.gaussian_vector(d1, sigma);
    net.W.col(2 * k) = w;
    net.W.col(2 * k + 1) = w;
    for (int l = 0; l < d2; ++l) {
      const double s = rng.sign();
      net.a(l, 2 * k) = s;
      net.a(l, 2 * k + 1) = -s;
    }
  }
  return net;
}

double compute_B(double sigma, int n, int d, double delta, double C) {
  if (!(sigma > 0.0) || !(C > 0.0) || !(delta > 0.0) || !(delta < 1.0))
    throw ValueError("compute_B: need sigma, C > 0 and delta in (0, 1)");
  const double ratio = static_cast<double>(n) * d / delta;
  if (ratio <= 1.0) throw ValueError("compute_B: nd/delta must exceed 1");
  return std::max(C * sigma * std::sqrt(std::log(ratio)), 1.0);
}

TheoryParams theory_hyperparams(int n, int d, double lambda, double B,
                                double eps, double delta, double c_m,
                                double c_T) {
  if (!(lambda > 0.0)) throw ValueError("theory_hyperparams: lambda must be positive");
  if (!(eps > 0.0) || !(delta > 0.0) || !(delta < 1.0) || B < 1.0)
    throw ValueError("theory_hyperparams: bad parameters");
  const double nd = static_cast<double>(n) * d;
  const double n2d2 = nd * nd;
  const double log_term = std::log(nd / delta);
  TheoryParams p;
  p.delta = delta;
  p.eps = eps;
  p.B = B;
  p.lambda = lambda;
  p.m = c_m * n2d2 * std::exp(18.0 * B) * log_term * log_term /
        (lambda * lambda);
  p.eta = 0.1 * lambda / (p.m * n2d2 * std::exp(16.0 * B));
  p.T_hat = c_T * std::log(nd / eps) / (p.m * p.eta * lambda);
  p.R = lambda / (2.0 * nd * std::exp(10.0 * B));
  return p;
}

double compute_D(double m, double lambda, double B, int n, int d,
                 double init_loss_frob) {
  if (!(m > 0.0) || !(lambda > 0.0) || init_loss_frob < 0.0)
    throw ValueError("compute_D: bad parameters");
  return 4.0 * std::exp(3.0 * B) *
         std::sqrt(static_cast<double>(n) * d) * init_loss_frob /
         (m * lambda);
}

NetworkState gd_step(const NetworkState& net, double eta,
                     const Gradient& grad) {
  if (grad.rows() != net.W.rows() || grad.cols() != net.W.cols())
    throw DimensionError("gd_step: gradient shape mismatch");
  NetworkState out = net;
  out.W -= eta * grad;
  return out;
}

DecompositionRecord loss_decomposition(const NetworkState& net_tau,
                                       const Dataset& data, double eta) {
  const int m = net_tau.m();
  const int n = data.n();
  const int d2 = data.d2();
  const Gradient grad = analytic_gradient(net_tau, data);
  const NetworkState net_next = gd_step(net_tau, eta, grad);

  Matrix F_tau(d2, n), F_next(d2, n), v0(d2, n), v1(d2, n);
  for (int i = 0; i < n; ++i) {
    const Vector x = data.X.col(i);
    const SoftmaxState st = softmax_state(net_tau.W, x);
    const SoftmaxState stn = softmax_state(net_next.W, x);
    F_tau.col(i) = static_cast<double>(m) * (net_tau.a * st.S);
    F_next.col(i) = static_cast<double>(m) * (net_tau.a * stn.S);
    // normalizer-drift term: old exponentials are replaced but the
    // normalizer change is isolated here
    v0.col(i) = static_cast<double>(m) * (1.0 / stn.alpha - 1.0 / st.alpha) *
                (net_tau.a * stn.exps);
    const Vector xg = grad.transpose() * x;  // <Delta w_r, x_i> per r
    v1.col(i) = -static_cast<double>(m) * eta *
                (net_tau.a * (st.S.array() * xg.array()).matrix());
  }
  const Matrix dF = F_next - F_tau;
  const Matrix v2 = dF - v0 - v1;
  const Matrix res = F_tau - data.Y;

  DecompositionRecord rec;
  rec.C0 = 2.0 * (res.array() * v0.array()).sum();
  rec.C1 = 2.0 * (res.array() * v1.array()).sum();
  rec.C2 = 2.0 * (res.array() * v2.array()).sum();
  rec.C3 = dF.squaredNorm();
  rec.v2_norm = v2.norm();

  // Q1 from v1's r2 = r part, against the kernel quadratic form
  double q1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector x = data.X.col(i);
    const SoftmaxState st = softmax_state(net_tau.W, x);
    const double sumS = st.S.sum();
    const Vector aS = net_tau.a * st.S;
    const Vector xg = grad.transpose() * x;
    const double s_xg = (st.S.array() * xg.array()).sum();
    for (int l = 0; l < d2; ++l) {
      const Vector al = net_tau.a.row(l).transpose();
      const double a_s_xg = (al.array() * st.S.array() * xg.array()).sum();
      const double Q1 = -(eta / m) * (sumS * a_s_xg - aS[l] * s_xg);
      q1 += Q1 * res(l, i);
    }
  }
  rec.q1_inner = 2.0 * static_cast<double>(m) * m * q1;

  const GramMatrix G = gram(net_tau, data);
  Vector vres(n * d2);
  for (int l = 0; l < d2; ++l)
    for (int i = 0; i < n; ++i) vres[l * n + i] = res(l, i);
  rec.q1_quadform =
      -2.0 * static_cast<double>(m) * eta * vres.dot(G.H * vres);
  return rec;
}

TrainTrace train(const Dataset& data, const TrainConfig& cfg,
                 std::uint64_t seed, TheoryParams* params_out) {
  if (cfg.max_steps < 0) throw ValueError("train: negative step count");
  const int n = data.n();
  const int d2 = data.d2();
  NetworkState net = symmetric_init(cfg.m, data.d1(), d2, cfg.sigma,
                                    derive_seed(seed, "init"));

  TheoryParams p;
  p.sigma = cfg.sigma;
  p.delta = cfg.delta;
  p.C = cfg.C;
  p.eps = cfg.eps;
  p.B = compute_B(cfg.sigma, n, data.d1(), cfg.delta, cfg.C);
  p.m = cfg.m;
  double eta = cfg.eta;
  if (cfg.mode == TrainMode::kTheory) {
    // lambda measured at the actual run width; eta then follows the
    // theorem formula with that width in place of the prescribed one
    p.lambda = min_eigenvalue(gram(net, data));
    if (!(p.lambda > 0.0))
      throw NumericError("train: initial kernel is not positive definite");
    const double n2d2 = static_cast<double>(n) * d2 * n * d2;
    eta = 0.1 * p.lambda / (cfg.m * n2d2 * std::exp(16.0 * p.B));
    p.eta = eta;
    p.R = p.lambda / (2.0 * n * d2 * std::exp(10.0 * p.B));
    p.T_hat = std::log(static_cast<double>(n) * d2 / cfg.eps) /
              (cfg.m * eta * p.lambda);
  } else {
    if (!(eta > 0.0)) throw ValueError("train: practical mode needs eta > 0");
    p.eta = eta;
  }

  TrainTrace trace{{}, net, net, data, eta, false};
  trace.steps.reserve(cfg.max_steps + 1);

  Prediction F = predict_all(net, data);
  double loss_prev = std::numeric_limits<double>::quiet_NaN();
  for (int tau = 0; tau <= cfg.max_steps; ++tau) {
    const double loss_now = (F - data.Y).squaredNorm();
    TrainStep row;
    row.step = tau;
    row.loss = loss_now;
    row.ratio = tau == 0 ? std::numeric_limits<double>::quiet_NaN()
                         : loss_now / loss_prev;
    double drift = 0.0;
    for (int r = 0; r < cfg.m; ++r)
      drift = std::max(drift, (net.W.col(r) - trace.init.W.col(r)).norm());
    row.max_drift = drift;

    if (!std::isfinite(loss_now)) {
      row.max_grad = std::numeric_limits<double>::quiet_NaN();
      trace.steps.push_back(row);
      trace.aborted = true;
      break;
    }

    const Gradient grad = analytic_gradient(net, data);
    row.max_grad = grad.colwise().norm().maxCoeff();
    if (cfg.record_decomposition && tau < cfg.max_steps) {
      row.decomposition = loss_decomposition(net, data, eta);
      row.has_decomposition = true;
    }
    trace.steps.push_back(row);
    if (tau == cfg.max_steps) break;

    net = gd_step(net, eta, grad);
    F = predict_all(net, data);
    loss_prev = loss_now;
  }
  trace.final = net;

  if (p.lambda > 0.0)
    p.D = compute_D(cfg.m, p.lambda, p.B, n, d2,
                    std::sqrt(trace.steps.front().loss));
  if (params_out) *params_out = p;
  return trace;
}

InductionReport monitor_induction(const TrainTrace& trace,
                                  const TheoryParams& params) {
  InductionReport rep;
  rep.D = params.D;
  rep.R = params.R;
  rep.D_lt_R = params.D < params.R;
  if (trace.steps.empty()) return rep;
  const double m = static_cast<double>(trace.init.m());
  const double rate_half = 1.0 - m * params.eta * params.lambda / 2.0;
  const double rate_quarter = 1.0 - m * params.eta * params.lambda / 4.0;
  const int n = trace.data.n();
  const int d2 = trace.data.d2();
  const double grad_factor =
      std::exp(3.0 * params.B) * std::sqrt(static_cast<double>(n) * d2);
  const double loss0 = trace.steps.front().loss;

  auto record = [](CheckReport& c, int step, double stat, double bound) {
    const double margin = stat - bound;
    c.worst_margin = std::max(c.worst_margin, margin);
    if (margin > 0.0) {
      ++c.violations;
      if (c.first_violation_step < 0) c.first_violation_step = step;
    }
  };

  double envelope = loss0;
  for (const TrainStep& row : trace.steps) {
    record(rep.drift, row.step, row.max_drift, params.D);
    record(rep.contraction, row.step, row.loss, envelope);
    if (row.step > 0)
      record(rep.step_ratio, row.step, row.ratio, rate_quarter);
    record(rep.eta_grad, row.step, trace.eta * row.max_grad, 0.01);
    record(rep.grad_bound, row.step, row.max_grad,
           grad_factor * std::sqrt(row.loss));
    envelope *= rate_half;
  }
  return rep;
}

}  // namespace softnet
