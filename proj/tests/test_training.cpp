#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "softnet/kernel.hpp"
#include "softnet/training.hpp"
#include "test_util.hpp"

using namespace softnet;

TEST_CASE("symmetric init yields exactly zero output") {
  const NetworkState net = symmetric_init(64, 3, 2, 1.0, 2024);
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vector x = rng.unit_ball(3);
    CHECK(forward(net, x).cwiseAbs().maxCoeff() <= 1e-12);
  }
  for (int l = 0; l < 2; ++l) CHECK(net.a.row(l).sum() == 0.0);
  CHECK_NOTHROW(net.validate());
}

TEST_CASE("symmetric init is deterministic and rejects odd widths") {
  const NetworkState a = symmetric_init(16, 2, 1, 0.5, 99);
  const NetworkState b = symmetric_init(16, 2, 1, 0.5, 99);
  CHECK(a.W == b.W);
  CHECK(a.a == b.a);
  CHECK_THROWS_AS(symmetric_init(15, 2, 1, 0.5, 99), ValueError);
  CHECK_THROWS_AS(symmetric_init(16, 2, 1, 0.0, 99), ValueError);
}

TEST_CASE("compute_B") {
  // clamp at 1 for small sigma
  CHECK(compute_B(1e-4, 4, 2, 0.1, 10.0) == 1.0);
  // direct arithmetic at sigma = 1
  CHECK(compute_B(1.0, 10, 2, 0.1, 10.0) ==
        doctest::Approx(10.0 * std::sqrt(std::log(200.0))).epsilon(1e-15));
  // linearity above the clamp
  CHECK(compute_B(2.0, 10, 2, 0.1, 10.0) ==
        doctest::Approx(2.0 * compute_B(1.0, 10, 2, 0.1, 10.0)));
  CHECK_THROWS_AS(compute_B(1.0, 1, 1, 1.0, 10.0), ValueError);
  CHECK_THROWS_AS(compute_B(-1.0, 4, 2, 0.1, 10.0), ValueError);
}

TEST_CASE("theory hyperparameters satisfy the defining identities") {
  const TheoryParams p = theory_hyperparams(4, 2, 0.5, 1.0, 1e-3, 0.1);
  CHECK(p.eta * p.m * 16.0 * 4.0 * std::exp(16.0) / p.lambda ==
        doctest::Approx(0.1).epsilon(1e-12));
  const double log_term = std::log(8.0 / 0.1);
  CHECK(p.m == doctest::Approx(64.0 * std::exp(18.0) * log_term * log_term /
                               0.25));
  CHECK(p.R == doctest::Approx(0.5 / (16.0 * std::exp(10.0))));
  CHECK(p.T_hat ==
        doctest::Approx(std::log(8.0 / 1e-3) / (p.m * p.eta * p.lambda)));
  // R at B=1, n=4, d=2, lambda=1
  const TheoryParams q = theory_hyperparams(4, 2, 1.0, 1.0, 1e-3, 0.1);
  CHECK(q.R == doctest::Approx(2.8375e-6).epsilon(1e-3));
  CHECK_THROWS_AS(theory_hyperparams(4, 2, 0.0, 1.0, 1e-3, 0.1), ValueError);
}

TEST_CASE("compute_D") {
  CHECK(compute_D(1000, 1.0, 1.0, 4, 2, 0.0) == 0.0);
  const double d1 = compute_D(500, 1.0, 1.0, 4, 2, 2.0);
  const double d2 = compute_D(1000, 1.0, 1.0, 4, 2, 2.0);
  CHECK(d1 == doctest::Approx(2.0 * d2));
  CHECK(compute_D(1000, 1.0, 1.0, 4, 2, 2.0) ==
        doctest::Approx(4.0 * std::exp(3.0) * std::sqrt(8.0) * 2.0 / 1000.0));
}

TEST_CASE("gd_step") {
  NetworkState net;
  net.W = Matrix::Constant(1, 2, 1.0);
  net.a = Matrix::Constant(1, 2, 1.0);
  const Gradient zero = Matrix::Zero(1, 2);
  CHECK(gd_step(net, 0.5, zero).W == net.W);
  Gradient g = Matrix::Constant(1, 2, 2.0);
  CHECK(gd_step(net, 0.0, g).W == net.W);
  CHECK(gd_step(net, 0.5, g).W(0, 0) == 0.0);
  CHECK_THROWS_AS(gd_step(net, 0.5, Matrix::Zero(2, 2)), DimensionError);
}

TEST_CASE("zero-step training records only the initial state") {
  const Dataset data = testutil::random_dataset(4, 2, 2, 7);
  TrainConfig cfg;
  cfg.mode = TrainMode::kPractical;
  cfg.m = 32;
  cfg.sigma = 0.5;
  cfg.eta = 1e-3;
  cfg.max_steps = 0;
  const TrainTrace trace = train(data, cfg, 11);
  REQUIRE(trace.steps.size() == 1);
  // F(0) = 0, so the squared-Frobenius trace loss is ||Y||_F^2
  CHECK(trace.steps[0].loss == doctest::Approx(data.Y.squaredNorm()));
  CHECK(trace.steps[0].max_drift == 0.0);
  CHECK(std::isnan(trace.steps[0].ratio));
}

TEST_CASE("training is deterministic") {
  const Dataset data = testutil::random_dataset(4, 2, 2, 8);
  TrainConfig cfg;
  cfg.mode = TrainMode::kPractical;
  cfg.m = 32;
  cfg.sigma = 0.5;
  cfg.eta = 1e-3;
  cfg.max_steps = 20;
  const TrainTrace a = train(data, cfg, 5);
  const TrainTrace b = train(data, cfg, 5);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].loss == b.steps[i].loss);
    CHECK(a.steps[i].max_grad == b.steps[i].max_grad);
  }
  CHECK(a.final.W == b.final.W);
}

TEST_CASE("theory mode satisfies the per-step monitors over 50 steps") {
  const Dataset data = testutil::random_dataset(4, 2, 2, 21);
  TrainConfig cfg;
  cfg.mode = TrainMode::kTheory;
  cfg.m = 512;
  cfg.sigma = 0.04;
  cfg.max_steps = 50;
  TheoryParams params;
  const TrainTrace trace = train(data, cfg, 31, &params);
  CHECK(params.B == doctest::Approx(1.0));
  CHECK(params.lambda > 0.0);
  const InductionReport rep = monitor_induction(trace, params);
  CHECK(rep.drift.violations == 0);
  CHECK(rep.contraction.violations == 0);
  CHECK(rep.step_ratio.violations == 0);
  CHECK(rep.eta_grad.violations == 0);
  CHECK(rep.grad_bound.violations == 0);
}

TEST_CASE("adversarial step size trips the eta-gradient monitor") {
  const Dataset data = testutil::random_dataset(4, 2, 2, 22);
  TrainConfig cfg;
  cfg.mode = TrainMode::kTheory;
  cfg.m = 512;
  cfg.sigma = 0.04;
  cfg.max_steps = 5;
  TheoryParams params;
  TrainTrace trace = train(data, cfg, 32, &params);
  // rescale eta as if a grossly wrong step size had been used
  double top_grad = 0.0;
  for (const TrainStep& row : trace.steps)
    top_grad = std::max(top_grad, row.max_grad);
  trace.eta = 0.02 / top_grad;
  TheoryParams bad = params;
  bad.eta = trace.eta;
  const InductionReport rep = monitor_induction(trace, bad);
  CHECK(rep.eta_grad.violations > 0);
}

TEST_CASE("loss decomposition identity and kernel form of Q1") {
  const Dataset data = testutil::random_dataset(4, 2, 2, 41);
  const double eta = 1e-3;
  for (int trial = 0; trial < 5; ++trial) {
    NetworkState net = symmetric_init(64, 2, 2, 0.5, 500 + trial);
    if (trial > 0) {
      // move off the symmetric point so F(tau) != 0
      Rng rng(600 + trial);
      for (int r = 0; r < net.m(); ++r)
        net.W.col(r) += rng.gaussian_vector(2, 0.05);
    }
    const DecompositionRecord rec = loss_decomposition(net, data, eta);
    const Matrix F = predict_all(net, data);
    const double loss_tau = (F - data.Y).squaredNorm();
    const NetworkState next =
        gd_step(net, eta, analytic_gradient(net, data));
    const double loss_next = (predict_all(next, data) - data.Y).squaredNorm();
    const double lhs = rec.C0 + rec.C1 + rec.C2 + rec.C3;
    const double rhs = loss_next - loss_tau;
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(loss_tau, 1e-12));
    // Q1 identity against the kernel quadratic form
    CHECK(rec.q1_inner ==
          doctest::Approx(rec.q1_quadform).epsilon(1e-8));
    // the Q1 part is nonpositive because H(tau) is p.s.d.
    CHECK(rec.q1_quadform <= 1e-15);
  }
}

TEST_CASE("v2 shrinks quadratically when eta halves") {
  const Dataset data = testutil::random_dataset(4, 2, 2, 42);
  NetworkState net = symmetric_init(64, 2, 2, 0.5, 43);
  Rng rng(44);
  for (int r = 0; r < net.m(); ++r)
    net.W.col(r) += rng.gaussian_vector(2, 0.05);
  const DecompositionRecord full = loss_decomposition(net, data, 1e-3);
  const DecompositionRecord half = loss_decomposition(net, data, 5e-4);
  const double factor = full.v2_norm / half.v2_norm;
  CHECK(factor >= 3.5);
  CHECK(factor <= 4.5);
}
