#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "softnet/model.hpp"
#include "softnet/rng.hpp"
#include "test_util.hpp"

using namespace softnet;

TEST_CASE("softmax is uniform at W = 0") {
  Matrix W = Matrix::Zero(3, 8);
  Vector x(3);
  x << 0.2, -0.1, 0.5;
  const SoftmaxState st = softmax_state(W, x);
  CHECK(st.S.size() == 8);
  for (int r = 0; r < 8; ++r) CHECK(st.S[r] == doctest::Approx(1.0 / 8));
  CHECK(st.alpha == doctest::Approx(8.0));
  CHECK(st.S.sum() == doctest::Approx(1.0));
}

TEST_CASE("softmax handles large logits without overflow") {
  Matrix W(1, 3);
  W << 700.0, 710.0, 705.0;
  Vector x(1);
  x << 1.0;
  const SoftmaxState st = softmax_state(W, x);
  CHECK(st.S.allFinite());
  CHECK(st.S.sum() == doctest::Approx(1.0));
  CHECK(st.S[1] > st.S[2]);
  CHECK(st.S[2] > st.S[0]);
}

TEST_CASE("softmax alpha equals the sum of exponentials") {
  const NetworkState net = testutil::random_net(4, 10, 1, 0.5, 11);
  Rng rng(12);
  const Vector x = rng.unit_ball(4);
  const SoftmaxState st = softmax_state(net.W, x);
  double alpha = 0.0;
  for (int r = 0; r < 10; ++r) alpha += std::exp(net.W.col(r).dot(x));
  CHECK(st.alpha == doctest::Approx(alpha).epsilon(1e-12));
  for (int r = 0; r < 10; ++r)
    CHECK(st.exps[r] ==
          doctest::Approx(std::exp(net.W.col(r).dot(x))).epsilon(1e-12));
}

TEST_CASE("forward hand case") {
  // m = 2, S uniform, F_l = m <a_l, S> = a_{l,1} + a_{l,2}
  NetworkState net;
  net.W = Matrix::Zero(2, 2);
  net.a.resize(1, 2);
  net.a << 1.0, 1.0;
  Vector x(2);
  x << 0.3, 0.4;
  const Vector f = forward(net, x);
  CHECK(f[0] == doctest::Approx(2.0));
  net.a << 1.0, -1.0;
  CHECK(forward(net, x)[0] == doctest::Approx(0.0));
}

TEST_CASE("loss is half the squared Frobenius residual") {
  Matrix F(2, 2), Y(2, 2);
  F << 1, 2, 3, 4;
  Y << 0, 2, 3, 2;
  CHECK(loss(F, Y) == doctest::Approx(0.5 * (1.0 + 4.0)));
  CHECK(loss(Y, Y) == 0.0);
}

TEST_CASE("dataset validation") {
  Matrix X = Matrix::Zero(2, 3), Y = Matrix::Zero(1, 3);
  CHECK_NOTHROW(Dataset(X, Y));
  CHECK_THROWS_AS(Dataset(X, Matrix::Zero(1, 2)), DimensionError);
  Matrix Xbig = X;
  Xbig(0, 0) = 2.0;
  CHECK_THROWS_AS(Dataset(Xbig, Y), ValueError);
  Matrix Xnan = X;
  Xnan(0, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset(Xnan, Y), ValueError);
}

TEST_CASE("network state validation") {
  NetworkState net = testutil::random_net(2, 4, 1, 0.1, 3);
  CHECK_NOTHROW(net.validate());
  net.a(0, 0) = 0.5;
  CHECK_THROWS_AS(net.validate(), ValueError);
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng seeds(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(seeds.next_u64() % 7);
    const int d1 = 1 + static_cast<int>(seeds.next_u64() % 4);
    const int d2 = 1 + static_cast<int>(seeds.next_u64() % 3);
    const int m = 4 + 2 * static_cast<int>(seeds.next_u64() % 31);
    const Dataset data = testutil::random_dataset(n, d1, d2, 100 + trial);
    const NetworkState net = testutil::random_net(d1, m, d2, 0.3, 200 + trial);
    const Gradient g = analytic_gradient(net, data);
    const Gradient fd = fd_gradient(net, data, 1e-5);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK((g - fd).cwiseAbs().maxCoeff() / scale <= 1e-6);
  }
}

TEST_CASE("gradient forms agree to machine precision") {
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset data = testutil::random_dataset(5, 3, 2, 300 + trial);
    const NetworkState net = testutil::random_net(3, 16, 2, 0.4, 400 + trial);
    const Gradient gc = analytic_gradient(net, data, GradientForm::kClaim);
    const Gradient gd = analytic_gradient(net, data, GradientForm::kDefinition);
    const double scale = std::max(1.0, gc.cwiseAbs().maxCoeff());
    CHECK((gc - gd).cwiseAbs().maxCoeff() / scale <= 1e-12);
  }
}

TEST_CASE("fd_gradient rejects nonpositive step") {
  const Dataset data = testutil::random_dataset(2, 2, 1, 5);
  const NetworkState net = testutil::random_net(2, 4, 1, 0.1, 6);
  CHECK_THROWS_AS(fd_gradient(net, data, 0.0), ValueError);
  CHECK_THROWS_AS(fd_gradient(net, data, -1e-5), ValueError);
}

TEST_CASE("rng streams are deterministic and split cleanly") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.gaussian() == b.gaussian());
  CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
  CHECK(derive_seed(1, "x", 0) != derive_seed(1, "x", 1));
  CHECK(derive_seed(1, "x", 7) == derive_seed(1, "x", 7));
  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  Rng ball(10);
  for (int i = 0; i < 100; ++i) CHECK(ball.unit_ball(3).norm() <= 1.0);
}
