#include "softnet/kernel.hpp"

#include <cmath>

#include "softnet/model.hpp"
#include "softnet/rng.hpp"
#include "softnet/training.hpp"

namespace softnet {

namespace {

// t_{l,i,r} = <v_{l,r}, S_i> * m * S_{i,r} with <v_{l,r}, S> expanded to
// a_{l,r} * sum(S) - <a_l, S>. Columns are indexed c = l * n + i.
Matrix feature_columns(const NetworkState& net, const Matrix& X) {
  const int m = net.m();
  const int d2 = net.d2();
  const int n = static_cast<int>(X.cols());
  Matrix T(m, n * d2);
  for (int i = 0; i < n; ++i) {
    const SoftmaxState st = softmax_state(net.W, X.col(i));
    const double sumS = st.S.sum();
    const Vector aS = net.a * st.S;
    for (int l = 0; l < d2; ++l) {
      T.col(l * n + i) =
          (net.a.row(l).transpose().array() * sumS - aS[l]) *
          (static_cast<double>(m) * st.S.array());
    }
  }
  return T;
}

Matrix input_gram(const Matrix& Xa, const Matrix& Xb, int d2a, int d2b) {
  const int na = static_cast<int>(Xa.cols());
  const int nb = static_cast<int>(Xb.cols());
  const Matrix G = Xa.transpose() * Xb;  // na x nb
  Matrix P(na * d2a, nb * d2b);
  for (int l1 = 0; l1 < d2a; ++l1)
    for (int l2 = 0; l2 < d2b; ++l2)
      P.block(l1 * na, l2 * nb, na, nb) = G;
  return P;
}

NetworkState random_instance(int d, int m, int d2, double sigma, Rng& rng) {
  NetworkState net;
  net.W.resize(d, m);
  for (int r = 0; r < m; ++r) net.W.col(r) = rng.gaussian_vector(d, sigma);
  net.a.resize(d2, m);
  for (int l = 0; l < d2; ++l)
    for (int r = 0; r < m; ++r) net.a(l, r) = rng.sign();
  return net;
}

Matrix perturb_within(const Matrix& W, double R, Rng& rng) {
  Matrix out = W;
  for (int r = 0; r < W.cols(); ++r) {
    Vector dir = rng.gaussian_vector(static_cast<int>(W.rows()));
    const double norm = dir.norm();
    if (norm == 0.0) continue;
    const double radius = R * rng.uniform();
    out.col(r) += dir * (radius / norm);
  }
  return out;
}

Matrix sample_inputs(int d, int n, Rng& rng) {
  Matrix X(d, n);
  for (int i = 0; i < n; ++i) X.col(i) = rng.unit_ball(d);
  return X;
}

}  // namespace

GramMatrix gram(const NetworkState& net, const Dataset& data) {
  if (net.d1() != data.d1() || net.d2() != data.d2())
    throw DimensionError("gram: network/data dimension mismatch");
  const int n = data.n();
  const int d2 = data.d2();
  const Matrix T = feature_columns(net, data.X);
  const Matrix P = input_gram(data.X, data.X, d2, d2);
  GramMatrix G;
  G.n = n;
  G.d2 = d2;
  G.H = ((T.transpose() * T).array() * P.array()).matrix() /
        static_cast<double>(net.m());
  G.H = 0.5 * (G.H + G.H.transpose()).eval();
  return G;
}

GramMatrix gram_bruteforce(const NetworkState& net, const Dataset& data) {
  if (net.d1() != data.d1() || net.d2() != data.d2())
    throw DimensionError("gram_bruteforce: network/data dimension mismatch");
  const int n = data.n();
  const int d2 = data.d2();
  const int m = net.m();
  std::vector<SoftmaxState> states(n);
  for (int i = 0; i < n; ++i)
    states[i] = softmax_state(net.W, data.X.col(i));
  GramMatrix G;
  G.n = n;
  G.d2 = d2;
  G.H = Matrix::Zero(n * d2, n * d2);
  for (int l1 = 0; l1 < d2; ++l1) {
    for (int l2 = 0; l2 < d2; ++l2) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double xx = data.X.col(i).dot(data.X.col(j));
          double acc = 0.0;
          for (int r = 0; r < m; ++r) {
            // v_{l,r} = a_{l,r} * 1_m - a_l, taken literally
            Vector v1 = Vector::Constant(m, net.a(l1, r)) -
                        net.a.row(l1).transpose();
            Vector v2 = Vector::Constant(m, net.a(l2, r)) -
                        net.a.row(l2).transpose();
            acc += v1.dot(states[i].S) * m * states[i].S[r] *
                   v2.dot(states[j].S) * m * states[j].S[r];
          }
          G.H(l1 * n + i, l2 * n + j) = xx * acc / static_cast<double>(m);
        }
      }
    }
  }
  G.H = 0.5 * (G.H + G.H.transpose()).eval();
  return G;
}

namespace {

double extreme_eigenvalue(const GramMatrix& G, bool smallest) {
  if (G.H.rows() != G.H.cols())
    throw DimensionError("eigenvalue: matrix not square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(G.H);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigenvalue: eigensolver failed to converge");
  const int idx = smallest ? 0 : static_cast<int>(G.H.rows()) - 1;
  const double lambda = solver.eigenvalues()[idx];
  const Vector v = solver.eigenvectors().col(idx);
  const double residual = (G.H * v - lambda * v).norm();
  if (residual > 1e-8 * G.H.norm())
    throw NumericError("eigenvalue: residual check failed");
  return lambda;
}

}  // namespace

double min_eigenvalue(const GramMatrix& G) {
  return extreme_eigenvalue(G, true);
}

double max_eigenvalue(const GramMatrix& G) {
  return extreme_eigenvalue(G, false);
}

TestKernel test_kernel(const NetworkState& net, const Dataset& data,
                       const Vector& x_te) {
  if (x_te.size() != net.d1())
    throw DimensionError("test_kernel: test point dimension mismatch");
  if (x_te.norm() > 1.0 + 1e-12)
    throw ValueError("test_kernel: ||x_te||_2 > 1");
  const int n = data.n();
  const int d2 = data.d2();
  Matrix Xte(net.d1(), 1);
  Xte.col(0) = x_te;
  const Matrix Tte = feature_columns(net, Xte);     // m x d2
  const Matrix T = feature_columns(net, data.X);    // m x (n d2)
  const Matrix P = input_gram(Xte, data.X, d2, d2); // d2 x (n d2)
  TestKernel K;
  K.K = ((Tte.transpose() * T).array() * P.array()).matrix() /
        static_cast<double>(net.m());
  return K;
}

TestKernel test_kernel_bruteforce(const NetworkState& net, const Dataset& data,
                                  const Vector& x_te) {
  const int n = data.n();
  const int d2 = data.d2();
  const int m = net.m();
  const SoftmaxState ste = softmax_state(net.W, x_te);
  TestKernel K;
  K.K = Matrix::Zero(d2, n * d2);
  for (int l1 = 0; l1 < d2; ++l1) {
    for (int l2 = 0; l2 < d2; ++l2) {
      for (int j = 0; j < n; ++j) {
        const SoftmaxState stj = softmax_state(net.W, data.X.col(j));
        const double xx = x_te.dot(data.X.col(j));
        double acc = 0.0;
        for (int r = 0; r < m; ++r) {
          Vector v1 = Vector::Constant(m, net.a(l1, r)) -
                      net.a.row(l1).transpose();
          Vector v2 = Vector::Constant(m, net.a(l2, r)) -
                      net.a.row(l2).transpose();
          acc += v1.dot(ste.S) * m * ste.S[r] * v2.dot(stj.S) * m * stj.S[r];
        }
        K.K(l1, l2 * n + j) = xx * acc / static_cast<double>(m);
      }
    }
  }
  return K;
}

PerturbReport perturbation_experiment(int n, int d, int m, double sigma,
                                      double R, int trials,
                                      std::uint64_t seed,
                                      const PerturbOptions& opts) {
  if (!(R > 0.0 && R < 0.01))
    throw ValueError("perturbation_experiment: R must lie in (0, 0.01)");
  if (n < 1 || d < 1 || m < 1 || trials < 0)
    throw ValueError("perturbation_experiment: bad sizes");
  PerturbReport report;
  report.B = compute_B(sigma, n, d, opts.delta, opts.C);
  report.frob_bound = R * n * d * std::exp(10.0 * report.B);
  report.entry_bound = R * std::exp(10.0 * report.B);
  report.trials.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "perturb-trial", t));
    const Matrix X = sample_inputs(d, n, rng);
    NetworkState base = random_instance(d, m, 1, sigma, rng);
    NetworkState moved = base;
    moved.W = perturb_within(base.W, R, rng);
    const Dataset data(X, Matrix::Zero(1, n));
    const Matrix Hb = gram(base, data).H;
    const Matrix Hm = gram(moved, data).H;
    PerturbTrial trial;
    trial.frob_dev = (Hb - Hm).norm();
    trial.max_entry_dev = (Hb - Hm).cwiseAbs().maxCoeff();
    trial.frob_violated = trial.frob_dev > report.frob_bound;
    trial.entry_violated = trial.max_entry_dev > report.entry_bound;
    report.frob_violations += trial.frob_violated ? 1 : 0;
    report.entry_violations += trial.entry_violated ? 1 : 0;
    report.trials.push_back(trial);
  }
  return report;
}

AuditReport bounds_audit(int n, int d, int m, double sigma, double delta,
                         double R, int trials, std::uint64_t seed, double C) {
  if (n < 1 || d < 1 || m < 1 || trials < 0 || R < 0.0)
    throw ValueError("bounds_audit: bad parameters");
  AuditReport report;
  const double B = compute_B(sigma, n, d, delta, C);
  report.B = B;
  report.parts.resize(13);
  const double bounds[13] = {
      B,
      B + R,
      2.0 * R,
      1.0,  // normalized two-sided range check for exp(<w,x>)
      1.0,  // same for the perturbed weights
      4.0 * R,
      R * std::exp(B + R),
      m * R * std::exp(B + R),
      (R / m) * std::exp(3.0 * B + 2.0 * R),
      std::exp(2.0 * B) / m,
      std::exp(2.0 * B + 2.0 * R) / m,
      (R / m) * std::exp(4.0 * B + 3.0 * R),
      R * std::exp(4.0 * B + 3.0 * R),
  };
  for (int k = 0; k < 13; ++k) {
    report.parts[k].part = k + 1;
    report.parts[k].trials = trials;
    report.parts[k].bound = bounds[k];
  }
  const double e_lo = std::exp(-B), e_hi = std::exp(B);
  const double ep_lo = std::exp(-(B + R)), ep_hi = std::exp(B + R);

  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "audit-trial", t));
    const Matrix X = sample_inputs(d, n, rng);
    NetworkState base = random_instance(d, m, 1, sigma, rng);
    const Matrix Wt = perturb_within(base.W, R, rng);

    double stat[13] = {};
    for (int i = 0; i < n; ++i) {
      const Vector x = X.col(i);
      const SoftmaxState st = softmax_state(base.W, x);
      const SoftmaxState stt = softmax_state(Wt, x);
      for (int r = 0; r < m; ++r) {
        const double ip = base.W.col(r).dot(x);
        const double ipt = Wt.col(r).dot(x);
        const double ex = st.exps[r];
        const double ext = stt.exps[r];
        stat[0] = std::max(stat[0], std::abs(ip));
        stat[1] = std::max(stat[1], std::abs(ipt));
        stat[3] = std::max(stat[3], std::max(ex / e_hi, e_lo / ex));
        stat[4] = std::max(stat[4], std::max(ext / ep_hi, ep_lo / ext));
        stat[6] = std::max(stat[6], std::abs(ex - ext));
        stat[9] = std::max(stat[9], st.S[r]);
        stat[10] = std::max(stat[10], stt.S[r]);
        stat[11] = std::max(stat[11], std::abs(st.S[r] - stt.S[r]));
        for (int j = 0; j < n; ++j) {
          const Vector xij = x + X.col(j);
          const double gap = (base.W.col(r) - Wt.col(r)).dot(xij);
          stat[2] = std::max(stat[2], std::abs(gap));
          stat[5] = std::max(stat[5], std::abs(std::exp(gap) - 1.0));
        }
      }
      stat[7] = std::max(stat[7], std::abs(st.alpha - stt.alpha));
      stat[8] = std::max(stat[8], std::abs(1.0 / st.alpha - 1.0 / stt.alpha));
      stat[12] = std::max(stat[12], (st.S - stt.S).lpNorm<1>());
    }
    for (int k = 0; k < 13; ++k) {
      report.parts[k].max_stat = std::max(report.parts[k].max_stat, stat[k]);
      if (stat[k] > bounds[k]) ++report.parts[k].violations;
    }
  }
  return report;
}

}  // namespace softnet
