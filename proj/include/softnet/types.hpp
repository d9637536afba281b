#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace softnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ValueError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training data: inputs X (d1 x n) and labels Y (d2 x n), every column
/// constrained to the unit ball.
struct Dataset {
  Matrix X;
  Matrix Y;

  Dataset(Matrix X_, Matrix Y_);

  int n() const { return static_cast<int>(X.cols()); }
  int d1() const { return static_cast<int>(X.rows()); }
  int d2() const { return static_cast<int>(Y.rows()); }
};

/// Two-layer softmax network parameters. Only W trains; a holds fixed
/// +-1 output signs, row l being the sign vector for output coordinate l.
struct NetworkState {
  Matrix W;  // d1 x m, column r = w_r
  Matrix a;  // d2 x m, entries in {-1, +1}

  int m() const { return static_cast<int>(W.cols()); }
  int d1() const { return static_cast<int>(W.rows()); }
  int d2() const { return static_cast<int>(a.rows()); }

  void validate() const;
};

/// Per-input softmax quantities: unshifted exponentials, their sum, and
/// the normalized softmax vector.
struct SoftmaxState {
  Vector exps;
  double alpha = 0.0;
  Vector S;
};

using Prediction = Matrix;  // d2 x n
using Gradient = Matrix;    // d1 x m, column r = Delta w_r

}  // namespace softnet
