#pragma once

#include <cstdint>
#include <vector>

#include "softnet/types.hpp"

namespace softnet {

/// The softmax NTK Gram matrix in block layout: entry ((l1, i), (l2, j))
/// with flat index l * n + i.
struct GramMatrix {
  Matrix H;  // (n*d2) x (n*d2), symmetric
  int n = 0;
  int d2 = 0;
};

/// Kernel rows for a test input, row l1, column l2 * n + j.
struct TestKernel {
  Matrix K;  // d2 x (n*d2)
};

struct PerturbTrial {
  double frob_dev = 0.0;
  double max_entry_dev = 0.0;
  bool frob_violated = false;
  bool entry_violated = false;
};

struct PerturbReport {
  double B = 0.0;
  double frob_bound = 0.0;   // R * n * d * exp(10B)
  double entry_bound = 0.0;  // R * exp(10B)
  std::vector<PerturbTrial> trials;
  int frob_violations = 0;
  int entry_violations = 0;
};

struct AuditPart {
  int part = 0;
  int trials = 0;
  int violations = 0;
  double max_stat = 0.0;  // worst observed statistic
  double bound = 0.0;
};

struct AuditReport {
  double B = 0.0;
  std::vector<AuditPart> parts;  // Parts 1..13
};

GramMatrix gram(const NetworkState& net, const Dataset& data);

/// Naive five-deep loop straight from the kernel definition. Oracle only.
GramMatrix gram_bruteforce(const NetworkState& net, const Dataset& data);

/// Smallest eigenvalue of a symmetric Gram matrix, with an eigenpair
/// residual check.
double min_eigenvalue(const GramMatrix& G);
double max_eigenvalue(const GramMatrix& G);

TestKernel test_kernel(const NetworkState& net, const Dataset& data,
                       const Vector& x_te);

TestKernel test_kernel_bruteforce(const NetworkState& net, const Dataset& data,
                                  const Vector& x_te);

struct PerturbOptions {
  double delta = 0.1;
  double C = 10.0;
};

/// Kernel drift under per-column weight perturbations of radius <= R,
/// measured against the Frobenius and per-entry bounds.
PerturbReport perturbation_experiment(int n, int d, int m, double sigma,
                                      double R, int trials,
                                      std::uint64_t seed,
                                      const PerturbOptions& opts = {});

/// Statistical audit of the thirteen concentration bounds on inner
/// products, exponentials, and softmax values under perturbation.
AuditReport bounds_audit(int n, int d, int m, double sigma, double delta,
                         double R, int trials, std::uint64_t seed,
                         double C = 10.0);

}  // namespace softnet
