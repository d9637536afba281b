#pragma once

#include "softnet/rng.hpp"
#include "softnet/types.hpp"

namespace testutil {

inline softnet::Dataset random_dataset(int n, int d1, int d2,
                                       std::uint64_t seed) {
  softnet::Rng rng(seed);
  softnet::Matrix X(d1, n), Y(d2, n);
  for (int i = 0; i < n; ++i) {
    X.col(i) = rng.unit_ball(d1);
    Y.col(i) = rng.unit_ball(d2);
  }
  return softnet::Dataset(std::move(X), std::move(Y));
}

inline softnet::NetworkState random_net(int d1, int m, int d2, double sigma,
                                        std::uint64_t seed) {
  softnet::Rng rng(seed);
  softnet::NetworkState net;
  net.W.resize(d1, m);
  for (int r = 0; r < m; ++r) net.W.col(r) = rng.gaussian_vector(d1, sigma);
  net.a.resize(d2, m);
  for (int l = 0; l < d2; ++l)
    for (int r = 0; r < m; ++r) net.a(l, r) = rng.sign();
  return net;
}

}  // namespace testutil
