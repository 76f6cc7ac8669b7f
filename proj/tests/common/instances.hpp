#pragma once

// Random problem instances shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <vector>

#include "qcontract/norms.hpp"

namespace qtest {

using qcontract::BlockPartition;
using qcontract::BoxDomain;
using qcontract::Interval;
using qcontract::NormSpec;
using qcontract::Vector;

inline BlockPartition random_partition(std::mt19937_64& rng, std::size_t max_n, std::size_t max_k) {
  std::uniform_int_distribution<std::size_t> kd(1, max_k);
  const std::size_t K = kd(rng);
  std::uniform_int_distribution<std::size_t> nd(K, std::max(K, max_n));
  const std::size_t n = nd(rng);
  std::vector<std::size_t> sizes(K, 1);
  std::uniform_int_distribution<std::size_t> pick(0, K - 1);
  for (std::size_t extra = n - K; extra > 0; --extra) ++sizes[pick(rng)];
  return BlockPartition(sizes);
}

inline BoxDomain random_box(std::mt19937_64& rng, std::size_t n, double min_len = 0.1, double max_len = 10.0) {
  std::uniform_real_distribution<double> lo(-5.0, 5.0);
  std::uniform_real_distribution<double> len(min_len, max_len);
  std::vector<Interval> iv;
  for (std::size_t m = 0; m < n; ++m) {
    const double a = lo(rng);
    iv.push_back({a, a + len(rng)});
  }
  return BoxDomain(iv);
}

inline Vector random_weights(std::mt19937_64& rng, std::size_t n, double lo = 0.5, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector w(n);
  for (double& v : w) v = u(rng);
  return w;
}

inline NormSpec random_wmax_spec(std::mt19937_64& rng, const BlockPartition& part) {
  NormSpec s;
  s.w = random_weights(rng, part.num_blocks());
  for (std::size_t k = 0; k < part.num_blocks(); ++k)
    s.per_block.emplace_back(qcontract::WeightedMax{random_weights(rng, part.block_size(k))});
  return s;
}

inline NormSpec random_lp_spec(std::mt19937_64& rng, const BlockPartition& part, double p) {
  NormSpec s;
  s.w = random_weights(rng, part.num_blocks());
  for (std::size_t k = 0; k < part.num_blocks(); ++k) s.per_block.emplace_back(qcontract::Lp{p});
  return s;
}

inline Vector random_point(std::mt19937_64& rng, const BoxDomain& box) {
  Vector x(box.dim());
  for (std::size_t m = 0; m < box.dim(); ++m) {
    std::uniform_real_distribution<double> u(box[m].lo, box[m].hi);
    x[m] = u(rng);
  }
  return x;
}

}  // namespace qtest
