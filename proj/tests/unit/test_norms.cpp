#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "common/instances.hpp"
#include "qcontract/norms.hpp"

using namespace qcontract;

TEST_CASE("weighted max norm") {
  CHECK(weighted_max_norm(Vector{0, 0, 0}, Vector{1, 2, 3}) == 0.0);
  CHECK(weighted_max_norm(Vector{1, -4}, Vector{1, 2}) == doctest::Approx(2.0));
  CHECK(weighted_max_norm(Vector{3}, Vector{1}) == 3.0);
  CHECK_THROWS_AS(weighted_max_norm(Vector{1, 2}, Vector{1}), std::invalid_argument);
  CHECK_THROWS_AS(weighted_max_norm(Vector{1}, Vector{0}), std::invalid_argument);
}

TEST_CASE("lp norm") {
  CHECK(lp_norm(Vector{3, 4}, 2) == doctest::Approx(5.0));
  CHECK(lp_norm(Vector{1, 1, 1}, 1) == doctest::Approx(3.0));
  CHECK(lp_norm(Vector{2, -2}, 4) == doctest::Approx(2.0 * std::pow(2.0, 0.25)).epsilon(1e-12));
  CHECK_THROWS_AS(lp_norm(Vector{1}, 0.5), std::invalid_argument);
}

TEST_CASE("block norm") {
  BlockPartition two({2, 2});
  NormSpec spec = NormSpec::uniform_lp(two, 2.0);
  spec.w = {1, 10};
  CHECK(block_norm(Vector{3, 4, 1, 0}, two, spec) == doctest::Approx(5.0));
  CHECK(block_norm(Vector(4, 0.0), two, spec) == 0.0);

  BlockPartition ones({1, 1});
  NormSpec wm = NormSpec::uniform_wmax(ones);
  wm.w = {1, 2};
  CHECK(block_norm(Vector{1, 6}, ones, wm) == doctest::Approx(3.0));

  NormSpec bad = NormSpec::uniform_lp(two, 2.0);
  bad.w = {1};
  CHECK_THROWS_AS(block_norm(Vector{1, 2, 3, 4}, two, bad), std::invalid_argument);
}

TEST_CASE("norm axioms on random inputs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 500; ++trial) {
    const auto part = qtest::random_partition(rng, 8, 4);
    NormSpec spec = trial % 3 == 0   ? qtest::random_wmax_spec(rng, part)
                    : trial % 3 == 1 ? qtest::random_lp_spec(rng, part, 1.0 + 3.0 * (trial % 7) / 6.0)
                                     : qtest::random_lp_spec(rng, part, 2.0);
    if (trial % 5 == 0) spec.per_block.front() = Lp{1.5};
    Vector x(part.dim()), y(part.dim());
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = g(rng);
    const double c = g(rng);
    Vector cx = x, sum = x;
    for (std::size_t m = 0; m < x.size(); ++m) {
      cx[m] *= c;
      sum[m] += y[m];
    }
    const double nx = block_norm(x, part, spec), ny = block_norm(y, part, spec);
    CHECK(block_norm(cx, part, spec) == doctest::Approx(std::abs(c) * nx).epsilon(1e-12));
    CHECK(block_norm(sum, part, spec) <= (nx + ny) * (1 + 1e-12));
    CHECK(nx > 0.0);

    // Shrinking coordinates never increases the norm.
    Vector shrunk = x;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : shrunk) v *= u(rng);
    CHECK(block_norm(shrunk, part, spec) <= nx * (1 + 1e-12));
  }
}

TEST_CASE("lp approaches max for large p") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 9;
    Vector x(n), ones(n, 1.0);
    for (auto& v : x) v = g(rng);
    const double mx = weighted_max_norm(x, ones);
    const double gap = (lp_norm(x, 64) - mx) / mx;
    CHECK(gap >= -1e-12);
    CHECK(gap <= std::pow(static_cast<double>(n), 1.0 / 64) - 1 + 1e-12);
  }
}

TEST_CASE("json round trip of norm and box") {
  BlockPartition part({1, 3});
  NormSpec spec;
  spec.w = {1.0, 2.5};
  spec.per_block = {WeightedMax{{0.5}}, Lp{3.0}};
  const auto [p2, s2] = norm_from_json(norm_to_json(part, spec));
  CHECK(p2 == part);
  Vector x{1, -2, 3, 0.5};
  CHECK(block_norm(x, p2, s2) == doctest::Approx(block_norm(x, part, spec)));

  const BoxDomain box = BoxDomain::cube(4, -1, 2);
  const BoxDomain b2 = box_from_json(box_to_json(box));
  CHECK(b2.dim() == 4);
  CHECK(b2[3].hi == 2.0);
  CHECK_THROWS(BoxDomain({{1.0, 0.0}}));
}
