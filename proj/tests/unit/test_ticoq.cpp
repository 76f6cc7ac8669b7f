#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "common/instances.hpp"
#include "qcontract/ticoq.hpp"

using namespace qcontract;

namespace {

// Two single-coordinate blocks with C = (0.5, 2).
struct TwoCoords {
  BlockPartition part{std::vector<std::size_t>{1, 1}};
  NormSpec spec = NormSpec::uniform_wmax(part);
  BoxDomain box{std::vector<Interval>{{0, 1}, {0, 4}}};
};

int total(const std::vector<int>& b) { return std::accumulate(b.begin(), b.end(), 0); }

}  // namespace

TEST_CASE("weighted max design examples") {
  TwoCoords inst;
  const auto d = ticoq_sq_wmax(inst.part, inst.spec, inst.box, 2);
  CHECK(d.constants[0] == doctest::Approx(0.5));
  CHECK(d.constants[1] == doctest::Approx(2.0));
  CHECK(d.tau == doctest::Approx(0.5));
  CHECK(d.alloc.relaxed[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d.alloc.relaxed[1] == doctest::Approx(2.0));
  CHECK(d.alloc.bits == std::vector<int>{0, 2});
  CHECK(d.alloc.objective == doctest::Approx(0.5));

  const auto zero = ticoq_sq_wmax(inst.part, inst.spec, inst.box, 0);
  CHECK(zero.alloc.bits == std::vector<int>{0, 0});
  CHECK(zero.alloc.objective == doctest::Approx(2.0));

  const BlockPartition three({1, 1, 1});
  const auto eq = ticoq_sq_wmax(three, NormSpec::uniform_wmax(three), BoxDomain::cube(3, 0, 1), 9);
  CHECK(eq.alloc.bits == std::vector<int>{3, 3, 3});

  const auto oracle = allocation_oracle([&](const std::vector<int>& b) { return wmax_objective(d.constants, b); }, 2, 2);
  CHECK(oracle.bits == std::vector<int>{0, 2});
  CHECK(oracle.value == doctest::Approx(0.5));
}

TEST_CASE("oracle conventions") {
  const auto one = allocation_oracle([](const std::vector<int>&) { return 1.0; }, 1, 5);
  CHECK(one.bits == std::vector<int>{5});
  const auto flat = allocation_oracle([](const std::vector<int>&) { return 1.0; }, 3, 2, true);
  CHECK(flat.bits == std::vector<int>{0, 0, 2});
  CHECK(flat.ties.size() == 6);
  CHECK_THROWS_AS(allocation_oracle([](const std::vector<int>&) { return 1.0; }, 12, 40, false, 1000),
                  std::length_error);
}

TEST_CASE("tradeoff threshold examples") {
  const BlockPartition two({1, 1});
  CHECK(tradeoff_threshold(DesignCase::SqWmax, {0.5, 2}, two) == doctest::Approx(2.0));
  CHECK(tradeoff_threshold(DesignCase::SqWmax, {3, 3, 3}, BlockPartition({1, 1, 1})) == doctest::Approx(0.0));
  CHECK(tradeoff_threshold(DesignCase::VqLattice, {1, 2}, two) == doctest::Approx(1.0));
}

TEST_CASE("water level and rate constraint") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto part = qtest::random_partition(rng, 8, 4);
    const auto spec = qtest::random_wmax_spec(rng, part);
    const auto box = qtest::random_box(rng, part.dim());
    const int L = static_cast<int>(rng() % 30);
    const auto d = ticoq_sq_wmax(part, spec, box, L);
    CHECK(std::abs(std::accumulate(d.alloc.relaxed.begin(), d.alloc.relaxed.end(), 0.0) - L) <= 1e-9);
    CHECK(total(d.alloc.bits) == L);
    for (std::size_t m = 0; m < part.dim(); ++m)
      if (d.alloc.relaxed[m] > 1e-9)
        CHECK(d.constants[m] * std::exp2(-d.alloc.relaxed[m]) == doctest::Approx(d.tau).epsilon(1e-9));
    if (L >= d.L_prime)
      CHECK(d.tau == doctest::Approx(d.eta * std::exp2(-static_cast<double>(L) / part.dim())).epsilon(1e-9));
  }
}

TEST_CASE("integer optimality against the oracle") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto part = qtest::random_partition(rng, 6, 3);
    const auto spec = qtest::random_wmax_spec(rng, part);
    const auto box = qtest::random_box(rng, part.dim());
    const int L = static_cast<int>(rng() % 13);
    const auto d = ticoq_sq_wmax(part, spec, box, L);
    const auto o = allocation_oracle([&](const std::vector<int>& b) { return wmax_objective(d.constants, b); },
                                     part.dim(), L);
    REQUIRE(d.alloc.objective == o.value);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 1 + rng() % 3, nk = 2 + rng() % 2;
    const BlockPartition part(std::vector<std::size_t>(K, nk));
    const auto spec = qtest::random_lp_spec(rng, part, 2.0);
    const auto box = qtest::random_box(rng, part.dim(), 0.5, 4.0);
    const int L = static_cast<int>(rng() % 10);
    const auto d = ticoq_vq_lattice(part, spec, box, L);
    const auto o = allocation_oracle([&](const std::vector<int>& b) { return vq_objective(part, d.constants, b); },
                                     K, L);
    REQUIRE(d.alloc.objective == doctest::Approx(o.value).epsilon(1e-14));
  }
}

TEST_CASE("lp design: symmetry, slackness and greedy gap") {
  const BlockPartition one({4});
  const auto sym = ticoq_sq_lp(one, NormSpec::uniform_lp(one, 2.0), BoxDomain::cube(4, 0, 1), 8);
  CHECK(sym.alloc.bits == std::vector<int>{2, 2, 2, 2});

  std::mt19937_64 rng(31);
  const BlockPartition two({2, 2});
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = qtest::random_lp_spec(rng, two, 1.0 + (trial % 4));
    const auto box = qtest::random_box(rng, 4);
    const auto d = ticoq_sq_lp(two, spec, box, 1 + trial % 12);
    const auto r = lp_kkt_residuals(d, two);
    CHECK(r.slackness <= 1e-10);
    CHECK(r.rate <= 1e-9);
  }

  double worst_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto part = qtest::random_partition(rng, 4, 3);
    const auto spec = qtest::random_lp_spec(rng, part, trial % 2 ? 2.0 : 1.5);
    const auto box = qtest::random_box(rng, part.dim());
    const int L = static_cast<int>(rng() % 9);
    const auto d = ticoq_sq_lp(part, spec, box, L);
    CHECK(total(d.alloc.bits) == L);
    const auto o = allocation_oracle(
        [&](const std::vector<int>& b) { return lp_objective(part, d.constants, d.p, b); }, part.dim(), L);
    worst_gap = std::max(worst_gap, d.alloc.objective / o.value - 1.0);
  }
  MESSAGE("largest greedy gap over the oracle: " << worst_gap);
  CHECK(worst_gap <= 1e-12);
  CHECK_THROWS(ticoq_sq_lp(two, qtest::random_wmax_spec(rng, two), BoxDomain::cube(4, 0, 1), 3));
}

TEST_CASE("lattice design examples") {
  const BlockPartition part({2, 2});
  const auto d = ticoq_vq_lattice(part, NormSpec::uniform_lp(part, 2.0), BoxDomain::cube(4, 0, 1), 10);
  CHECK(d.constants[0] == doctest::Approx(0.62044).epsilon(1e-4));
  CHECK(d.constants[1] == doctest::Approx(0.62044).epsilon(1e-4));
  CHECK(d.alloc.bits == std::vector<int>{5, 5});
  const auto z = ticoq_vq_lattice(part, NormSpec::uniform_lp(part, 2.0), BoxDomain::cube(4, 0, 1), 0);
  CHECK(z.alloc.objective == doctest::Approx(0.62044).epsilon(1e-4));
  CHECK_THROWS(ticoq_vq_lattice(part, NormSpec::uniform_lp(part, 1.5), BoxDomain::cube(4, 0, 1), 4));
}

TEST_CASE("objective monotone in L and linear in box scale") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto part = qtest::random_partition(rng, 6, 3);
    const auto spec = qtest::random_wmax_spec(rng, part);
    const auto box = qtest::random_box(rng, part.dim());
    double prev = INFINITY;
    for (int L = 0; L <= 20; ++L) {
      const double v = ticoq_sq_wmax(part, spec, box, L).alloc.objective;
      CHECK(v <= prev);
      prev = v;
    }
    const double c = 3.5;
    std::vector<Interval> scaled;
    for (const auto& iv : box.intervals()) scaled.push_back({iv.lo * c, iv.hi * c});
    const auto a = ticoq_sq_wmax(part, spec, box, 7);
    const auto b = ticoq_sq_wmax(part, spec, BoxDomain(scaled), 7);
    CHECK(b.alloc.objective == doctest::Approx(c * a.alloc.objective));
    for (std::size_t m = 0; m < part.dim(); ++m) CHECK(b.alloc.relaxed[m] == doctest::Approx(a.alloc.relaxed[m]));
  }
}

TEST_CASE("fractional rounding tie break") {
  std::vector<std::size_t> tied;
  const auto b = fractional_rounding({0.5, 0.5, 2.0}, 3, {1.0, 2.0, 0.0}, &tied);
  CHECK(b == std::vector<int>{0, 1, 2});
  CHECK(tied.size() == 2);
}

TEST_CASE("design json") {
  TwoCoords inst;
  const auto j = design_to_json(ticoq_sq_wmax(inst.part, inst.spec, inst.box, 2));
  CHECK(j.at("integer") == nlohmann::json::array({0, 2}));
  CHECK(j.at("objective").get<double>() == doctest::Approx(0.5));
  CHECK(j.at("case") == "ticoq-wmax");
}
