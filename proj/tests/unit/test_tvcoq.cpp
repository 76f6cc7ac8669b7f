#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/instances.hpp"
#include "qcontract/tvcoq.hpp"

using namespace qcontract;

TEST_CASE("master worked example") {
  const auto s = tvcoq_master(0.5, 1, 3, 2);
  CHECK(s.relaxed[0] == doctest::Approx(2.5));
  CHECK(s.relaxed[1] == doctest::Approx(3.5));
  CHECK(s.rates == std::vector<int>{2, 4});
  CHECK(s.objective == doctest::Approx(0.375));
  CHECK(s.in_regime);
  REQUIRE(s.alternates.size() == 1);
  CHECK(s.alternates[0] == std::vector<int>{3, 3});
  CHECK(master_objective(0.5, 1, {3, 3}) == doctest::Approx(0.375));
}

TEST_CASE("master edge cases") {
  CHECK(tvcoq_master(0.3, 4, 11, 1).rates == std::vector<int>{11});
  const auto s = tvcoq_master(0.99, 3, 40, 12);
  const auto [lo, hi] = std::minmax_element(s.rates.begin(), s.rates.end());
  CHECK(*hi - *lo <= 3 * 11 * std::abs(std::log2(0.99)) + 1);
  CHECK_THROWS(tvcoq_master(0.0, 1, 3, 2));
  CHECK_THROWS(tvcoq_master(1.0, 1, 3, 2));

  const auto out = tvcoq_master(0.25, 2, 1, 6, 3.0);
  CHECK_FALSE(out.in_regime);
  CHECK(out.required_L == doctest::Approx(3.0 - 2 * 2.5 * std::log2(0.25)));
  CHECK(std::accumulate(out.rates.begin(), out.rates.end(), 0) == 6);
}

TEST_CASE("master matches the oracle") {
  for (double alpha : {0.2, 0.5, 0.8})
    for (std::size_t n = 1; n <= 2; ++n)
      for (std::size_t T = 1; T <= 5; ++T)
        for (int L = 0; L <= 8; ++L) {
          const auto s = tvcoq_master(alpha, n, L, T);
          REQUIRE(std::accumulate(s.rates.begin(), s.rates.end(), 0) == static_cast<int>(T) * L);
          REQUIRE(std::is_sorted(s.rates.begin(), s.rates.end()));
          const auto o = allocation_oracle(
              [&](const std::vector<int>& r) { return master_objective(alpha, n, r); }, T, static_cast<int>(T) * L);
          REQUIRE(s.objective == doctest::Approx(o.value).epsilon(1e-13));
        }
}

TEST_CASE("stage designs") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto part = qtest::random_partition(rng, 5, 3);
    const auto spec = qtest::random_wmax_spec(rng, part);
    const auto box = qtest::random_box(rng, part.dim());
    const int L = 4 + static_cast<int>(rng() % 20);
    const double alpha = 0.3 + 0.6 * (trial % 7) / 7.0;

    const auto one = tvcoq_design(DesignCase::SqWmax, part, spec, box, L, 1, alpha);
    CHECK(one.stages.at(0).alloc.bits == ticoq_sq_wmax(part, spec, box, L).alloc.bits);

    const std::size_t T = 2 + trial % 6;
    const auto s = tvcoq_design(DesignCase::SqWmax, part, spec, box, L, T, alpha);
    REQUIRE(s.stages.size() == T);
    double scheduled = 0.0, flat = 0.0;
    const double flat_value = ticoq_sq_wmax(part, spec, box, L).alloc.relaxed_value;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& st = s.stages[t];
      if (s.rates[t] >= s.L_prime)
        CHECK(st.alloc.relaxed_value ==
              doctest::Approx(s.eta * std::exp2(-static_cast<double>(s.rates[t]) / part.dim())).epsilon(1e-9));
      scheduled += std::pow(alpha, -static_cast<double>(t)) * st.alloc.relaxed_value;
      flat += std::pow(alpha, -static_cast<double>(t)) * flat_value;
    }
    if (s.in_regime) CHECK(scheduled <= flat * (1 + 1e-12));
    CHECK(schedule_banks(s, part, box).size() == T);
  }
}

TEST_CASE("error bound algebra") {
  const double eta = 0.7, alpha = 0.6;
  CHECK(tvcoq_error_bound(alpha, 3, 9, 1, eta) == doctest::Approx(eta * std::exp2(-3.0)));
  for (std::size_t T : {1, 2, 5, 10})
    CHECK(tvcoq_error_bound(alpha, 3, 9, 2 * T, eta) / tvcoq_error_bound(alpha, 3, 9, T, eta) ==
          doctest::Approx(2 * std::pow(alpha, T / 2.0)));
  const double Tstar = -2 / std::log(alpha);
  double prev = INFINITY;
  for (std::size_t T = static_cast<std::size_t>(std::ceil(Tstar)); T < 200; ++T) {
    const double b = tvcoq_error_bound(alpha, 3, 9, T, eta);
    CHECK(b <= prev);
    prev = b;
  }
  CHECK(prev < 1e-15);
}

TEST_CASE("schedule json") {
  const auto j = schedule_to_json(tvcoq_master(0.5, 1, 3, 2));
  CHECK(j.at("rates") == nlohmann::json::array({2, 4}));
  CHECK(j.at("T") == 2);
  CHECK(j.contains("alternates"));
}
