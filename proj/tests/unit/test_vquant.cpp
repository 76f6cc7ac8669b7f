#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "qcontract/vquant.hpp"

using namespace qcontract;

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Nearest point of s*A*_n by scanning projected integer vectors z (z_0 = 0)
// around the lifted target.
double brute_force_distance(std::span<const double> y, double s) {
  const std::size_t n = y.size();
  const auto B = a_star_basis(n);
  Vector v(n + 1, 0.0);
  for (std::size_t r = 0; r <= n; ++r)
    for (std::size_t c = 0; c < n; ++c) v[r] += B[r][c] * y[c] / s;
  std::vector<std::int64_t> base(n + 1, 0), off(n + 1, -2);
  for (std::size_t i = 1; i <= n; ++i) base[i] = std::llround(v[i] - v[0]);
  off[0] = 0;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    LatticeCoords z(n + 1), coords(n + 1);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i <= n; ++i) sum += z[i] = base[i] + off[i];
    for (std::size_t i = 0; i <= n; ++i) coords[i] = static_cast<std::int64_t>(n + 1) * z[i] - sum;
    best = std::min(best, dist2(a_star_point(coords, s), y));
    std::size_t i = 1;
    while (i <= n && off[i] == 2) off[i++] = -2;
    if (i > n) break;
    ++off[i];
  }
  return best;
}

}  // namespace

TEST_CASE("lattice constants") {
  for (std::size_t n = 1; n <= 8; ++n) {
    const LatticeSpec spec{n};
    const double nn = static_cast<double>(n);
    CHECK(spec.covering_radius() == doctest::Approx(std::sqrt(nn * (nn + 2) / (12 * (nn + 1)))).epsilon(1e-12));
    CHECK(spec.fundamental_volume() == doctest::Approx(std::sqrt(1 / (nn + 1))).epsilon(1e-12));
  }
}

TEST_CASE("nearest point examples") {
  // With this embedding A*_1 has spacing 1/sqrt(2); scale sqrt(2) gives Z.
  const auto p = nearest_point_a_star(Vector{0.6}, std::sqrt(2.0));
  CHECK(p.point[0] == doctest::Approx(1.0));
  const auto unit = nearest_point_a_star(Vector{0.6}, 1.0);
  CHECK(unit.point[0] == doctest::Approx(1 / std::sqrt(2.0)));

  const Vector on = a_star_point({5, -1, -4}, 0.7);
  const auto again = nearest_point_a_star(on, 0.7);
  CHECK(dist2(again.point, on) < 1e-12);
  CHECK(again.coords == LatticeCoords{5, -1, -4});
  CHECK_THROWS(nearest_point_a_star(Vector{NAN, 0.0}, 1.0));
}

TEST_CASE("nearest point agrees with brute force") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int i = 0; i < 10000; ++i) {
      Vector y(n);
      for (auto& v : y) v = u(rng);
      const double s = n == 2 ? 1.0 : 0.5 + 0.1 * (i % 7);
      const auto p = nearest_point_a_star(y, s);
      REQUIRE(dist2(p.point, y) <= brute_force_distance(y, s) + 1e-12);
    }
  }
}

TEST_CASE("design scale and worst case error") {
  const BoxDomain unit2 = BoxDomain::cube(2, 0, 1);
  CHECK(vq_design(unit2, 2, 0).scale() == doctest::Approx(1.31607).epsilon(1e-5));
  CHECK(vq_design(unit2, 2, 4).scale() == doctest::Approx(0.32902).epsilon(1e-5));
  const Vector ones{1, 1};
  // sqrt(sqrt 3) * sqrt(8/36) = 0.620403...; the hand value 0.62044 carries rounding slack.
  CHECK(vq_worst_case_error(ones, 2, 0) == doctest::Approx(std::sqrt(std::sqrt(3.0)) * std::sqrt(8.0 / 36)));
  CHECK(vq_worst_case_error(ones, 2, 0) == doctest::Approx(0.62044).epsilon(1e-4));
  for (std::size_t n = 2; n <= 5; ++n) {
    const Vector len(n, 1.0);
    const LatticeSpec spec{n};
    CHECK(vq_worst_case_error(len, n, 0) ==
          doctest::Approx(std::pow(1 / spec.fundamental_volume(), 1.0 / n) * spec.covering_radius()));
    CHECK(vq_worst_case_error(len, n, 7 + static_cast<int>(n)) / vq_worst_case_error(len, n, 7) ==
          doctest::Approx(0.5));
    CHECK(vq_design(BoxDomain::cube(n, -1, 2), n, 9).worst_case_error() ==
          doctest::Approx(vq_worst_case_error(Vector(n, 3.0), n, 9)));
  }
  CHECK_THROWS(vq_design(BoxDomain({{0, 1}, {2, 2}}), 2, 3));
}

TEST_CASE("one dimensional lattice matches the scalar bound") {
  for (int bits : {0, 2, 5}) {
    const Vector len{4.0};
    CHECK(vq_worst_case_error(len, 1, bits) == doctest::Approx(4.0 / std::pow(2.0, bits + 1)));
  }
}

TEST_CASE("covering property and codebook") {
  const LatticeQuantizer q(BoxDomain::cube(2, 0, 1), 8);
  const double sR = q.worst_case_error();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(sR, 1 - sR);
  for (int i = 0; i < 100000; ++i) {
    const Vector x{u(rng), u(rng)};
    const auto idx = vq_encode(q, x);
    REQUIRE(dist2(vq_decode(q, idx), x) <= sR + 1e-12);
    REQUIRE(vq_encode(q, x) == idx);
  }
  // Inputs are clamped before encoding, so only in-box points map back to themselves.
  std::set<Vector> seen;
  std::size_t inside = 0;
  for (std::uint64_t i = 0; i < q.codebook_size(); ++i) {
    const Vector c = q.decode(i);
    REQUIRE(seen.insert(c).second);
    if (q.box().contains(c)) {
      ++inside;
      REQUIRE(q.encode(c) == i);
    }
  }
  CHECK(inside > 0);
  CHECK_THROWS(q.decode(q.codebook_size()));
  CHECK(q.effective_rate() == doctest::Approx(std::log2(static_cast<double>(q.codebook_size()))));
}

TEST_CASE("json reload reproduces decode outputs") {
  const LatticeQuantizer q(BoxDomain({{-1, 1}, {0, 3}, {2, 2.5}}), 7);
  const auto r = LatticeQuantizer::from_json(q.to_json());
  REQUIRE(r.codebook_size() == q.codebook_size());
  for (std::uint64_t i = 0; i < q.codebook_size(); ++i) REQUIRE(r.decode(i) == q.decode(i));
  CHECK(q.to_json().contains("codebook_size"));
}
