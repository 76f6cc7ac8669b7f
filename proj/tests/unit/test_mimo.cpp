#include <doctest.h>

#include <cmath>
#include <random>

#include "qcontract/mimo.hpp"

using namespace qcontract;
using namespace qcontract::mimo;
using linalg::ComplexMatrix;
using linalg::HermitianMatrix;

namespace {

// Single link with H = h I, unit noise and the given budget in watts.
Game single_link(std::size_t N, linalg::Complex h, double budget_w) {
  GameConfig c;
  c.K = 1;
  c.N = N;
  c.distances = {{1.0}};
  c.power_dbm = {10 * std::log10(budget_w) + 30};
  c.noise_watt = 1.0;
  return Game(c, ChannelSet(1, {h * ComplexMatrix::identity(N)}));
}

HermitianMatrix random_feasible(std::mt19937_64& rng, std::size_t N, double budget) {
  std::normal_distribution<double> g;
  ComplexMatrix a(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) a(i, j) = {g(rng), g(rng)};
  ComplexMatrix p = a * a.adjoint();
  p *= budget / p.trace().real();
  return HermitianMatrix(p);
}

double min_eig(const HermitianMatrix& p) { return linalg::herm_eig(p).values.front(); }

}  // namespace

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watt(30) == doctest::Approx(1.0));
  CHECK(dbm_to_watt(10) == doctest::Approx(0.01));
  CHECK(thermal_noise_watt(1.0) == doctest::Approx(dbm_to_watt(-174)));
  CHECK(thermal_noise_watt() == doctest::Approx(dbm_to_watt(-174) * 1e7));
}

TEST_CASE("config json") {
  nlohmann::json j = two_pair_geometry(3).to_json();
  const auto back = GameConfig::from_json(j);
  CHECK(back.distances == two_pair_geometry(3).distances);
  j["noise"] = {{"dbm", -90.0}};
  CHECK(GameConfig::from_json(j).noise_watt == doctest::Approx(1e-12));
  j["power_dbm"] = 20.0;
  CHECK(GameConfig::from_json(j).power_dbm == std::vector<double>{20.0, 20.0});
  j.erase("K");
  CHECK_THROWS_AS(GameConfig::from_json(j), std::invalid_argument);
  auto bad = two_pair_geometry(1);
  bad.gamma = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("channels regenerate identically") {
  const auto a = ChannelSet::generate(two_pair_geometry(42));
  const auto b = ChannelSet::generate(two_pair_geometry(42));
  const auto c = ChannelSet::generate(two_pair_geometry(43));
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t k = 0; k < 2; ++k) CHECK(a(j, k).data() == b(j, k).data());
  CHECK(a(0, 0).data() != c(0, 0).data());
}

TEST_CASE("interference covariance") {
  const auto one = single_link(2, 1.0, 1.0);
  const auto r1 = interference_covariance(one, equal_power_profile(one), 0);
  CHECK((r1.matrix() - one.noise[0].matrix()).frobenius() == 0.0);

  auto cfg = two_pair_geometry(5);
  const Game g(cfg);
  const auto p = equal_power_profile(g);
  for (std::size_t k = 0; k < 2; ++k) {
    ComplexMatrix oracle = g.noise[k].matrix();
    for (std::size_t j = 0; j < 2; ++j)
      if (j != k) oracle += g.channels(j, k) * p[j].matrix() * g.channels(j, k).adjoint();
    const auto r = interference_covariance(g, p, k);
    CHECK((r.matrix() - oracle).frobenius() <= 1e-12 * oracle.frobenius());
    CHECK(min_eig(r) > 0.0);
  }

  // Zero cross channels leave only the noise.
  const Game iso(cfg, ChannelSet(2, {g.channels(0, 0), ComplexMatrix(2, 2), ComplexMatrix(2, 2), g.channels(1, 1)}));
  CHECK((interference_covariance(iso, p, 1).matrix() - iso.noise[1].matrix()).frobenius() == 0.0);
}

TEST_CASE("simplex and feasibility projection") {
  const auto eye = project_feasible(HermitianMatrix(ComplexMatrix::diagonal({-1, -1})), 2.0);
  CHECK((eye.matrix() - ComplexMatrix::identity(2)).frobenius() < 1e-12);

  std::mt19937_64 rng(12);
  const auto fixed = random_feasible(rng, 3, 2.5);
  CHECK((project_feasible(fixed, 2.5).matrix() - fixed.matrix()).frobenius() < 1e-10);

  std::normal_distribution<double> g(0, 2);
  for (int trial = 0; trial < 500; ++trial) {
    Vector sigma(1 + trial % 6);
    for (auto& s : sigma) s = g(rng);
    const double budget = 0.5 + trial % 4;
    const auto lam = simplex_projection(sigma, budget);
    double sum = 0.0, nu = NAN;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      REQUIRE(lam[i] >= 0.0);
      sum += lam[i];
      if (lam[i] > 0) nu = sigma[i] - lam[i];
    }
    REQUIRE(sum == doctest::Approx(budget).epsilon(1e-12));
    for (std::size_t i = 0; i < lam.size(); ++i) {
      if (lam[i] > 0)
        REQUIRE(sigma[i] - lam[i] == doctest::Approx(nu).epsilon(1e-12));
      else
        REQUIRE(sigma[i] <= nu + 1e-12);
    }
  }
}

TEST_CASE("single user waterfilling and throughput") {
  const auto g = single_link(3, 1.0, 0.6);
  const auto p = waterfill(g, equal_power_profile(g), 0);
  CHECK((p.matrix() - ComplexMatrix::diagonal({0.2, 0.2, 0.2})).frobenius() < 1e-12);

  const auto s = single_link(1, {0.3, -0.4}, 2.0);
  const Profile ps{HermitianMatrix(ComplexMatrix::diagonal({2.0}))};
  CHECK(throughput(s, ps, 0) == doctest::Approx(std::log2(1 + 0.25 * 2.0)));
  const Profile zero{HermitianMatrix(ComplexMatrix(1, 1))};
  CHECK(throughput(s, zero, 0) == doctest::Approx(0.0));

  const Game singular(s.config, ChannelSet(1, {ComplexMatrix(1, 1)}));
  CHECK_THROWS_AS(waterfill(singular, ps, 0), std::domain_error);
}

TEST_CASE("waterfilling is a feasible best response") {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Game g(two_pair_geometry(seed));
    Profile p;
    for (std::size_t k = 0; k < 2; ++k) p.push_back(random_feasible(rng, 2, g.budgets[k]));
    for (std::size_t k = 0; k < 2; ++k) {
      Profile best = p;
      best[k] = waterfill(g, p, k);
      CHECK(min_eig(best[k]) >= -1e-10);
      CHECK(best[k].trace() == doctest::Approx(g.budgets[k]).epsilon(1e-9));
      const double top = throughput(g, best, k);
      for (int i = 0; i < 100; ++i) {
        Profile alt = p;
        alt[k] = random_feasible(rng, 2, g.budgets[k]);
        REQUIRE(throughput(g, alt, k) <= top + 1e-8);
      }
      Profile more = best;
      more[k] = HermitianMatrix(2.0 * best[k].matrix());
      CHECK(throughput(g, more, k) >= top);
    }
  }
}

TEST_CASE("vectorization preserves the Frobenius norm") {
  std::mt19937_64 rng(4);
  const auto p = random_feasible(rng, 4, 3.0);
  const auto v = vectorize(p);
  CHECK(v.size() == 16);
  CHECK(lp_norm(v, 2) == doctest::Approx(p.frobenius()));
  CHECK((devectorize(v, 4).matrix() - p.matrix()).frobenius() < 1e-14);
  const Game g(two_pair_geometry(1));
  CHECK(game_box(g).contains(vectorize_profile(equal_power_profile(g))));
}

TEST_CASE("iterative waterfilling") {
  std::uint64_t seed = 1;
  while (!estimate_modulus(Game(two_pair_geometry(seed)), 100).contractive) ++seed;
  const Game g(two_pair_geometry(seed));
  const auto sim = iwfa_run(g, {}, IwfaMode::Simultaneous, 50);
  CHECK(sim.residuals.back() < 1e-8);
  const auto seq = iwfa_run(g, {}, IwfaMode::Sequential, 100);
  for (std::size_t m = 0; m < sim.traj.iterates.back().size(); ++m)
    CHECK(std::abs(sim.traj.iterates.back()[m] - seq.traj.iterates.back()[m]) < 1e-6);
  CHECK(sim.sum_throughput.size() == sim.traj.iterates.size());

  const auto est = estimate_modulus(g, 200);
  const Vector x_star = sim.traj.iterates.back();
  const auto part = game_partition(g);
  const auto box = game_box(g);
  const auto bank = QuantizerBank::scalar(part, box, std::vector<int>(part.dim(), 6));
  const auto q = iwfa_run(g, {bank}, IwfaMode::Simultaneous, 30, x_star);
  const NormSpec spec = NormSpec::uniform_lp(part, 2.0);
  for (bool ok : bound_certificate(q.traj, x_star, est.alpha_hat, Scheme::Jacobi, part, spec)) CHECK(ok);
}

TEST_CASE("modulus estimates") {
  const auto one = single_link(2, 1.0, 1.0);
  CHECK(estimate_modulus(one, 50).alpha_hat == 0.0);

  auto strong = two_pair_geometry(1);
  strong.distances = {{300.0, 30.0}, {30.0, 300.0}};
  CHECK_FALSE(estimate_modulus(Game(strong), 100).contractive);

  int contractive = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) contractive += estimate_modulus(Game(two_pair_geometry(seed)), 100).contractive;
  CHECK(contractive > 10);
}
