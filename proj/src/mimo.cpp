#include "qcontract/mimo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qcontract::mimo {

using linalg::Complex;

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double thermal_noise_watt(double bandwidth_hz) {
  return dbm_to_watt(kThermalNoiseDbmPerHz + 10.0 * std::log10(bandwidth_hz));
}

void GameConfig::validate() const {
  if (K < 1) throw std::invalid_argument("game: K must be at least 1");
  if (N < 1) throw std::invalid_argument("game: N must be at least 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("game: gamma must be positive");
  if (distances.size() != K) throw std::invalid_argument("game: distances must be K x K");
  for (const auto& row : distances) {
    if (row.size() != K) throw std::invalid_argument("game: distances must be K x K");
    for (double d : row)
      if (!(d > 0.0)) throw std::invalid_argument("game: distances must be positive");
  }
  if (power_dbm.size() != K) throw std::invalid_argument("game: power_dbm needs one entry per link");
  for (double p : power_dbm)
    if (!std::isfinite(p)) throw std::invalid_argument("game: power_dbm must be finite");
  if (!(noise_watt > 0.0)) throw std::invalid_argument("game: noise must be positive");
}

GameConfig GameConfig::from_json(const nlohmann::json& j) {
  GameConfig c;
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw std::invalid_argument(std::string("game: missing field '") + key + "'");
    return j.at(key);
  };
  c.K = need("K").get<std::size_t>();
  c.N = need("N").get<std::size_t>();
  c.distances = need("distances").get<std::vector<std::vector<double>>>();
  c.gamma = j.value("gamma", 3.5);
  const auto& pw = need("power_dbm");
  c.power_dbm = pw.is_array() ? pw.get<std::vector<double>>() : std::vector<double>(c.K, pw.get<double>());
  if (j.contains("noise")) {
    const auto& nz = j.at("noise");
    if (nz.is_number()) {
      c.noise_watt = nz.get<double>();
    } else if (nz.contains("dbm")) {
      c.noise_watt = dbm_to_watt(nz.at("dbm").get<double>());
    } else {
      c.noise_watt = thermal_noise_watt(nz.value("bandwidth_hz", kDefaultBandwidthHz));
    }
  }
  c.seed = j.value("seed", std::uint64_t{1});
  c.validate();
  return c;
}

nlohmann::json GameConfig::to_json() const {
  return {{"K", K},         {"N", N},         {"distances", distances}, {"gamma", gamma},
          {"power_dbm", power_dbm}, {"noise", noise_watt}, {"seed", seed}};
}

GameConfig two_pair_geometry(std::uint64_t seed) {
  GameConfig c;
  c.K = 2;
  c.N = 2;
  c.distances = {{100.0, 200.0}, {500.0, 100.0}};
  c.gamma = 3.5;
  c.power_dbm = {10.0, 10.0};
  c.seed = seed;
  return c;
}

ChannelSet::ChannelSet(std::size_t K, std::vector<ComplexMatrix> H) : K_(K), H_(std::move(H)) {
  if (H_.size() != K_ * K_) throw std::invalid_argument("channel set needs K x K matrices");
  for (const auto& h : H_)
    if (!h.all_finite()) throw std::invalid_argument("channel set: non-finite entry");
}

ChannelSet ChannelSet::generate(const GameConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::vector<ComplexMatrix> H;
  for (std::size_t j = 0; j < cfg.K; ++j)
    for (std::size_t k = 0; k < cfg.K; ++k) {
      const double amp = std::sqrt(std::pow(cfg.distances[j][k], -cfg.gamma));
      ComplexMatrix h(cfg.N, cfg.N);
      for (std::size_t r = 0; r < cfg.N; ++r)
        for (std::size_t c = 0; c < cfg.N; ++c) {
          const double re = g(rng);
          const double im = g(rng);
          h(r, c) = amp * Complex(re, im);
        }
      H.push_back(std::move(h));
    }
  return ChannelSet(cfg.K, std::move(H));
}

Game::Game(GameConfig cfg, ChannelSet ch) : config(std::move(cfg)), channels(std::move(ch)) {
  config.validate();
  if (channels.K() != config.K) throw std::invalid_argument("game: channel set size mismatch");
  for (double p : config.power_dbm) budgets.push_back(dbm_to_watt(p));
  noise.assign(config.K, HermitianMatrix(config.noise_watt * ComplexMatrix::identity(config.N)));
}

Profile equal_power_profile(const Game& g) {
  Profile p;
  for (std::size_t k = 0; k < g.K(); ++k)
    p.emplace_back((g.budgets[k] / static_cast<double>(g.N())) * ComplexMatrix::identity(g.N()));
  return p;
}

HermitianMatrix interference_covariance(const Game& g, const Profile& p, std::size_t k) {
  if (p.size() != g.K()) throw std::invalid_argument("profile size mismatch");
  ComplexMatrix r = g.noise.at(k).matrix();
  for (std::size_t j = 0; j < g.K(); ++j) {
    if (j == k) continue;
    const auto& h = g.channels(j, k);
    r += h * p[j].matrix() * h.adjoint();
  }
  return HermitianMatrix(r);
}

Vector simplex_projection(const Vector& sigma, double budget) {
  if (sigma.empty()) throw std::invalid_argument("simplex projection of an empty vector");
  if (!(budget >= 0.0)) throw std::invalid_argument("simplex projection: negative budget");
  Vector s = sigma;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, nu = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    const double cand = (cum - budget) / static_cast<double>(j + 1);
    if (s[j] - cand > 0.0) nu = cand;
  }
  Vector out(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) out[i] = std::max(sigma[i] - nu, 0.0);
  return out;
}

HermitianMatrix project_feasible(const HermitianMatrix& x, double budget) {
  const auto eig = linalg::herm_eig(x);
  return linalg::from_eigen(eig.vectors, simplex_projection(eig.values, budget));
}

namespace {

// H^H R^{-1} H
HermitianMatrix effective_gain(const Game& g, const Profile& p, std::size_t k) {
  const auto& h = g.channels(k, k);
  const HermitianMatrix r = interference_covariance(g, p, k);
  return HermitianMatrix(h.adjoint() * linalg::psd_solve(r, h));
}

void check_direct_channel(const ComplexMatrix& h) {
  const auto eig = linalg::herm_eig(HermitianMatrix(h.adjoint() * h));
  const double lo = eig.values.front(), hi = eig.values.back();
  if (!(lo > 0.0) || std::sqrt(hi / lo) > 1e12) throw std::domain_error("waterfill: direct channel is singular");
}

}  // namespace

HermitianMatrix waterfill(const Game& g, const Profile& p, std::size_t k) {
  check_direct_channel(g.channels(k, k));
  const HermitianMatrix m = effective_gain(g, p, k);
  const ComplexMatrix inv = linalg::psd_solve(m, ComplexMatrix::identity(g.N()));
  const HermitianMatrix x0(-1.0 * inv);
  return project_feasible(x0, g.budgets.at(k));
}

double throughput(const Game& g, const Profile& p, std::size_t k) {
  // det(I + H^H R^{-1} H P) = det(R + H P H^H) / det(R)
  const auto& h = g.channels(k, k);
  const HermitianMatrix r = interference_covariance(g, p, k);
  const HermitianMatrix s(r.matrix() + h * p.at(k).matrix() * h.adjoint());
  return (linalg::logdet_psd(s) - linalg::logdet_psd(r)) / std::log(2.0);
}

double sum_throughput(const Game& g, const Profile& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.K(); ++k) s += throughput(g, p, k);
  return s;
}

Vector vectorize(const HermitianMatrix& p) {
  const std::size_t N = p.dim();
  Vector v;
  v.reserve(N * N);
  for (std::size_t i = 0; i < N; ++i) v.push_back(p(i, i).real());
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      v.push_back(std::sqrt(2.0) * p(i, j).real());
      v.push_back(std::sqrt(2.0) * p(i, j).imag());
    }
  return v;
}

HermitianMatrix devectorize(std::span<const double> v, std::size_t N) {
  if (v.size() != N * N) throw std::invalid_argument("devectorize: expected N^2 entries");
  ComplexMatrix m(N, N);
  for (std::size_t i = 0; i < N; ++i) m(i, i) = v[i];
  std::size_t pos = N;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      const Complex z(v[pos] / std::sqrt(2.0), v[pos + 1] / std::sqrt(2.0));
      m(i, j) = z;
      m(j, i) = std::conj(z);
      pos += 2;
    }
  return HermitianMatrix(m);
}

Vector vectorize_profile(const Profile& p) {
  Vector x;
  for (const auto& pk : p) {
    const Vector v = vectorize(pk);
    x.insert(x.end(), v.begin(), v.end());
  }
  return x;
}

Profile devectorize_profile(std::span<const double> x, std::size_t K, std::size_t N) {
  if (x.size() != K * N * N) throw std::invalid_argument("devectorize_profile: size mismatch");
  Profile p;
  for (std::size_t k = 0; k < K; ++k) p.push_back(devectorize(x.subspan(k * N * N, N * N), N));
  return p;
}

BoxDomain game_box(const Game& g) {
  std::vector<Interval> iv;
  const std::size_t N = g.N();
  for (std::size_t k = 0; k < g.K(); ++k) {
    const double P = g.budgets[k];
    for (std::size_t i = 0; i < N; ++i) iv.push_back({0.0, P});
    for (std::size_t i = N; i < N * N; ++i) iv.push_back({-P, P});
  }
  return BoxDomain(std::move(iv));
}

BlockPartition game_partition(const Game& g) {
  return BlockPartition(std::vector<std::size_t>(g.K(), g.N() * g.N()));
}

MimoMapping::MimoMapping(const Game& g, std::optional<double> modulus)
    : game_(g), part_(game_partition(g)), box_(game_box(g)), modulus_(modulus) {}

Vector MimoMapping::eval_block(std::size_t k, std::span<const double> x) const {
  const Profile p = devectorize_profile(x, game_.K(), game_.N());
  return vectorize(waterfill(game_, p, k));
}

void MimoMapping::project_block(std::size_t k, std::span<double> block) const {
  const Vector v = vectorize(project_feasible(devectorize(block, game_.N()), game_.budgets.at(k)));
  std::copy(v.begin(), v.end(), block.begin());
}

IwfaResult iwfa_run(const Game& g, const QuantizerSchedule& quantizers, IwfaMode mode, std::size_t steps,
                    const std::optional<Vector>& x_star, const Profile* start) {
  const MimoMapping map(g);
  const auto& part = map.partition();
  const Vector x0 = vectorize_profile(start ? *start : equal_power_profile(g));
  const NormSpec spec = NormSpec::uniform_lp(part, 2.0);
  IwfaResult res;
  if (mode == IwfaMode::Simultaneous) {
    RunOptions opts;
    opts.scheme = Scheme::Jacobi;
    opts.norm = &spec;
    opts.x_star = x_star;
    res.traj = run_iteration(map, quantizers, x0, steps, opts);
  } else {
    if (steps == 0) throw std::invalid_argument("iwfa: step count must be positive");
    if (quantizers.size() > 1 && quantizers.size() < steps)
      throw std::invalid_argument("iwfa: quantizer schedule shorter than the horizon");
    auto& traj = res.traj;
    traj.iterates.push_back(x0);
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t k = t % g.K();
      Vector next = traj.iterates.back();
      Vector e(next.size(), 0.0);
      Vector raw = map.eval_block(k, next);
      map.domain().block(part, k).clamp(raw);
      Vector fin = raw;
      if (!quantizers.empty()) {
        const auto& bank = quantizers.size() == 1 ? quantizers.front() : quantizers[t];
        fin = bank.quantize_block(k, raw);
        map.project_block(k, fin);
      }
      auto nk = part.block(std::span<double>(next), k);
      auto ek = part.block(std::span<double>(e), k);
      for (std::size_t i = 0; i < fin.size(); ++i) {
        nk[i] = fin[i];
        ek[i] = fin[i] - raw[i];
      }
      traj.error_norms.push_back(block_norm(e, part, spec));
      traj.errors.push_back(std::move(e));
      traj.iterates.push_back(std::move(next));
    }
    if (x_star)
      for (const auto& x : traj.iterates) {
        Vector d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - (*x_star)[i];
        traj.distances.push_back(block_norm(d, part, spec));
      }
  }
  for (std::size_t t = 0; t < res.traj.iterates.size(); ++t) {
    const auto& x = res.traj.iterates[t];
    res.sum_throughput.push_back(sum_throughput(g, devectorize_profile(x, g.K(), g.N())));
    if (t > 0) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(x[i] - res.traj.iterates[t - 1][i], 2);
      res.residuals.push_back(std::sqrt(s));
    }
  }
  return res;
}

namespace {

HermitianMatrix random_feasible(std::mt19937_64& rng, std::size_t N, double budget) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> rank_dist(1, N);
  const std::size_t r = rank_dist(rng);
  ComplexMatrix a(N, r);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < r; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix p = a * a.adjoint();
  p *= budget / p.trace().real();
  return HermitianMatrix(p);
}

}  // namespace

ModulusEstimate estimate_modulus(const Game& g, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("estimate_modulus: need at least two samples");
  const MimoMapping map(g);
  const auto& part = map.partition();
  const NormSpec spec = NormSpec::uniform_lp(part, 2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ModulusEstimate est;
  auto ratio = [&](const Vector& x, const Vector& y) {
    Vector dx(x.size()), dy(x.size());
    const Vector fx = map.eval(x), fy = map.eval(y);
    for (std::size_t i = 0; i < x.size(); ++i) {
      dx[i] = x[i] - y[i];
      dy[i] = fx[i] - fy[i];
    }
    const double den = block_norm(dx, part, spec);
    if (den <= 0.0) return;
    est.raw_max = std::max(est.raw_max, block_norm(dy, part, spec) / den);
    ++est.pairs;
  };
  for (std::size_t s = 0; s < samples; ++s) {
    Profile a, b;
    for (std::size_t k = 0; k < g.K(); ++k) {
      a.push_back(random_feasible(rng, g.N(), g.budgets[k]));
      b.push_back(random_feasible(rng, g.N(), g.budgets[k]));
    }
    const Vector x = vectorize_profile(a);
    ratio(x, vectorize_profile(b));
    // local pair: small feasible perturbation of x
    Vector y = x;
    for (std::size_t k = 0; k < g.K(); ++k) {
      auto yk = part.block(std::span<double>(y), k);
      for (double& v : yk) v += 1e-4 * g.budgets[k] * gauss(rng);
      map.project_block(k, yk);
    }
    ratio(x, y);
  }
  est.alpha_hat = 1.05 * est.raw_max;
  est.contractive = est.alpha_hat < 1.0;
  return est;
}

}  // namespace qcontract::mimo
