#pragma once

// MIMO interference game: K transmitter/receiver pairs with N antennas each.
// H(j, k) is the channel from transmitter j to receiver k.

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcontract/engine.hpp"
#include "qcontract/linalg.hpp"

namespace qcontract::mimo {

using linalg::ComplexMatrix;
using linalg::HermitianMatrix;

inline constexpr double kThermalNoiseDbmPerHz = -174.0;
inline constexpr double kDefaultBandwidthHz = 10e6;

double dbm_to_watt(double dbm);
/// Thermal noise power over the given bandwidth, in watts.
double thermal_noise_watt(double bandwidth_hz = kDefaultBandwidthHz);

struct GameConfig {
  std::size_t K = 2;
  std::size_t N = 2;
  std::vector<std::vector<double>> distances;  // distances[j][k], meters
  double gamma = 3.5;
  std::vector<double> power_dbm;  // one per link
  double noise_watt = thermal_noise_watt();
  std::uint64_t seed = 1;

  void validate() const;
  static GameConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Two pairs, N = 2, d11 = d22 = 100 m, d12 = 200 m, d21 = 500 m, 10 dBm each.
GameConfig two_pair_geometry(std::uint64_t seed);

class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(std::size_t K, std::vector<ComplexMatrix> H);
  static ChannelSet generate(const GameConfig& cfg);

  std::size_t K() const { return K_; }
  const ComplexMatrix& operator()(std::size_t j, std::size_t k) const { return H_.at(j * K_ + k); }

 private:
  std::size_t K_ = 0;
  std::vector<ComplexMatrix> H_;
};

using Profile = std::vector<HermitianMatrix>;

struct Game {
  GameConfig config;
  ChannelSet channels;
  std::vector<double> budgets;  // watts
  std::vector<HermitianMatrix> noise;

  Game() = default;
  Game(GameConfig cfg, ChannelSet ch);
  explicit Game(const GameConfig& cfg) : Game(cfg, ChannelSet::generate(cfg)) {}

  std::size_t K() const { return config.K; }
  std::size_t N() const { return config.N; }
};

/// (P/N) I for every link.
Profile equal_power_profile(const Game& g);

/// R_{-k} = R_n + sum_{j != k} H_jk P_j H_jk^H
HermitianMatrix interference_covariance(const Game& g, const Profile& p, std::size_t k);

/// Euclidean projection onto {lambda >= 0, sum lambda = budget}.
Vector simplex_projection(const Vector& sigma, double budget);

/// Frobenius projection of a Hermitian matrix onto {P >= 0, Tr P = budget}.
HermitianMatrix project_feasible(const HermitianMatrix& x, double budget);

/// Best response of link k to the others: [-(H^H R^{-1} H)^{-1}] projected.
HermitianMatrix waterfill(const Game& g, const Profile& p, std::size_t k);

/// log2 det(I + H^H R^{-1} H P) in bits per channel use.
double throughput(const Game& g, const Profile& p, std::size_t k);
double sum_throughput(const Game& g, const Profile& p);

// Real parameterization with ||vectorize(P)||_2 = ||P||_F: the N diagonal
// entries, then sqrt(2) Re and sqrt(2) Im of each upper off-diagonal entry in
// row-major order.
Vector vectorize(const HermitianMatrix& p);
HermitianMatrix devectorize(std::span<const double> v, std::size_t N);
Vector vectorize_profile(const Profile& p);
Profile devectorize_profile(std::span<const double> x, std::size_t K, std::size_t N);

/// Per-link box: [0, P] on the diagonal, [-P, P] elsewhere.
BoxDomain game_box(const Game& g);
BlockPartition game_partition(const Game& g);

/// The waterfilling map WF as a block mapping over the vectorized profile.
class MimoMapping : public BlockMapping {
 public:
  explicit MimoMapping(const Game& g, std::optional<double> modulus = std::nullopt);

  const BlockPartition& partition() const override { return part_; }
  const BoxDomain& domain() const override { return box_; }
  Vector eval_block(std::size_t k, std::span<const double> x) const override;
  void project_block(std::size_t k, std::span<double> block) const override;
  std::optional<double> declared_modulus() const override { return modulus_; }

  const Game& game() const { return game_; }

 private:
  const Game& game_;
  BlockPartition part_;
  BoxDomain box_;
  std::optional<double> modulus_;
};

enum class IwfaMode { Simultaneous, Sequential };

struct IwfaResult {
  Trajectory traj;
  Vector sum_throughput;  // per iterate
  Vector residuals;       // ||x(t+1) - x(t)||_2 per step
};

/// Simultaneous mode is the engine's Jacobi sweep; sequential mode updates
/// link k = t mod K at tick t and copies the others.
IwfaResult iwfa_run(const Game& g, const QuantizerSchedule& quantizers, IwfaMode mode, std::size_t steps,
                    const std::optional<Vector>& x_star = std::nullopt, const Profile* start = nullptr);

struct ModulusEstimate {
  double alpha_hat = 0.0;  // inflated by 1.05
  double raw_max = 0.0;
  bool contractive = false;
  std::size_t pairs = 0;
};

/// Largest sampled ratio ||WF(x) - WF(y)|| / ||x - y|| in the block-max Frobenius norm.
ModulusEstimate estimate_modulus(const Game& g, std::size_t samples, std::uint64_t seed = 7);

}  // namespace qcontract::mimo
