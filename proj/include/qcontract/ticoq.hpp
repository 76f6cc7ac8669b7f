#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcontract/norms.hpp"
#include "qcontract/quantizer_bank.hpp"

namespace qcontract {

enum class DesignCase { SqWmax, SqLp, VqLattice };

std::string to_string(DesignCase c);
DesignCase design_case_from_string(const std::string& s);

struct RateAllocation {
  DesignCase kind = DesignCase::SqWmax;
  int L = 0;
  Vector relaxed;         // per coordinate (SQ) or per block (VQ)
  std::vector<int> bits;  // integer solution, sums to L
  double relaxed_value = 0.0;
  double objective = 0.0;  // worst-case ||e||_block of the integer solution
  std::string rounding;    // "fractional" or "greedy"
};

struct TicoqDesign {
  RateAllocation alloc;
  Vector constants;  // C_m (SQ) or D_k (VQ)
  double tau = 0.0;
  Vector tau_k;      // L_p case only; +inf for blocks that receive no bits
  double p = 0.0;    // L_p exponent where relevant
  double L_prime = 0.0;
  double eta = 0.0;
};

// Design constants.
Vector sq_wmax_constants(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box);
Vector sq_lp_constants(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box);
Vector vq_lattice_constants(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box);

// Worst-case block-norm error of an integer allocation.
double wmax_objective(const Vector& C, const std::vector<int>& bits);
double lp_objective(const BlockPartition& part, const Vector& C, double p, const std::vector<int>& bits);
double vq_objective(const BlockPartition& part, const Vector& D, const std::vector<int>& bits);
double design_objective(const TicoqDesign& d, const BlockPartition& part, const std::vector<int>& bits);

/// Floors every entry, then gives the remaining round(sum of fractional parts)
/// bits to the largest fractional parts (ties: larger key, then lower index).
/// tied_at_cutoff lists indices whose fractional part equals the cutoff value.
std::vector<int> fractional_rounding(const Vector& relaxed, int L, const Vector& key,
                                     std::vector<std::size_t>* tied_at_cutoff = nullptr);

TicoqDesign ticoq_sq_wmax(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box, int L);
TicoqDesign ticoq_sq_lp(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box, int L);
TicoqDesign ticoq_vq_lattice(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box, int L);
TicoqDesign ticoq_design(DesignCase kind, const BlockPartition& part, const NormSpec& spec, const BoxDomain& box,
                         int L);

struct LpKkt {
  double slackness = 0.0;  // max over active blocks |sum_m min(C_m, tau_k) - tau| / tau
  double rate = 0.0;       // |sum relaxed - L|
};
LpKkt lp_kkt_residuals(const TicoqDesign& d, const BlockPartition& part);

/// Quantizer bank realizing an integer allocation.
QuantizerBank make_bank(const TicoqDesign& d, const BlockPartition& part, const BoxDomain& box);

struct OracleResult {
  std::vector<int> bits;  // lexicographically smallest optimum
  double value = 0.0;
  std::vector<std::vector<int>> ties;  // every optimum, when requested
  std::uint64_t evaluated = 0;
};

/// Exhaustive argmin over nonnegative integer vectors of length dims summing to L.
OracleResult allocation_oracle(const std::function<double(const std::vector<int>&)>& objective, std::size_t dims,
                               int L, bool collect_ties = false, std::uint64_t budget = 10000000);

/// Rate above which every coordinate (block) receives bits in the relaxed
/// optimum, so that the optimum equals eta 2^{-L/n}.
double tradeoff_threshold(DesignCase kind, const Vector& constants, const BlockPartition& part);
double tradeoff_eta(DesignCase kind, const Vector& constants, const BlockPartition& part, double p = 2.0);

nlohmann::json design_to_json(const TicoqDesign& d);

}  // namespace qcontract
