#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "qcontract/quantizer_bank.hpp"
#include "qcontract/ticoq.hpp"

namespace qcontract {

struct StageSchedule {
  double alpha = 0.0;
  std::size_t n = 1;
  int L = 0;
  std::size_t T = 1;
  double L_prime = 0.0;

  Vector relaxed;                           // L_bar(t)
  std::vector<int> rates;                   // L(t), sums to T * L
  std::vector<std::vector<int>> alternates;  // other schedules with the same objective
  bool in_regime = true;
  double required_L = 0.0;  // L' - n (T-1)/2 log2(alpha)

  double objective = 0.0;         // sum_t alpha^{-t} 2^{-L(t)/n}
  double scaled_objective = 0.0;  // alpha^{T-1} * objective

  // Filled by tvcoq_design.
  std::vector<TicoqDesign> stages;
  double eta = 0.0;
};

/// sum_t alpha^{-t} 2^{-L(t)/n}
double master_objective(double alpha, std::size_t n, const std::vector<int>& rates);

/// Rate split over the horizon. Outside the closed-form regime the exact
/// greedy allocation is used and in_regime is false.
StageSchedule tvcoq_master(double alpha, std::size_t n, int L, std::size_t T, double L_prime = 0.0);

StageSchedule tvcoq_design(DesignCase kind, const BlockPartition& part, const NormSpec& spec, const BoxDomain& box,
                           int L, std::size_t T, double alpha);

/// One bank per stage.
QuantizerSchedule schedule_banks(const StageSchedule& s, const BlockPartition& part, const BoxDomain& box);

/// T alpha^{(T-1)/2} eta 2^{-L/n}
double tvcoq_error_bound(double alpha, std::size_t n, int L, std::size_t T, double eta);

nlohmann::json schedule_to_json(const StageSchedule& s);

}  // namespace qcontract
