#include "qcontract/tvcoq.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qcontract {

double master_objective(double alpha, std::size_t n, const std::vector<int>& rates) {
  double s = 0.0;
  for (std::size_t t = 0; t < rates.size(); ++t)
    s += std::pow(alpha, -static_cast<double>(t)) * std::exp2(-static_cast<double>(rates[t]) / static_cast<double>(n));
  return s;
}

StageSchedule tvcoq_master(double alpha, std::size_t n, int L, std::size_t T, double L_prime) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tvcoq: alpha must lie in (0, 1)");
  if (n == 0 || T == 0) throw std::invalid_argument("tvcoq: n and T must be positive");
  if (L < 0) throw std::invalid_argument("tvcoq: L must be nonnegative");

  StageSchedule s;
  s.alpha = alpha;
  s.n = n;
  s.L = L;
  s.T = T;
  s.L_prime = L_prime;
  const double nd = static_cast<double>(n);
  const double la = std::log2(alpha);
  const double half = (static_cast<double>(T) - 1.0) / 2.0;
  s.required_L = L_prime - nd * half * la;
  s.in_regime = L >= s.required_L - 1e-9;
  for (std::size_t t = 0; t < T; ++t) s.relaxed.push_back(L + nd * la * (half - static_cast<double>(t)));
  const int total = static_cast<int>(T) * L;

  if (s.in_regime) {
    Vector key(T);
    std::iota(key.begin(), key.end(), 0.0);  // later stages first on ties
    std::vector<std::size_t> tied;
    s.rates = fractional_rounding(s.relaxed, total, key, &tied);
    s.objective = master_objective(alpha, n, s.rates);
    // Swapping a ceil and a floor inside the tied group leaves the objective unchanged.
    const Vector base(s.relaxed);
    for (std::size_t i : tied)
      for (std::size_t j : tied) {
        if (s.rates[i] <= std::floor(base[i]) || s.rates[j] > std::floor(base[j])) continue;
        auto alt = s.rates;
        --alt[i];
        ++alt[j];
        if (std::abs(master_objective(alpha, n, alt) - s.objective) <= 1e-12 * s.objective)
          s.alternates.push_back(std::move(alt));
      }
  } else {
    // Separable convex objective: marginal greedy is exact.
    s.rates.assign(T, 0);
    for (int b = 0; b < total; ++b) {
      std::size_t best = 0;
      double gain = -1.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double g = std::pow(alpha, -static_cast<double>(t)) * std::exp2(-s.rates[t] / nd) *
                         (1.0 - std::exp2(-1.0 / nd));
        if (g >= gain) gain = g, best = t;
      }
      ++s.rates[best];
    }
    s.objective = master_objective(alpha, n, s.rates);
  }
  s.scaled_objective = std::pow(alpha, static_cast<double>(T) - 1.0) * s.objective;
  return s;
}

StageSchedule tvcoq_design(DesignCase kind, const BlockPartition& part, const NormSpec& spec, const BoxDomain& box,
                           int L, std::size_t T, double alpha) {
  const TicoqDesign flat = ticoq_design(kind, part, spec, box, L);
  StageSchedule s = tvcoq_master(alpha, part.dim(), L, T, flat.L_prime);
  s.eta = flat.eta;
  for (std::size_t t = 0; t < T; ++t) s.stages.push_back(ticoq_design(kind, part, spec, box, s.rates[t]));
  return s;
}

QuantizerSchedule schedule_banks(const StageSchedule& s, const BlockPartition& part, const BoxDomain& box) {
  if (s.stages.size() != s.T) throw std::invalid_argument("schedule has no per-stage designs");
  QuantizerSchedule banks;
  for (const auto& d : s.stages) banks.push_back(make_bank(d, part, box));
  return banks;
}

double tvcoq_error_bound(double alpha, std::size_t n, int L, std::size_t T, double eta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tvcoq: alpha must lie in (0, 1)");
  const double Td = static_cast<double>(T);
  return Td * std::pow(alpha, (Td - 1.0) / 2.0) * eta * std::exp2(-static_cast<double>(L) / static_cast<double>(n));
}

nlohmann::json schedule_to_json(const StageSchedule& s) {
  nlohmann::json j;
  j["alpha"] = s.alpha;
  j["T"] = s.T;
  j["L"] = s.L;
  j["n"] = s.n;
  j["relaxed"] = s.relaxed;
  j["rates"] = s.rates;
  j["alternates"] = s.alternates;
  j["in_regime"] = s.in_regime;
  j["required_L"] = s.required_L;
  j["L_prime"] = s.L_prime;
  j["objective"] = s.objective;
  j["scaled_objective"] = s.scaled_objective;
  auto& st = j["stages"] = nlohmann::json::array();
  for (std::size_t t = 0; t < s.T; ++t) {
    nlohmann::json e{{"t", t}, {"L_t", s.rates[t]}};
    if (t < s.stages.size()) {
      e["allocation"] = s.stages[t].alloc.bits;
      e["e_star"] = s.stages[t].alloc.relaxed_value;
      e["e_integer"] = s.stages[t].alloc.objective;
    }
    st.push_back(std::move(e));
  }
  if (!s.stages.empty()) j["eta"] = s.eta;
  return j;
}

}  // namespace qcontract
