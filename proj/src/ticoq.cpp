#include "qcontract/ticoq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qcontract/vquant.hpp"

namespace qcontract {

std::string to_string(DesignCase c) {
  switch (c) {
    case DesignCase::SqWmax: return "ticoq-wmax";
    case DesignCase::SqLp: return "ticoq-lp";
    case DesignCase::VqLattice: return "ticoq-vq";
  }
  return "?";
}

DesignCase design_case_from_string(const std::string& s) {
  if (s == "ticoq-wmax" || s == "wmax") return DesignCase::SqWmax;
  if (s == "ticoq-lp" || s == "lp") return DesignCase::SqLp;
  if (s == "ticoq-vq" || s == "vq" || s == "lattice") return DesignCase::VqLattice;
  throw std::invalid_argument("unknown design case '" + s + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_box(const BlockPartition& part, const BoxDomain& box) {
  if (box.dim() != part.dim()) throw std::invalid_argument("box dimension does not match the partition");
}

void check_rate(int L) {
  if (L < 0) throw std::invalid_argument("rate L must be nonnegative");
}

double common_p(const BlockPartition& part, const NormSpec& spec) {
  double p = 0.0;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    const auto* lp = std::get_if<Lp>(&spec.per_block[k]);
    if (!lp) throw std::invalid_argument("L_p design needs L_p norms on every block");
    if (k == 0) p = lp->p;
    if (lp->p != p) throw std::invalid_argument("L_p design needs a common exponent (mixed-norm blocks)");
  }
  return p;
}

// min max_i c_i 2^{-x_i/s_i}, sum x = L, x >= 0, solved on the sorted prefix.
// Returns log2 tau; entries with c_i = 0 never receive bits.
double water_level(const Vector& log_c, const Vector& weight, double L) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < log_c.size(); ++i)
    if (std::isfinite(log_c[i])) idx.push_back(i);
  if (idx.empty()) throw std::invalid_argument("all design constants are zero (degenerate box)");
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return log_c[a] > log_c[b]; });
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    num += weight[idx[j]] * log_c[idx[j]];
    den += weight[idx[j]];
    const double lt = (num - L) / den;
    if (j + 1 == idx.size() || lt >= log_c[idx[j + 1]]) return lt;
  }
  return 0.0;  // unreachable
}

}  // namespace

Vector sq_wmax_constants(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box) {
  spec.validate(part);
  check_box(part, box);
  Vector C(part.dim());
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    const auto* wm = std::get_if<WeightedMax>(&spec.per_block[k]);
    if (!wm) throw std::invalid_argument("weighted-max design needs weighted-max norms on every block");
    for (std::size_t i = 0; i < part.block_size(k); ++i) {
      const std::size_t m = part.offset(k) + i;
      C[m] = box[m].length() / (2.0 * wm->a[i] * spec.w[k]);
    }
  }
  return C;
}

Vector sq_lp_constants(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box) {
  spec.validate(part);
  check_box(part, box);
  const double p = common_p(part, spec);
  Vector C(part.dim());
  for (std::size_t k = 0; k < part.num_blocks(); ++k)
    for (std::size_t i = 0; i < part.block_size(k); ++i) {
      const std::size_t m = part.offset(k) + i;
      C[m] = std::pow(box[m].length() / (2.0 * spec.w[k]), p);
    }
  return C;
}

Vector vq_lattice_constants(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box) {
  spec.validate(part);
  check_box(part, box);
  Vector D(part.num_blocks());
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    const auto* lp = std::get_if<Lp>(&spec.per_block[k]);
    if (!lp || lp->p < 2.0) throw std::invalid_argument("lattice design needs L_p block norms with p >= 2");
    const BoxDomain bk = box.block(part, k);
    for (double len : bk.lengths())
      if (!(len > 0.0)) throw std::invalid_argument("lattice design: degenerate box");
    D[k] = vq_worst_case_error(bk.lengths(), part.block_size(k), 0) / spec.w[k];
  }
  return D;
}

double wmax_objective(const Vector& C, const std::vector<int>& bits) {
  if (C.size() != bits.size()) throw std::invalid_argument("objective: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < C.size(); ++i) m = std::max(m, std::ldexp(C[i], -bits[i]));
  return m;
}

double lp_objective(const BlockPartition& part, const Vector& C, double p, const std::vector<int>& bits) {
  if (C.size() != part.dim() || bits.size() != part.dim()) throw std::invalid_argument("objective: size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    double s = 0.0;
    for (std::size_t i = part.offset(k); i < part.offset(k) + part.block_size(k); ++i)
      s += C[i] * std::exp2(-p * bits[i]);
    m = std::max(m, s);
  }
  return std::pow(m, 1.0 / p);
}

double vq_objective(const BlockPartition& part, const Vector& D, const std::vector<int>& bits) {
  if (D.size() != part.num_blocks() || bits.size() != part.num_blocks())
    throw std::invalid_argument("objective: size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < D.size(); ++k)
    m = std::max(m, D[k] * std::exp2(-static_cast<double>(bits[k]) / static_cast<double>(part.block_size(k))));
  return m;
}

double design_objective(const TicoqDesign& d, const BlockPartition& part, const std::vector<int>& bits) {
  switch (d.alloc.kind) {
    case DesignCase::SqWmax: return wmax_objective(d.constants, bits);
    case DesignCase::SqLp: return lp_objective(part, d.constants, d.p, bits);
    case DesignCase::VqLattice: return vq_objective(part, d.constants, bits);
  }
  return 0.0;
}

std::vector<int> fractional_rounding(const Vector& relaxed, int L, const Vector& key,
                                     std::vector<std::size_t>* tied_at_cutoff) {
  const std::size_t n = relaxed.size();
  std::vector<int> bits(n);
  Vector frac(n);
  long floor_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::floor(relaxed[i]);
    bits[i] = static_cast<int>(f);
    frac[i] = relaxed[i] - f;
    floor_sum += bits[i];
  }
  const long extra = L - floor_sum;
  if (extra < 0 || extra > static_cast<long>(n)) throw std::logic_error("fractional rounding: relaxed sum off");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    if (key[a] != key[b]) return key[a] > key[b];
    return a < b;
  });
  for (long j = 0; j < extra; ++j) ++bits[order[j]];
  if (tied_at_cutoff && extra > 0 && extra < static_cast<long>(n)) {
    const double cut = frac[order[extra - 1]];
    const double nxt = frac[order[extra]];
    if (std::abs(cut - nxt) <= 1e-9)
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(frac[i] - cut) <= 1e-9) tied_at_cutoff->push_back(i);
  }
  return bits;
}

TicoqDesign ticoq_sq_wmax(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box, int L) {
  check_rate(L);
  TicoqDesign d;
  d.constants = sq_wmax_constants(part, spec, box);
  const std::size_t n = part.dim();
  Vector logc(n);
  for (std::size_t m = 0; m < n; ++m) logc[m] = d.constants[m] > 0.0 ? std::log2(d.constants[m]) : -kInf;
  const double lt = water_level(logc, Vector(n, 1.0), L);
  d.tau = std::exp2(lt);
  d.alloc.kind = DesignCase::SqWmax;
  d.alloc.L = L;
  d.alloc.relaxed.resize(n);
  for (std::size_t m = 0; m < n; ++m) d.alloc.relaxed[m] = std::max(0.0, logc[m] - lt);
  d.alloc.relaxed_value = d.tau;
  d.alloc.bits = fractional_rounding(d.alloc.relaxed, L, d.constants);
  d.alloc.rounding = "fractional";
  d.alloc.objective = wmax_objective(d.constants, d.alloc.bits);
  d.L_prime = tradeoff_threshold(DesignCase::SqWmax, d.constants, part);
  d.eta = tradeoff_eta(DesignCase::SqWmax, d.constants, part);
  return d;
}

namespace {

struct LpBlockLevel {
  double tau_k = kInf;  // kInf: block inactive
  double bits = 0.0;
};

// Per-block level: sum_m min(C_m, tau_k) = tau, bits = sum (1/p) log2(C_m/tau_k)^+.
LpBlockLevel lp_block_level(const Vector& sorted_c, double tau, double p) {
  LpBlockLevel r;
  const double total = std::accumulate(sorted_c.begin(), sorted_c.end(), 0.0);
  if (total <= tau) return r;
  const std::size_t nk = sorted_c.size();
  double prefix = 0.0;
  for (std::size_t j = 0; j < nk; ++j) {
    // j smallest constants saturated (C_m <= tau_k), the rest sit at tau_k
    const double tk = (tau - prefix) / static_cast<double>(nk - j);
    if (tk <= sorted_c[j] && (j == 0 || tk >= sorted_c[j - 1])) {
      r.tau_k = tk;
      break;
    }
    prefix += sorted_c[j];
  }
  if (!std::isfinite(r.tau_k)) r.tau_k = tau / static_cast<double>(nk);  // numerically unreachable
  for (double c : sorted_c)
    if (c > r.tau_k) r.bits += std::log2(c / r.tau_k) / p;
  return r;
}

}  // namespace

TicoqDesign ticoq_sq_lp(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box, int L) {
  check_rate(L);
  TicoqDesign d;
  d.constants = sq_lp_constants(part, spec, box);
  d.p = common_p(part, spec);
  const std::size_t K = part.num_blocks();
  std::vector<Vector> sorted(K);
  double max_block = 0.0, min_pos = kInf;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = part.offset(k); i < part.offset(k) + part.block_size(k); ++i) {
      sorted[k].push_back(d.constants[i]);
      if (d.constants[i] > 0.0) min_pos = std::min(min_pos, d.constants[i]);
    }
    std::sort(sorted[k].begin(), sorted[k].end());
    max_block = std::max(max_block, std::accumulate(sorted[k].begin(), sorted[k].end(), 0.0));
  }
  if (!(max_block > 0.0)) throw std::invalid_argument("all design constants are zero (degenerate box)");

  auto total_bits = [&](double lt) {
    double s = 0.0;
    for (const auto& c : sorted) s += lp_block_level(c, std::exp2(lt), d.p).bits;
    return s;
  };
  // Bits are nonincreasing in tau; hi gives zero bits, lo at least L.
  double hi = std::log2(max_block);
  double lo = std::log2(min_pos) - d.p * L - 1.0;
  if (L > 0) {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (total_bits(mid) > L ? lo : hi) = mid;
    }
  }
  d.tau = std::exp2(hi);
  d.tau_k.assign(K, kInf);
  d.alloc.kind = DesignCase::SqLp;
  d.alloc.L = L;
  d.alloc.relaxed.assign(part.dim(), 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto lvl = lp_block_level(sorted[k], d.tau, d.p);
    d.tau_k[k] = lvl.tau_k;
    for (std::size_t i = part.offset(k); i < part.offset(k) + part.block_size(k); ++i)
      if (d.constants[i] > lvl.tau_k) d.alloc.relaxed[i] = std::log2(d.constants[i] / lvl.tau_k) / d.p;
  }
  d.alloc.relaxed_value = std::pow(d.tau, 1.0 / d.p);

  // Greedy: each bit goes to the largest term of the bottleneck block.
  std::vector<int> bits(part.dim(), 0);
  Vector term = d.constants;
  Vector sums(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) sums[k] = std::accumulate(sorted[k].begin(), sorted[k].end(), 0.0);
  for (int b = 0; b < L; ++b) {
    const std::size_t k = static_cast<std::size_t>(std::max_element(sums.begin(), sums.end()) - sums.begin());
    std::size_t best = part.offset(k);
    for (std::size_t i = part.offset(k); i < part.offset(k) + part.block_size(k); ++i)
      if (term[i] > term[best]) best = i;
    ++bits[best];
    term[best] = d.constants[best] * std::exp2(-d.p * bits[best]);
    double s = 0.0;
    for (std::size_t i = part.offset(k); i < part.offset(k) + part.block_size(k); ++i) s += term[i];
    sums[k] = s;
  }
  d.alloc.bits = bits;
  d.alloc.rounding = "greedy";
  d.alloc.objective = lp_objective(part, d.constants, d.p, bits);
  d.L_prime = tradeoff_threshold(DesignCase::SqLp, d.constants, part);
  d.eta = tradeoff_eta(DesignCase::SqLp, d.constants, part, d.p);
  return d;
}

TicoqDesign ticoq_vq_lattice(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box, int L) {
  check_rate(L);
  TicoqDesign d;
  d.constants = vq_lattice_constants(part, spec, box);
  const std::size_t K = part.num_blocks();
  Vector logd(K), nk(K);
  for (std::size_t k = 0; k < K; ++k) {
    logd[k] = std::log2(d.constants[k]);
    nk[k] = static_cast<double>(part.block_size(k));
  }
  const double lt = water_level(logd, nk, L);
  d.tau = std::exp2(lt);
  d.alloc.kind = DesignCase::VqLattice;
  d.alloc.L = L;
  d.alloc.relaxed.resize(K);
  for (std::size_t k = 0; k < K; ++k) d.alloc.relaxed[k] = nk[k] * std::max(0.0, logd[k] - lt);
  d.alloc.relaxed_value = d.tau;
  d.p = 2.0;

  const bool equal = std::all_of(nk.begin(), nk.end(), [&](double v) { return v == nk[0]; });
  if (equal) {
    d.alloc.bits = fractional_rounding(d.alloc.relaxed, L, d.constants);
    d.alloc.rounding = "fractional";
  } else {
    std::vector<int> bits(K, 0);
    for (int b = 0; b < L; ++b) {
      std::size_t best = 0;
      double bv = -1.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double v = d.constants[k] * std::exp2(-bits[k] / nk[k]);
        if (v > bv) bv = v, best = k;
      }
      ++bits[best];
    }
    d.alloc.bits = bits;
    d.alloc.rounding = "greedy";
  }
  d.alloc.objective = vq_objective(part, d.constants, d.alloc.bits);
  d.L_prime = tradeoff_threshold(DesignCase::VqLattice, d.constants, part);
  d.eta = tradeoff_eta(DesignCase::VqLattice, d.constants, part);
  return d;
}

TicoqDesign ticoq_design(DesignCase kind, const BlockPartition& part, const NormSpec& spec, const BoxDomain& box,
                         int L) {
  switch (kind) {
    case DesignCase::SqWmax: return ticoq_sq_wmax(part, spec, box, L);
    case DesignCase::SqLp: return ticoq_sq_lp(part, spec, box, L);
    case DesignCase::VqLattice: return ticoq_vq_lattice(part, spec, box, L);
  }
  throw std::invalid_argument("unknown design case");
}

LpKkt lp_kkt_residuals(const TicoqDesign& d, const BlockPartition& part) {
  if (d.alloc.kind != DesignCase::SqLp) throw std::invalid_argument("KKT residuals apply to the L_p design");
  LpKkt r;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    if (!std::isfinite(d.tau_k[k])) continue;
    double s = 0.0;
    for (std::size_t i = part.offset(k); i < part.offset(k) + part.block_size(k); ++i)
      s += std::min(d.constants[i], d.tau_k[k]);
    r.slackness = std::max(r.slackness, std::abs(s - d.tau) / d.tau);
  }
  r.rate = std::abs(std::accumulate(d.alloc.relaxed.begin(), d.alloc.relaxed.end(), 0.0) - d.alloc.L);
  return r;
}

QuantizerBank make_bank(const TicoqDesign& d, const BlockPartition& part, const BoxDomain& box) {
  if (d.alloc.kind == DesignCase::VqLattice) return QuantizerBank::lattice(part, box, d.alloc.bits);
  return QuantizerBank::scalar(part, box, d.alloc.bits);
}

OracleResult allocation_oracle(const std::function<double(const std::vector<int>&)>& objective, std::size_t dims,
                               int L, bool collect_ties, std::uint64_t budget) {
  if (dims == 0) throw std::invalid_argument("oracle: no variables");
  check_rate(L);
  // C(L + dims - 1, dims - 1) candidates
  double count = 1.0;
  for (std::size_t i = 1; i < dims; ++i) count = count * static_cast<double>(L + i) / static_cast<double>(i);
  if (count > static_cast<double>(budget)) throw std::length_error("oracle: enumeration budget exceeded");

  OracleResult res;
  res.value = kInf;
  std::vector<int> x(dims, 0);
  // Lexicographic order: recurse over the first coordinate from 0 upward.
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == dims) {
      x[i] = left;
      const double v = objective(x);
      ++res.evaluated;
      if (v < res.value) {
        res.value = v;
        res.bits = x;
        if (collect_ties) res.ties.assign(1, x);
      } else if (v == res.value && collect_ties) {
        res.ties.push_back(x);
      }
      return;
    }
    for (int b = 0; b <= left; ++b) {
      x[i] = b;
      rec(i + 1, left - b);
    }
  };
  rec(0, L);
  return res;
}

double tradeoff_threshold(DesignCase kind, const Vector& constants, const BlockPartition& part) {
  if (kind == DesignCase::VqLattice) {
    if (constants.size() != part.num_blocks()) throw std::invalid_argument("threshold: one D per block");
    double s = 0.0, mn = kInf;
    for (std::size_t k = 0; k < constants.size(); ++k) {
      s += static_cast<double>(part.block_size(k)) * std::log2(constants[k]);
      mn = std::min(mn, std::log2(constants[k]));
    }
    return s - static_cast<double>(part.dim()) * mn;
  }
  if (constants.size() != part.dim()) throw std::invalid_argument("threshold: one C per coordinate");
  double s = 0.0, mn = kInf;
  for (std::size_t m = 0; m < constants.size(); ++m) {
    double c = constants[m];
    if (kind == DesignCase::SqLp) c *= static_cast<double>(part.block_size(part.block_of(m)));
    s += std::log2(c);
    mn = std::min(mn, std::log2(c));
  }
  return s - static_cast<double>(constants.size()) * mn;
}

double tradeoff_eta(DesignCase kind, const Vector& constants, const BlockPartition& part, double p) {
  const double n = static_cast<double>(part.dim());
  double s = 0.0;
  switch (kind) {
    case DesignCase::SqWmax:
      for (double c : constants) s += std::log2(c);
      return std::exp2(s / n);
    case DesignCase::SqLp:
      for (std::size_t m = 0; m < constants.size(); ++m)
        s += std::log2(static_cast<double>(part.block_size(part.block_of(m))) * constants[m]);
      return std::exp2(s / (p * n));
    case DesignCase::VqLattice:
      for (std::size_t k = 0; k < constants.size(); ++k)
        s += static_cast<double>(part.block_size(k)) * std::log2(constants[k]);
      return std::exp2(s / n);
  }
  throw std::invalid_argument("unknown design case");
}

nlohmann::json design_to_json(const TicoqDesign& d) {
  nlohmann::json j;
  j["case"] = to_string(d.alloc.kind);
  j["L"] = d.alloc.L;
  j["relaxed"] = d.alloc.relaxed;
  j["integer"] = d.alloc.bits;
  j["relaxed_value"] = d.alloc.relaxed_value;
  j["objective"] = d.alloc.objective;
  j["rounding"] = d.alloc.rounding;
  j["constants"] = d.constants;
  j["tau"] = d.tau;
  if (d.alloc.kind == DesignCase::SqLp) {
    j["p"] = d.p;
    auto& tk = j["tau_k"] = nlohmann::json::array();
    for (double t : d.tau_k) tk.push_back(std::isfinite(t) ? nlohmann::json(t) : nlohmann::json(nullptr));
  }
  j["L_prime"] = d.L_prime;
  j["eta"] = d.eta;
  j["closed_form_regime"] = d.alloc.L >= d.L_prime;
  return j;
}

}  // namespace qcontract
