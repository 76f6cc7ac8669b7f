#include "qcontract/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qcontract {

BlockPartition::BlockPartition(std::vector<std::size_t> block_sizes)
    : sizes_(std::move(block_sizes)) {
  if (sizes_.empty()) throw std::invalid_argument("partition needs at least one block");
  offsets_.reserve(sizes_.size());
  for (std::size_t n_k : sizes_) {
    if (n_k == 0) throw std::invalid_argument("block sizes must be positive");
    offsets_.push_back(dim_);
    dim_ += n_k;
  }
}

std::size_t BlockPartition::block_of(std::size_t m) const {
  if (m >= dim_) throw std::out_of_range("coordinate index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), m);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

void NormSpec::validate(const BlockPartition& part) const {
  const std::size_t K = part.num_blocks();
  if (w.size() != K || per_block.size() != K)
    throw std::invalid_argument("norm spec has " + std::to_string(w.size()) +
                                " weights / " + std::to_string(per_block.size()) +
                                " component norms for " + std::to_string(K) + " blocks");
  for (std::size_t k = 0; k < K; ++k) {
    if (!(w[k] > 0.0)) throw std::invalid_argument("block weights must be positive");
    if (const auto* wm = std::get_if<WeightedMax>(&per_block[k])) {
      if (wm->a.size() != part.block_size(k))
        throw std::invalid_argument("wmax weight count does not match block size");
      for (double a : wm->a)
        if (!(a > 0.0)) throw std::invalid_argument("wmax weights must be positive");
    } else {
      const double p = std::get<Lp>(per_block[k]).p;
      if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("L_p exponent must be finite and >= 1");
    }
  }
}

NormSpec NormSpec::uniform_lp(const BlockPartition& part, double p) {
  NormSpec s;
  s.w.assign(part.num_blocks(), 1.0);
  s.per_block.assign(part.num_blocks(), Lp{p});
  return s;
}

NormSpec NormSpec::uniform_wmax(const BlockPartition& part) {
  NormSpec s;
  s.w.assign(part.num_blocks(), 1.0);
  for (std::size_t k = 0; k < part.num_blocks(); ++k)
    s.per_block.emplace_back(WeightedMax{Vector(part.block_size(k), 1.0)});
  return s;
}

BoxDomain::BoxDomain(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_)
    if (!(iv.lo <= iv.hi)) throw std::invalid_argument("box interval has lo > hi");
}

BoxDomain BoxDomain::cube(std::size_t n, double lo, double hi) {
  return BoxDomain(std::vector<Interval>(n, Interval{lo, hi}));
}

Vector BoxDomain::lengths() const {
  Vector out;
  out.reserve(intervals_.size());
  for (const auto& iv : intervals_) out.push_back(iv.length());
  return out;
}

bool BoxDomain::contains(std::span<const double> x, double tol) const {
  if (x.size() != intervals_.size()) return false;
  for (std::size_t m = 0; m < x.size(); ++m)
    if (x[m] < intervals_[m].lo - tol || x[m] > intervals_[m].hi + tol) return false;
  return true;
}

void BoxDomain::clamp(std::span<double> x) const {
  for (std::size_t m = 0; m < x.size(); ++m) x[m] = intervals_[m].clamp(x[m]);
}

BoxDomain BoxDomain::block(const BlockPartition& part, std::size_t k) const {
  auto first = intervals_.begin() + static_cast<std::ptrdiff_t>(part.offset(k));
  return BoxDomain(std::vector<Interval>(first, first + static_cast<std::ptrdiff_t>(part.block_size(k))));
}

double weighted_max_norm(std::span<const double> x, std::span<const double> a) {
  if (x.size() != a.size()) throw std::invalid_argument("weighted_max_norm: dimension mismatch");
  double best = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (!(a[m] > 0.0)) throw std::invalid_argument("weighted_max_norm: nonpositive weight");
    best = std::max(best, std::abs(x[m]) / a[m]);
  }
  return best;
}

double lp_norm(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (p == 2.0) {
    // Neumaier-compensated sum of squares
    double sum = 0.0, comp = 0.0;
    for (double v : x) {
      const double term = v * v;
      const double t = sum + term;
      comp += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
    return std::sqrt(sum + comp);
  }
  if (p == 1.0) {
    double sum = 0.0;
    for (double v : x) sum += std::abs(v);
    return sum;
  }
  // Factor out the largest magnitude so large p does not overflow.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(sum, 1.0 / p);
}

double component_norm(std::span<const double> x, const ComponentNorm& norm) {
  if (const auto* wm = std::get_if<WeightedMax>(&norm)) return weighted_max_norm(x, wm->a);
  return lp_norm(x, std::get<Lp>(norm).p);
}

double block_norm(std::span<const double> x, const BlockPartition& part, const NormSpec& spec) {
  if (x.size() != part.dim()) throw std::invalid_argument("block_norm: dimension mismatch");
  if (spec.w.size() != part.num_blocks() || spec.per_block.size() != part.num_blocks())
    throw std::invalid_argument("block_norm: norm spec inconsistent with partition");
  double best = 0.0;
  for (std::size_t k = 0; k < part.num_blocks(); ++k)
    best = std::max(best, component_norm(part.block(x, k), spec.per_block[k]) / spec.w[k]);
  return best;
}

nlohmann::json norm_to_json(const BlockPartition& part, const NormSpec& spec) {
  nlohmann::json per_block = nlohmann::json::array();
  for (const auto& c : spec.per_block) {
    if (const auto* wm = std::get_if<WeightedMax>(&c))
      per_block.push_back({{"kind", "wmax"}, {"a", wm->a}});
    else
      per_block.push_back({{"kind", "lp"}, {"p", std::get<Lp>(c).p}});
  }
  return {{"blocks", part.block_sizes()}, {"w", spec.w}, {"per_block", per_block}};
}

std::pair<BlockPartition, NormSpec> norm_from_json(const nlohmann::json& j) {
  if (!j.contains("blocks")) throw std::invalid_argument("missing field \"blocks\"");
  BlockPartition part(j.at("blocks").get<std::vector<std::size_t>>());
  NormSpec spec;
  spec.w = j.contains("w") ? j.at("w").get<Vector>() : Vector(part.num_blocks(), 1.0);
  if (!j.contains("per_block")) throw std::invalid_argument("missing field \"per_block\"");
  const auto& pb = j.at("per_block");
  for (std::size_t k = 0; k < pb.size(); ++k) {
    const std::string kind = pb[k].at("kind").get<std::string>();
    if (kind == "wmax") {
      spec.per_block.emplace_back(WeightedMax{
          pb[k].contains("a") ? pb[k].at("a").get<Vector>()
                              : Vector(k < part.num_blocks() ? part.block_size(k) : 0, 1.0)});
    } else if (kind == "lp") {
      spec.per_block.emplace_back(Lp{pb[k].at("p").get<double>()});
    } else {
      throw std::invalid_argument("per_block kind must be \"wmax\" or \"lp\", got \"" + kind + "\"");
    }
  }
  spec.validate(part);
  return {std::move(part), std::move(spec)};
}

nlohmann::json box_to_json(const BoxDomain& box) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& iv : box.intervals()) out.push_back({iv.lo, iv.hi});
  return out;
}

BoxDomain box_from_json(const nlohmann::json& j) {
  std::vector<Interval> ivs;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("box entries must be [lo, hi] pairs");
    ivs.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return BoxDomain(std::move(ivs));
}

}  // namespace qcontract
