#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace qcontract {

using Vector = std::vector<double>;

/// Split of an n-dimensional state into K contiguous coordinate blocks.
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<std::size_t> block_sizes);

  std::size_t dim() const { return dim_; }
  std::size_t num_blocks() const { return sizes_.size(); }
  std::size_t block_size(std::size_t k) const { return sizes_.at(k); }
  std::size_t offset(std::size_t k) const { return offsets_.at(k); }
  const std::vector<std::size_t>& block_sizes() const { return sizes_; }

  /// Index of the block that owns coordinate m.
  std::size_t block_of(std::size_t m) const;

  std::span<const double> block(std::span<const double> x, std::size_t k) const {
    return x.subspan(offsets_[k], sizes_[k]);
  }
  std::span<double> block(std::span<double> x, std::size_t k) const {
    return x.subspan(offsets_[k], sizes_[k]);
  }

  bool operator==(const BlockPartition&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
};

struct WeightedMax {
  Vector a;  // one positive weight per coordinate of the block
};

struct Lp {
  double p = 2.0;
};

using ComponentNorm = std::variant<WeightedMax, Lp>;

/// Block weights w plus one component norm per block.
struct NormSpec {
  Vector w;
  std::vector<ComponentNorm> per_block;

  /// Throws std::invalid_argument if the spec does not fit the partition.
  void validate(const BlockPartition& part) const;

  static NormSpec uniform_lp(const BlockPartition& part, double p);
  static NormSpec uniform_wmax(const BlockPartition& part);
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

class BoxDomain {
 public:
  BoxDomain() = default;
  explicit BoxDomain(std::vector<Interval> intervals);
  static BoxDomain cube(std::size_t n, double lo, double hi);

  std::size_t dim() const { return intervals_.size(); }
  const Interval& operator[](std::size_t m) const { return intervals_[m]; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  Vector lengths() const;
  bool contains(std::span<const double> x, double tol = 0.0) const;
  void clamp(std::span<double> x) const;

  /// Sub-box of the coordinates owned by block k.
  BoxDomain block(const BlockPartition& part, std::size_t k) const;

 private:
  std::vector<Interval> intervals_;
};

double weighted_max_norm(std::span<const double> x, std::span<const double> a);
double lp_norm(std::span<const double> x, double p);
double component_norm(std::span<const double> x, const ComponentNorm& norm);

/// max_k ||x_k||_k / w_k
double block_norm(std::span<const double> x, const BlockPartition& part,
                  const NormSpec& spec);

// {"blocks":[..], "w":[..], "per_block":[{"kind":"wmax","a":[..]} | {"kind":"lp","p":..}]}
nlohmann::json norm_to_json(const BlockPartition& part, const NormSpec& spec);
std::pair<BlockPartition, NormSpec> norm_from_json(const nlohmann::json& j);

nlohmann::json box_to_json(const BoxDomain& box);
BoxDomain box_from_json(const nlohmann::json& j);

}  // namespace qcontract
