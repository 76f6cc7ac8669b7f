#pragma once

#include <variant>
#include <vector>

#include "qcontract/norms.hpp"
#include "qcontract/squant.hpp"
#include "qcontract/vquant.hpp"

namespace qcontract {

struct PassThrough {};

struct ScalarBlock {
  std::vector<ScalarQuantizer> coords;
};

using BlockQuantizer = std::variant<PassThrough, ScalarBlock, LatticeQuantizer>;

/// System quantizer: one component quantizer per block.
class QuantizerBank {
 public:
  QuantizerBank() = default;
  QuantizerBank(BlockPartition part, std::vector<BlockQuantizer> blocks);

  /// One uniform scalar quantizer per coordinate.
  static QuantizerBank scalar(const BlockPartition& part, const BoxDomain& box, const std::vector<int>& bits);
  /// One A*_{n_k} lattice quantizer per block.
  static QuantizerBank lattice(const BlockPartition& part, const BoxDomain& box, const std::vector<int>& bits);
  static QuantizerBank pass_through(const BlockPartition& part);

  const BlockPartition& partition() const { return part_; }
  const BlockQuantizer& block(std::size_t k) const { return blocks_.at(k); }

  Vector quantize_block(std::size_t k, std::span<const double> raw) const;
  Vector quantize(std::span<const double> x) const;

  /// Per-block worst-case error measured in that block's component norm.
  double block_worst_case(std::size_t k, const ComponentNorm& norm) const;
  /// ||e_bar||_block = max_k block_worst_case(k) / w_k
  double worst_case_norm(const NormSpec& spec) const;

  int total_bits() const;

 private:
  BlockPartition part_;
  std::vector<BlockQuantizer> blocks_;
};

/// bank[t] drives step t; a single bank is time invariant.
using QuantizerSchedule = std::vector<QuantizerBank>;

}  // namespace qcontract
