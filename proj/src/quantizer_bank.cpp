#include "qcontract/quantizer_bank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcontract {

QuantizerBank::QuantizerBank(BlockPartition part, std::vector<BlockQuantizer> blocks)
    : part_(std::move(part)), blocks_(std::move(blocks)) {
  if (blocks_.size() != part_.num_blocks()) throw std::invalid_argument("quantizer bank: one quantizer per block");
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (const auto* sb = std::get_if<ScalarBlock>(&blocks_[k]); sb && sb->coords.size() != part_.block_size(k))
      throw std::invalid_argument("quantizer bank: scalar block size mismatch");
    if (const auto* lq = std::get_if<LatticeQuantizer>(&blocks_[k]); lq && lq->dim() != part_.block_size(k))
      throw std::invalid_argument("quantizer bank: lattice dimension mismatch");
  }
}

QuantizerBank QuantizerBank::scalar(const BlockPartition& part, const BoxDomain& box, const std::vector<int>& bits) {
  if (bits.size() != part.dim() || box.dim() != part.dim())
    throw std::invalid_argument("scalar bank: need one rate and one interval per coordinate");
  std::vector<BlockQuantizer> blocks;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    ScalarBlock sb;
    for (std::size_t i = 0; i < part.block_size(k); ++i) {
      const std::size_t m = part.offset(k) + i;
      sb.coords.emplace_back(box[m], bits[m]);
    }
    blocks.emplace_back(std::move(sb));
  }
  return QuantizerBank(part, std::move(blocks));
}

QuantizerBank QuantizerBank::lattice(const BlockPartition& part, const BoxDomain& box, const std::vector<int>& bits) {
  if (bits.size() != part.num_blocks() || box.dim() != part.dim())
    throw std::invalid_argument("lattice bank: need one rate per block");
  std::vector<BlockQuantizer> blocks;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) blocks.emplace_back(LatticeQuantizer(box.block(part, k), bits[k]));
  return QuantizerBank(part, std::move(blocks));
}

QuantizerBank QuantizerBank::pass_through(const BlockPartition& part) {
  return QuantizerBank(part, std::vector<BlockQuantizer>(part.num_blocks(), PassThrough{}));
}

Vector QuantizerBank::quantize_block(std::size_t k, std::span<const double> raw) const {
  if (raw.size() != part_.block_size(k)) throw std::invalid_argument("quantize_block: size mismatch");
  const auto& q = blocks_.at(k);
  if (std::holds_alternative<PassThrough>(q)) return Vector(raw.begin(), raw.end());
  if (const auto* sb = std::get_if<ScalarBlock>(&q)) {
    Vector out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = sb->coords[i].quantize(raw[i]);
    return out;
  }
  return std::get<LatticeQuantizer>(q).quantize(raw);
}

Vector QuantizerBank::quantize(std::span<const double> x) const {
  Vector out(x.begin(), x.end());
  for (std::size_t k = 0; k < part_.num_blocks(); ++k) {
    const Vector qk = quantize_block(k, part_.block(x, k));
    std::copy(qk.begin(), qk.end(), part_.block(std::span<double>(out), k).begin());
  }
  return out;
}

double QuantizerBank::block_worst_case(std::size_t k, const ComponentNorm& norm) const {
  const auto& q = blocks_.at(k);
  if (std::holds_alternative<PassThrough>(q)) return 0.0;
  if (const auto* sb = std::get_if<ScalarBlock>(&q)) {
    // Monotone norms: the worst case is attained at the per-coordinate worst errors.
    Vector e;
    for (const auto& sq : sb->coords) e.push_back(sq.worst_case_error());
    return component_norm(e, norm);
  }
  const auto& lq = std::get<LatticeQuantizer>(q);
  const double l2 = lq.worst_case_error();
  const double n = static_cast<double>(lq.dim());
  if (const auto* wm = std::get_if<WeightedMax>(&norm)) return l2 / *std::min_element(wm->a.begin(), wm->a.end());
  const double p = std::get<Lp>(norm).p;
  // ||v||_p <= ||v||_2 for p >= 2, and <= n^{1/p-1/2} ||v||_2 below.
  return p >= 2.0 ? l2 : l2 * std::pow(n, 1.0 / p - 0.5);
}

double QuantizerBank::worst_case_norm(const NormSpec& spec) const {
  spec.validate(part_);
  double best = 0.0;
  for (std::size_t k = 0; k < part_.num_blocks(); ++k)
    best = std::max(best, block_worst_case(k, spec.per_block[k]) / spec.w[k]);
  return best;
}

int QuantizerBank::total_bits() const {
  int total = 0;
  for (const auto& q : blocks_) {
    if (const auto* sb = std::get_if<ScalarBlock>(&q))
      for (const auto& sq : sb->coords) total += sq.bits();
    else if (const auto* lq = std::get_if<LatticeQuantizer>(&q))
      total += lq->bits();
  }
  return total;
}

}  // namespace qcontract
