#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcontract/norms.hpp"

namespace qcontract {

/// Closed-form constants of the unscaled dual lattice A*_n.
struct LatticeSpec {
  std::size_t n = 1;

  /// sqrt(n(n+2) / (12(n+1)))
  double covering_radius() const;
  /// sqrt(1/(n+1))
  double fundamental_volume() const;
};

/// A*_n points carry exact integer coordinates: (n+1) times the point in the
/// hyperplane {sum = 0} of R^{n+1}.
using LatticeCoords = std::vector<std::int64_t>;

struct LatticePoint {
  Vector point;          // in R^n, already scaled
  LatticeCoords coords;  // unscaled, integral
};

/// Fixed orthonormal basis of {v in R^{n+1} : sum v = 0}; column j is
/// (1,...,1, -j, 0,...,0) / sqrt(j(j+1)) with j leading ones. Row-major (n+1) x n.
std::vector<Vector> a_star_basis(std::size_t n);

/// Closest point of scale * A*_n to y (Euclidean). Ties across the n+1
/// cosets go to the lexicographically smallest coordinates.
LatticePoint nearest_point_a_star(std::span<const double> y, double scale);

/// Scaled lattice point for given integral coordinates.
Vector a_star_point(const LatticeCoords& coords, double scale);

/// (prod|X_m| / (2^bits sqrt(1/(n+1))))^{1/n} * sqrt(n(n+2)/(12(n+1)))
double vq_worst_case_error(std::span<const double> box_lengths, std::size_t n, int bits);

/// Scaled A*_n quantizer over a box, anchored at the box centre.
///
/// The codebook is every lattice point within one covering radius of the box,
/// which always contains the nearest point of any clamped input. It can differ
/// from 2^bits in size (boundary effect), so both the nominal and effective
/// rates are exposed. Enumeration happens on first use of encode/decode.
class LatticeQuantizer {
 public:
  static constexpr std::size_t kMaxCodebook = std::size_t{1} << 22;

  LatticeQuantizer() = default;
  LatticeQuantizer(BoxDomain box, int bits);

  std::size_t dim() const { return box_.dim(); }
  int bits() const { return bits_; }
  double scale() const { return scale_; }
  const BoxDomain& box() const { return box_; }
  LatticeSpec spec() const { return LatticeSpec{box_.dim()}; }

  /// s * R
  double worst_case_error() const;

  /// Nearest lattice point to clamp(x); never enumerates the codebook.
  Vector quantize(std::span<const double> x) const;

  std::uint64_t encode(std::span<const double> x) const;
  Vector decode(std::uint64_t index) const;
  std::size_t codebook_size() const;
  double effective_rate() const;

  nlohmann::json to_json() const;
  static LatticeQuantizer from_json(const nlohmann::json& j);

 private:
  struct Codebook {
    std::vector<LatticeCoords> coords;  // sorted lexicographically
    std::map<LatticeCoords, std::uint64_t> index;
  };
  struct CodebookCache {
    std::once_flag once;
    Codebook book;
  };
  const Codebook& codebook() const;
  LatticePoint nearest(std::span<const double> x) const;

  BoxDomain box_;
  int bits_ = 0;
  double scale_ = 1.0;
  Vector center_;
  // shared by copies; all copies describe the same quantizer
  std::shared_ptr<CodebookCache> cache_ = std::make_shared<CodebookCache>();
};

LatticeQuantizer vq_design(const BoxDomain& box, std::size_t n, int bits);
std::uint64_t vq_encode(const LatticeQuantizer& q, std::span<const double> x);
Vector vq_decode(const LatticeQuantizer& q, std::uint64_t index);

}  // namespace qcontract
