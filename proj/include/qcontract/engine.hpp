#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcontract/norms.hpp"
#include "qcontract/quantizer_bank.hpp"

namespace qcontract {

enum class Scheme { Jacobi, GaussSeidel, AsyncBoundOnly };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// T: X -> X evaluated one block at a time.
class BlockMapping {
 public:
  virtual ~BlockMapping() = default;

  virtual const BlockPartition& partition() const = 0;
  virtual const BoxDomain& domain() const = 0;
  virtual Vector eval_block(std::size_t k, std::span<const double> x) const = 0;

  /// Applied to a decoded block before it is used; identity unless the
  /// feasible set is smaller than the box.
  virtual void project_block(std::size_t /*k*/, std::span<double> /*block*/) const {}

  /// Contraction modulus w.r.t. the norm the mapping was built for, if known.
  virtual std::optional<double> declared_modulus() const { return std::nullopt; }

  /// Full T(x), clamped to the domain.
  Vector eval(std::span<const double> x) const;
};

struct Trajectory {
  std::vector<Vector> iterates;  // x(0..T)
  std::vector<Vector> errors;    // e(0..T-1)
  Vector error_norms;            // ||e(t)||_block
  Vector distances;              // ||x(t) - x*||_block, empty without a reference

  std::size_t steps() const { return errors.size(); }
};

struct RunOptions {
  Scheme scheme = Scheme::Jacobi;
  const NormSpec* norm = nullptr;  // defaults to uniform L2 with w = 1
  std::optional<Vector> x_star;
};

/// quantizers: empty for perfect passing, one bank for a time-invariant
/// quantizer, or one bank per step.
Trajectory run_iteration(const BlockMapping& map, const QuantizerSchedule& quantizers, const Vector& x0,
                         std::size_t steps, const RunOptions& opts = {});

/// One Jacobi or Gauss-Seidel sweep; writes e = final - raw into *err if given.
Vector iterate_once(const BlockMapping& map, const QuantizerBank* bank, std::span<const double> x, Scheme scheme,
                    Vector* err = nullptr);

/// E(t) for t = error_norms.size().
double accumulated_error(double alpha, std::span<const double> error_norms, Scheme scheme, std::size_t K);

/// E(1..T) in one pass.
Vector accumulated_error_series(double alpha, std::span<const double> error_norms, Scheme scheme, std::size_t K);

/// E_bar(t); t = nullopt means the limit t -> infinity.
double worst_case_error_bound(double alpha, double e_bar_norm, std::optional<std::size_t> t, Scheme scheme,
                              std::size_t K);

/// alpha^t ||x(0)-x*|| + E(t) for t = 0..T.
Vector trajectory_bound(const Trajectory& traj, double alpha, Scheme scheme, std::size_t K);

/// Per-step check of ||x(t)-x*|| <= alpha^t ||x(0)-x*|| + E(t) + tol.
std::vector<bool> bound_certificate(const Trajectory& traj, const Vector& x_star, double alpha, Scheme scheme,
                                    const BlockPartition& part, const NormSpec& spec, double tol = 1e-9);

struct FixedPointResult {
  Vector x;
  std::size_t steps = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Unquantized Jacobi run until ||x(t+1)-x(t)||_inf < tol * max(1, ||x||_inf).
FixedPointResult reference_fixed_point(const BlockMapping& map, const Vector& x0, double tol = 1e-12,
                                       std::size_t max_steps = 100000);

struct StationaryReport {
  std::size_t samples = 0;
  std::size_t candidates = 0;  // distinct quantizer outputs inside the ball
  std::size_t stationary = 0;  // candidates with x = Q(T(x))
  double fraction = 0.0;
  bool fixed_point_found = false;
  std::string message;
};

/// Sampled surrogate for the stationary set {x = Q(T(x))} near x*.
StationaryReport stationary_probe(const BlockMapping& map, const QuantizerBank& bank, const Vector& x_star,
                                  std::size_t samples, double radius, const NormSpec& spec,
                                  std::uint64_t seed = 1);

/// CSV with columns t,dist,err_norm,bound,certificate.
std::string trajectory_to_csv(const Trajectory& traj, double alpha, Scheme scheme, std::size_t K,
                              const std::vector<bool>& cert);

// ---------------------------------------------------------------------------
// Synthetic affine block contraction T(x) = clamp(A x + b).

class AffineMapping : public BlockMapping {
 public:
  AffineMapping(BlockPartition part, BoxDomain box, std::vector<Vector> A, Vector b,
                std::optional<double> modulus = std::nullopt);

  const BlockPartition& partition() const override { return part_; }
  const BoxDomain& domain() const override { return box_; }
  Vector eval_block(std::size_t k, std::span<const double> x) const override;
  std::optional<double> declared_modulus() const override { return modulus_; }

  const std::vector<Vector>& matrix() const { return A_; }
  const Vector& offset() const { return b_; }

 private:
  BlockPartition part_;
  BoxDomain box_;
  std::vector<Vector> A_;
  Vector b_;
  std::optional<double> modulus_;
};

/// Upper bound on the block-norm Lipschitz constant of x -> A x:
/// max_k sum_j ||A_kj||_{j->k} w_j / w_k, with exact induced norms for
/// weighted-max blocks and the Riesz-Thorin bound for L_p blocks.
double affine_modulus_bound(const std::vector<Vector>& A, const BlockPartition& part, const NormSpec& spec);

/// Random A rescaled so affine_modulus_bound(A) = alpha, with b chosen so the
/// unclamped fixed point lies inside the middle half of the box.
AffineMapping random_affine_contraction(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box,
                                        double alpha, std::uint64_t seed);

}  // namespace qcontract
