#include "qcontract/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qcontract {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Jacobi: return "jacobi";
    case Scheme::GaussSeidel: return "gauss-seidel";
    case Scheme::AsyncBoundOnly: return "async";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "jacobi") return Scheme::Jacobi;
  if (s == "gauss-seidel" || s == "gauss_seidel" || s == "gs") return Scheme::GaussSeidel;
  if (s == "async") return Scheme::AsyncBoundOnly;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

Vector BlockMapping::eval(std::span<const double> x) const {
  const auto& part = partition();
  Vector out(x.size());
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    Vector yk = eval_block(k, x);
    domain().block(part, k).clamp(yk);
    std::copy(yk.begin(), yk.end(), part.block(std::span<double>(out), k).begin());
  }
  return out;
}

namespace {

// Raw output of block k, clamped to its box.
Vector raw_block(const BlockMapping& map, std::size_t k, std::span<const double> x) {
  const auto& part = map.partition();
  Vector y = map.eval_block(k, x);
  if (y.size() != part.block_size(k)) throw std::logic_error("eval_block returned the wrong size");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = map.domain()[part.offset(k) + i].clamp(y[i]);
  return y;
}

Vector finish_block(const BlockMapping& map, const QuantizerBank* bank, std::size_t k, const Vector& raw) {
  if (!bank) return raw;
  Vector q = bank->quantize_block(k, raw);
  map.project_block(k, q);
  return q;
}

const QuantizerBank* bank_at(const QuantizerSchedule& s, std::size_t t) {
  if (s.empty()) return nullptr;
  return s.size() == 1 ? &s.front() : &s.at(t);
}

Vector diff(std::span<const double> a, std::span<const double> b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

Vector iterate_once(const BlockMapping& map, const QuantizerBank* bank, std::span<const double> x, Scheme scheme,
                    Vector* err) {
  const auto& part = map.partition();
  Vector next(x.begin(), x.end());
  if (err) err->assign(x.size(), 0.0);
  std::vector<Vector> finals(part.num_blocks());
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    // Gauss-Seidel reads the already quantized blocks of the new iterate.
    const Vector raw = raw_block(map, k, scheme == Scheme::GaussSeidel ? std::span<const double>(next) : x);
    Vector fin = finish_block(map, bank, k, raw);
    if (err) {
      auto ek = part.block(std::span<double>(*err), k);
      for (std::size_t i = 0; i < fin.size(); ++i) ek[i] = fin[i] - raw[i];
    }
    if (scheme == Scheme::GaussSeidel)
      std::copy(fin.begin(), fin.end(), part.block(std::span<double>(next), k).begin());
    else
      finals[k] = std::move(fin);
  }
  if (scheme != Scheme::GaussSeidel)
    for (std::size_t k = 0; k < part.num_blocks(); ++k)
      std::copy(finals[k].begin(), finals[k].end(), part.block(std::span<double>(next), k).begin());
  return next;
}

Trajectory run_iteration(const BlockMapping& map, const QuantizerSchedule& quantizers, const Vector& x0,
                         std::size_t steps, const RunOptions& opts) {
  const auto& part = map.partition();
  if (steps == 0) throw std::invalid_argument("run_iteration: step count must be positive");
  if (opts.scheme == Scheme::AsyncBoundOnly)
    throw std::invalid_argument("run_iteration: the asynchronous scheme has bounds only");
  if (x0.size() != part.dim()) throw std::invalid_argument("run_iteration: x0 has the wrong dimension");
  if (!map.domain().contains(x0, 1e-12)) throw std::invalid_argument("run_iteration: x0 outside the domain");
  if (quantizers.size() > 1 && quantizers.size() < steps)
    throw std::invalid_argument("run_iteration: quantizer schedule shorter than the horizon");
  for (const auto& b : quantizers)
    if (!(b.partition() == part)) throw std::invalid_argument("run_iteration: quantizer partition mismatch");

  const NormSpec fallback = NormSpec::uniform_lp(part, 2.0);
  const NormSpec& spec = opts.norm ? *opts.norm : fallback;
  spec.validate(part);
  if (opts.x_star && opts.x_star->size() != part.dim())
    throw std::invalid_argument("run_iteration: reference has the wrong dimension");

  Trajectory traj;
  traj.iterates.reserve(steps + 1);
  traj.iterates.push_back(x0);
  for (std::size_t t = 0; t < steps; ++t) {
    Vector e;
    Vector next = iterate_once(map, bank_at(quantizers, t), traj.iterates.back(), opts.scheme, &e);
    traj.error_norms.push_back(block_norm(e, part, spec));
    traj.errors.push_back(std::move(e));
    traj.iterates.push_back(std::move(next));
  }
  if (opts.x_star)
    for (const auto& x : traj.iterates) traj.distances.push_back(block_norm(diff(x, *opts.x_star), part, spec));
  return traj;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
}

double scheme_factor(double alpha, Scheme scheme, std::size_t K) {
  switch (scheme) {
    case Scheme::Jacobi: return 1.0;
    case Scheme::GaussSeidel: return (1.0 - std::pow(alpha, static_cast<double>(K))) / (1.0 - alpha);
    case Scheme::AsyncBoundOnly: return 1.0 / (1.0 - alpha);
  }
  return 1.0;
}

}  // namespace

Vector accumulated_error_series(double alpha, std::span<const double> error_norms, Scheme scheme, std::size_t K) {
  check_alpha(alpha);
  // E(t) = alpha E(t-1) + ||e(t-1)||, the same sum without alpha^{-l} overflow.
  const double f = scheme_factor(alpha, scheme, K);
  Vector out;
  out.reserve(error_norms.size());
  double acc = 0.0;
  for (double e : error_norms) {
    acc = alpha * acc + e;
    out.push_back(f * acc);
  }
  return out;
}

double accumulated_error(double alpha, std::span<const double> error_norms, Scheme scheme, std::size_t K) {
  if (error_norms.empty()) throw std::invalid_argument("accumulated_error: empty error sequence");
  return accumulated_error_series(alpha, error_norms, scheme, K).back();
}

double worst_case_error_bound(double alpha, double e_bar_norm, std::optional<std::size_t> t, Scheme scheme,
                              std::size_t K) {
  check_alpha(alpha);
  const double geo = t ? (1.0 - std::pow(alpha, static_cast<double>(*t))) / (1.0 - alpha) : 1.0 / (1.0 - alpha);
  return scheme_factor(alpha, scheme, K) * geo * e_bar_norm;
}

Vector trajectory_bound(const Trajectory& traj, double alpha, Scheme scheme, std::size_t K) {
  if (traj.distances.empty()) throw std::invalid_argument("trajectory bound: missing reference");
  const Vector E = accumulated_error_series(alpha, traj.error_norms, scheme, K);
  Vector out{traj.distances.front()};
  double at = 1.0;
  for (std::size_t t = 1; t < traj.iterates.size(); ++t) {
    at *= alpha;
    out.push_back(at * traj.distances.front() + E[t - 1]);
  }
  return out;
}

std::vector<bool> bound_certificate(const Trajectory& traj, const Vector& x_star, double alpha, Scheme scheme,
                                    const BlockPartition& part, const NormSpec& spec, double tol) {
  if (x_star.empty()) throw std::invalid_argument("bound_certificate: missing reference");
  if (x_star.size() != part.dim()) throw std::invalid_argument("bound_certificate: reference dimension");
  Trajectory t2;
  t2.iterates = traj.iterates;
  t2.error_norms = traj.error_norms;
  for (const auto& x : traj.iterates) t2.distances.push_back(block_norm(diff(x, x_star), part, spec));
  const Vector bound = trajectory_bound(t2, alpha, scheme, part.num_blocks());
  std::vector<bool> ok;
  for (std::size_t t = 0; t < bound.size(); ++t) ok.push_back(t2.distances[t] <= bound[t] + tol);
  return ok;
}

FixedPointResult reference_fixed_point(const BlockMapping& map, const Vector& x0, double tol, std::size_t max_steps) {
  FixedPointResult r;
  r.x = x0;
  r.residual = std::numeric_limits<double>::infinity();
  while (r.steps < max_steps) {
    Vector next = iterate_once(map, nullptr, r.x, Scheme::Jacobi);
    r.residual = inf_norm(diff(next, r.x));
    r.x = std::move(next);
    ++r.steps;
    if (r.residual < tol * std::max(1.0, inf_norm(r.x))) {
      r.converged = true;
      break;
    }
  }
  return r;
}

StationaryReport stationary_probe(const BlockMapping& map, const QuantizerBank& bank, const Vector& x_star,
                                  std::size_t samples, double radius, const NormSpec& spec, std::uint64_t seed) {
  const auto& part = map.partition();
  spec.validate(part);
  if (x_star.size() != part.dim()) throw std::invalid_argument("stationary_probe: reference dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  auto quantize_full = [&](std::span<const double> x) {
    Vector q = bank.quantize(x);
    for (std::size_t k = 0; k < part.num_blocks(); ++k) map.project_block(k, part.block(std::span<double>(q), k));
    return q;
  };

  // Sample a point of the block-norm ball: each block uniformly from the
  // component-norm ball of radius r w_k (rejection from the enclosing cube).
  auto sample = [&]() {
    Vector x = x_star;
    for (std::size_t k = 0; k < part.num_blocks(); ++k) {
      const double rk = radius * spec.w[k];
      auto xk = part.block(std::span<double>(x), k);
      Vector u(xk.size());
      const auto& norm = spec.per_block[k];
      const auto* wm = std::get_if<WeightedMax>(&norm);
      for (int attempt = 0; attempt < 1000; ++attempt) {
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = unit(rng) * rk * (wm ? wm->a[i] : 1.0);
        if (wm || component_norm(u, norm) <= rk) break;
        if (attempt == 999) std::fill(u.begin(), u.end(), 0.0);
      }
      for (std::size_t i = 0; i < u.size(); ++i) xk[i] += u[i];
    }
    map.domain().clamp(x);
    return x;
  };

  std::set<Vector> candidates;
  auto consider = [&](const Vector& q) {
    if (block_norm(diff(q, x_star), part, spec) <= radius * (1.0 + 1e-12) + 1e-15) candidates.insert(q);
  };
  consider(quantize_full(x_star));
  for (std::size_t s = 0; s < samples; ++s) consider(quantize_full(sample()));

  StationaryReport rep;
  rep.samples = samples;
  rep.candidates = candidates.size();
  for (const auto& c : candidates) {
    const Vector img = quantize_full(map.eval(c));
    if (inf_norm(diff(img, c)) <= 1e-9 * (1.0 + inf_norm(c))) ++rep.stationary;
  }
  if (rep.candidates == 0) {
    rep.message = "no stationary point sampled";
    return rep;
  }
  rep.fraction = static_cast<double>(rep.stationary) / static_cast<double>(rep.candidates);
  rep.fixed_point_found = rep.stationary > 0;
  rep.message = rep.fixed_point_found ? "stationary point found" : "no stationary point among sampled outputs";
  return rep;
}

std::string trajectory_to_csv(const Trajectory& traj, double alpha, Scheme scheme, std::size_t K,
                              const std::vector<bool>& cert) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t,dist,err_norm,bound,certificate\n";
  Vector bound;
  if (!traj.distances.empty()) bound = trajectory_bound(traj, alpha, scheme, K);
  for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
    os << t << ',';
    if (!traj.distances.empty()) os << traj.distances[t];
    os << ',';
    if (t < traj.error_norms.size()) os << traj.error_norms[t];
    os << ',';
    if (!bound.empty()) os << bound[t];
    os << ',';
    if (t < cert.size()) os << (cert[t] ? 1 : 0);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

AffineMapping::AffineMapping(BlockPartition part, BoxDomain box, std::vector<Vector> A, Vector b,
                             std::optional<double> modulus)
    : part_(std::move(part)), box_(std::move(box)), A_(std::move(A)), b_(std::move(b)), modulus_(modulus) {
  const std::size_t n = part_.dim();
  if (box_.dim() != n || b_.size() != n || A_.size() != n) throw std::invalid_argument("affine mapping: dimensions");
  for (const auto& row : A_)
    if (row.size() != n) throw std::invalid_argument("affine mapping: A must be square");
}

Vector AffineMapping::eval_block(std::size_t k, std::span<const double> x) const {
  Vector y(part_.block_size(k));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t r = part_.offset(k) + i;
    double s = b_[r];
    for (std::size_t c = 0; c < x.size(); ++c) s += A_[r][c] * x[c];
    y[i] = box_[r].clamp(s);
  }
  return y;
}

namespace {

// Bound on ||A_kj x||_k / ||x||_j for the sub-block rows of k, columns of j.
double induced_bound(const std::vector<Vector>& A, const BlockPartition& part, std::size_t k, std::size_t j,
                     const ComponentNorm& nk, const ComponentNorm& nj) {
  const std::size_t r0 = part.offset(k), c0 = part.offset(j);
  const std::size_t nr = part.block_size(k), nc = part.block_size(j);
  const auto* wk = std::get_if<WeightedMax>(&nk);
  const auto* wj = std::get_if<WeightedMax>(&nj);
  if (wk && wj) {
    double m = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < nc; ++c) s += std::abs(A[r0 + r][c0 + c]) * wj->a[c];
      m = std::max(m, s / wk->a[r]);
    }
    return m;
  }
  if (!wk && !wj && std::get<Lp>(nk).p == std::get<Lp>(nj).p) {
    const double p = std::get<Lp>(nk).p;
    double col = 0.0, row = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < nr; ++r) s += std::abs(A[r0 + r][c0 + c]);
      col = std::max(col, s);
    }
    for (std::size_t r = 0; r < nr; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < nc; ++c) s += std::abs(A[r0 + r][c0 + c]);
      row = std::max(row, s);
    }
    return std::pow(col, 1.0 / p) * std::pow(row, 1.0 - 1.0 / p);
  }
  // Mixed norms: ||Ax||_k <= sum_c ||A_:c||_k |x_c| and |x_c| <= beta_c ||x||_j.
  double s = 0.0;
  Vector colv(nr);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t r = 0; r < nr; ++r) colv[r] = A[r0 + r][c0 + c];
    s += component_norm(colv, nk) * (wj ? wj->a[c] : 1.0);
  }
  return s;
}

}  // namespace

double affine_modulus_bound(const std::vector<Vector>& A, const BlockPartition& part, const NormSpec& spec) {
  spec.validate(part);
  double best = 0.0;
  for (std::size_t k = 0; k < part.num_blocks(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < part.num_blocks(); ++j)
      s += induced_bound(A, part, k, j, spec.per_block[k], spec.per_block[j]) * spec.w[j];
    best = std::max(best, s / spec.w[k]);
  }
  return best;
}

AffineMapping random_affine_contraction(const BlockPartition& part, const NormSpec& spec, const BoxDomain& box,
                                        double alpha, std::uint64_t seed) {
  check_alpha(alpha);
  const std::size_t n = part.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.25, 0.75);
  std::vector<Vector> A(n, Vector(n));
  for (auto& row : A)
    for (auto& v : row) v = g(rng);
  const double m = affine_modulus_bound(A, part, spec);
  for (auto& row : A)
    for (auto& v : row) v *= m > 0.0 ? alpha / m : 0.0;
  Vector xs(n), b(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = box[i].lo + u(rng) * box[i].length();
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += A[r][c] * xs[c];
    b[r] = xs[r] - s;
  }
  return AffineMapping(part, box, std::move(A), std::move(b), alpha);
}

}  // namespace qcontract
