#include "qcontract/vquant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qcontract {

double LatticeSpec::covering_radius() const {
  const double nn = static_cast<double>(n);
  return std::sqrt(nn * (nn + 2.0) / (12.0 * (nn + 1.0)));
}

double LatticeSpec::fundamental_volume() const { return std::sqrt(1.0 / (static_cast<double>(n) + 1.0)); }

std::vector<Vector> a_star_basis(std::size_t n) {
  std::vector<Vector> b(n + 1, Vector(n, 0.0));
  for (std::size_t j = 1; j <= n; ++j) {
    const double norm = std::sqrt(static_cast<double>(j) * static_cast<double>(j + 1));
    for (std::size_t i = 0; i < j; ++i) b[i][j - 1] = 1.0 / norm;
    b[j][j - 1] = -static_cast<double>(j) / norm;
  }
  return b;
}

namespace {

// R^n -> hyperplane of R^{n+1}
Vector embed(std::span<const double> y, const std::vector<Vector>& basis) {
  Vector x(basis.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) x[i] += basis[i][j] * y[j];
  return x;
}

// Closest point of A_n = {z in Z^{n+1} : sum z = 0} to x (x on the hyperplane).
std::vector<std::int64_t> nearest_a_n(const Vector& x) {
  const std::size_t m = x.size();
  std::vector<std::int64_t> f(m);
  Vector delta(m);
  std::int64_t deficiency = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = std::nearbyint(x[i]);
    f[i] = static_cast<std::int64_t>(r);
    delta[i] = x[i] - r;
    deficiency += f[i];
  }
  if (deficiency == 0) return f;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  // ascending delta: the front was rounded up the most
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return delta[a] < delta[b]; });
  if (deficiency > 0) {
    for (std::int64_t k = 0; k < deficiency; ++k) --f[order[static_cast<std::size_t>(k)]];
  } else {
    for (std::int64_t k = 0; k < -deficiency; ++k) ++f[order[m - 1 - static_cast<std::size_t>(k)]];
  }
  return f;
}

}  // namespace

Vector a_star_point(const LatticeCoords& coords, double scale) {
  const std::size_t n = coords.size() - 1;
  const auto basis = a_star_basis(n);
  const double inv = scale / static_cast<double>(n + 1);
  Vector y(n, 0.0);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[j] += basis[i][j] * static_cast<double>(coords[i]) * inv;
  return y;
}

LatticePoint nearest_point_a_star(std::span<const double> y, double scale) {
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("nearest_point_a_star: empty input");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("nearest_point_a_star: scale must be positive");
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("nearest_point_a_star: non-finite input");

  const auto basis = a_star_basis(n);
  Vector scaled(y.begin(), y.end());
  for (double& v : scaled) v /= scale;
  const Vector x = embed(scaled, basis);
  const auto m1 = static_cast<std::int64_t>(n + 1);
  const double inv = 1.0 / static_cast<double>(n + 1);

  LatticeCoords best;
  double best_dist = std::numeric_limits<double>::infinity();
  // A*_n is the union of the n+1 glue cosets [i] + A_n.
  for (std::size_t i = 0; i <= n; ++i) {
    const auto ii = static_cast<std::int64_t>(i);
    LatticeCoords glue(n + 1);
    for (std::size_t j = 0; j <= n; ++j) glue[j] = j < n + 1 - i ? ii : ii - m1;
    Vector shifted(n + 1);
    for (std::size_t j = 0; j <= n; ++j) shifted[j] = x[j] - static_cast<double>(glue[j]) * inv;
    const auto a = nearest_a_n(shifted);
    LatticeCoords coords(n + 1);
    double dist = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      coords[j] = glue[j] + m1 * a[j];
      const double d = x[j] - static_cast<double>(coords[j]) * inv;
      dist += d * d;
    }
    const double tol = best.empty() ? 0.0 : 1e-12 * std::max(1.0, best_dist);
    if (best.empty() || dist < best_dist - tol || (std::abs(dist - best_dist) <= tol && coords < best)) {
      best_dist = std::min(dist, best_dist);
      best = std::move(coords);
    }
  }
  return {a_star_point(best, scale), best};
}

double vq_worst_case_error(std::span<const double> box_lengths, std::size_t n, int bits) {
  if (box_lengths.size() != n) throw std::invalid_argument("vq_worst_case_error: box dimension mismatch");
  const LatticeSpec spec{n};
  double log2_volume = 0.0;
  for (double len : box_lengths) {
    if (len == 0.0) return 0.0;
    log2_volume += std::log2(len);
  }
  const double log2_scale =
      (log2_volume - static_cast<double>(bits) - std::log2(spec.fundamental_volume())) / static_cast<double>(n);
  return std::exp2(log2_scale) * spec.covering_radius();
}

LatticeQuantizer::LatticeQuantizer(BoxDomain box, int bits) : box_(std::move(box)), bits_(bits) {
  const std::size_t n = box_.dim();
  if (n == 0) throw std::invalid_argument("lattice quantizer needs a non-empty box");
  if (bits < 0) throw std::invalid_argument("lattice quantizer bits must be >= 0");
  double log2_volume = 0.0;
  for (const auto& iv : box_.intervals()) {
    if (!(iv.length() > 0.0)) throw std::invalid_argument("lattice quantizer box is degenerate");
    log2_volume += std::log2(iv.length());
    center_.push_back(0.5 * (iv.lo + iv.hi));
  }
  const LatticeSpec spec{n};
  scale_ = std::exp2((log2_volume - static_cast<double>(bits) - std::log2(spec.fundamental_volume())) /
                     static_cast<double>(n));
}

double LatticeQuantizer::worst_case_error() const { return scale_ * spec().covering_radius(); }

LatticePoint LatticeQuantizer::nearest(std::span<const double> x) const {
  if (x.size() != dim()) throw std::invalid_argument("lattice quantizer: dimension mismatch");
  Vector u(x.begin(), x.end());
  for (double v : u)
    if (!std::isfinite(v)) throw std::invalid_argument("lattice quantizer: non-finite input");
  box_.clamp(u);
  for (std::size_t m = 0; m < u.size(); ++m) u[m] -= center_[m];
  return nearest_point_a_star(u, scale_);
}

Vector LatticeQuantizer::quantize(std::span<const double> x) const {
  auto p = nearest(x);
  for (std::size_t m = 0; m < p.point.size(); ++m) p.point[m] += center_[m];
  return std::move(p.point);
}

const LatticeQuantizer::Codebook& LatticeQuantizer::codebook() const {
  std::call_once(cache_->once, [this] {
    const std::size_t n = dim();
    const double reach = worst_case_error();
    const auto basis = a_star_basis(n);
    const double inv = 1.0 / static_cast<double>(n + 1);

    // Generator columns g_i = s * B^T (e_i - 1/(n+1)), i < n.
    std::vector<Vector> gen(n, Vector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r <= n; ++r) {
        const double e = (r == i ? 1.0 : 0.0) - inv;
        for (std::size_t j = 0; j < n; ++j) gen[i][j] += scale_ * basis[r][j] * e;
      }
    // Invert the n x n generator (Gauss-Jordan) to bound coefficient ranges.
    std::vector<Vector> m(n, Vector(2 * n, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) m[r][c] = gen[c][r];
      m[r][n + r] = 1.0;
    }
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r)
        if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
      std::swap(m[c], m[piv]);
      const double d = m[c][c];
      for (double& v : m[c]) v /= d;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = m[r][c];
        if (f != 0.0)
          for (std::size_t k = 0; k < 2 * n; ++k) m[r][k] -= f * m[c][k];
      }
    }
    std::vector<std::int64_t> lo(n), hi(n);
    double total = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double spread = 0.0;
      for (std::size_t j = 0; j < n; ++j) spread += std::abs(m[i][n + j]) * (0.5 * box_[j].length() + reach);
      lo[i] = static_cast<std::int64_t>(std::floor(-spread)) - 1;
      hi[i] = static_cast<std::int64_t>(std::ceil(spread)) + 1;
      total *= static_cast<double>(hi[i] - lo[i] + 1);
    }
    if (total > 64.0 * static_cast<double>(kMaxCodebook))
      throw std::length_error("lattice codebook too large to enumerate; use quantize()");

    Codebook* book = &cache_->book;
    book->coords.clear();
    book->index.clear();
    std::vector<std::int64_t> c(lo);
    const double reach2 = reach * reach * (1.0 + 1e-12) + 1e-300;
    while (true) {
      Vector p(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p[j] += static_cast<double>(c[i]) * gen[i][j];
      double d2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double half = 0.5 * box_[j].length();
        const double over = std::abs(p[j]) - half;
        if (over > 0.0) d2 += over * over;
      }
      if (d2 <= reach2) {
        LatticeCoords coords(n + 1, 0);
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
          coords[i] = static_cast<std::int64_t>(n + 1) * c[i];
          sum += c[i];
        }
        for (auto& v : coords) v -= sum;
        book->coords.push_back(std::move(coords));
        if (book->coords.size() > kMaxCodebook)
          throw std::length_error("lattice codebook too large to enumerate; use quantize()");
      }
      std::size_t i = 0;
      while (i < n && ++c[i] > hi[i]) c[i] = lo[i], ++i;
      if (i == n) break;
    }
    std::sort(book->coords.begin(), book->coords.end());
    for (std::size_t i = 0; i < book->coords.size(); ++i) book->index.emplace(book->coords[i], i);
  });
  return cache_->book;
}

std::uint64_t LatticeQuantizer::encode(std::span<const double> x) const {
  const auto p = nearest(x);
  const auto& book = codebook();
  auto it = book.index.find(p.coords);
  if (it == book.index.end()) throw std::logic_error("lattice encode: nearest point missing from codebook");
  return it->second;
}

Vector LatticeQuantizer::decode(std::uint64_t index) const {
  const auto& book = codebook();
  if (index >= book.coords.size()) throw std::out_of_range("vq_decode: index out of range");
  Vector p = a_star_point(book.coords[index], scale_);
  for (std::size_t m = 0; m < p.size(); ++m) p[m] += center_[m];
  return p;
}

std::size_t LatticeQuantizer::codebook_size() const { return codebook().coords.size(); }

double LatticeQuantizer::effective_rate() const { return std::log2(static_cast<double>(codebook_size())); }

nlohmann::json LatticeQuantizer::to_json() const {
  nlohmann::json j{{"n", dim()}, {"L", bits_}, {"box", box_to_json(box_)}, {"scale", scale_},
                   {"basis", a_star_basis(dim())}};
  try {
    j["codebook_size"] = codebook_size();
  } catch (const std::length_error&) {
    j["codebook_size"] = nullptr;
  }
  return j;
}

LatticeQuantizer LatticeQuantizer::from_json(const nlohmann::json& j) {
  LatticeQuantizer q(box_from_json(j.at("box")), j.at("L").get<int>());
  if (j.at("n").get<std::size_t>() != q.dim()) throw std::invalid_argument("lattice json: n does not match box");
  q.scale_ = j.at("scale").get<double>();
  q.cache_ = std::make_shared<CodebookCache>();
  return q;
}

LatticeQuantizer vq_design(const BoxDomain& box, std::size_t n, int bits) {
  if (box.dim() != n) throw std::invalid_argument("vq_design: box dimension does not match n");
  return LatticeQuantizer(box, bits);
}

std::uint64_t vq_encode(const LatticeQuantizer& q, std::span<const double> x) { return q.encode(x); }
Vector vq_decode(const LatticeQuantizer& q, std::uint64_t index) { return q.decode(index); }

}  // namespace qcontract
