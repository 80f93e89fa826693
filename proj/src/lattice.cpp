#include "swlab/lattice.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace swlab {

namespace {

Coord abs_diff(Coord a, Coord b) { return checked_abs(checked_add(a, -b)); }

void require_nonnegative(Coord value, const char* what) {
  if (value < 0) throw std::invalid_argument(std::string(what) + " must be nonnegative");
}

std::uint64_t pack_key(std::uint64_t k, std::uint64_t a, std::uint64_t b) {
  return (k << 58) ^ (a << 29) ^ b;
}

void require_key_range(Coord a, Coord b) {
  if (a >= (Coord{1} << 29) || b >= (Coord{1} << 29)) {
    throw OverflowError("radius or norm bound too large for the counting memo");
  }
}

}  // namespace

LatticePoint::LatticePoint(std::vector<Coord> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("lattice point needs dimension >= 1");
}

LatticePoint::LatticePoint(std::initializer_list<Coord> coords)
    : LatticePoint(std::vector<Coord>(coords)) {}

LatticePoint LatticePoint::origin(int dim) {
  if (dim < 1) throw std::invalid_argument("lattice point needs dimension >= 1");
  return LatticePoint(std::vector<Coord>(static_cast<std::size_t>(dim), 0));
}

LatticePoint operator+(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  std::vector<Coord> out(a.coords());
  for (int i = 0; i < a.dim(); ++i) out[static_cast<std::size_t>(i)] = checked_add(a[i], b[i]);
  return LatticePoint(std::move(out));
}

LatticePoint operator-(const LatticePoint& a, const LatticePoint& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  std::vector<Coord> out(a.coords());
  for (int i = 0; i < a.dim(); ++i) {
    if (b[i] == INT64_MIN) throw OverflowError("coordinate negation overflows");
    out[static_cast<std::size_t>(i)] = checked_add(a[i], -b[i]);
  }
  return LatticePoint(std::move(out));
}

std::string to_string(const LatticePoint& p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
  os << '(';
  for (int i = 0; i < p.dim(); ++i) {
    if (i) os << ',';
    os << p[i];
  }
  return os << ')';
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (Coord c : p.coords()) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

Coord manhattan_norm(const LatticePoint& p) {
  Coord sum = 0;
  for (Coord c : p.coords()) sum = checked_add(sum, checked_abs(c));
  return sum;
}

LatticePoint canonical_form(const LatticePoint& p) {
  std::vector<Coord> out;
  out.reserve(p.coords().size());
  for (Coord c : p.coords()) out.push_back(checked_abs(c));
  std::sort(out.begin(), out.end());
  return LatticePoint(std::move(out));
}

std::vector<LatticePoint> canonical_points(int dim, Coord d) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  require_nonnegative(d, "norm");
  std::vector<LatticePoint> out;
  std::vector<Coord> prefix;
  // Ascending parts: each part is at least the previous one and at most the
  // remaining sum split evenly over the remaining slots.
  std::function<void(int, Coord, Coord)> rec = [&](int slots, Coord remaining, Coord lo) {
    if (slots == 1) {
      if (remaining >= lo) {
        prefix.push_back(remaining);
        out.emplace_back(prefix);
        prefix.pop_back();
      }
      return;
    }
    for (Coord a = lo; a * slots <= remaining; ++a) {
      prefix.push_back(a);
      rec(slots - 1, remaining - a, a);
      prefix.pop_back();
    }
  };
  rec(dim, d, 0);
  return out;
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kInfiniteGrid: return "infinite-grid";
    case MetricKind::kFiniteGrid: return "finite-grid";
    case MetricKind::kTorus: return "torus";
  }
  return "unknown";
}

MetricSpace MetricSpace::infinite_grid(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  return MetricSpace(MetricKind::kInfiniteGrid, dim, 0);
}

MetricSpace MetricSpace::finite_grid(int dim, Coord n) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (n < 2) throw std::invalid_argument("finite grid side must be >= 2");
  return MetricSpace(MetricKind::kFiniteGrid, dim, n);
}

MetricSpace MetricSpace::torus(int dim, Coord n) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (n < 2) throw std::invalid_argument("torus side must be >= 2");
  return MetricSpace(MetricKind::kTorus, dim, n);
}

bool MetricSpace::contains(const LatticePoint& p) const {
  if (p.dim() != dim_) return false;
  if (!finite()) return true;
  return std::all_of(p.coords().begin(), p.coords().end(),
                     [&](Coord c) { return c >= 0 && c < side_; });
}

void MetricSpace::require_contains(const LatticePoint& p) const {
  if (p.dim() != dim_) throw std::invalid_argument("point " + to_string(p) + " has wrong dimension");
  if (!contains(p)) {
    throw std::out_of_range("point " + to_string(p) + " lies outside " + describe());
  }
}

LatticePoint MetricSpace::wrap(const LatticePoint& p) const {
  if (kind_ != MetricKind::kTorus) return p;
  std::vector<Coord> out(p.coords());
  for (Coord& c : out) {
    c %= side_;
    if (c < 0) c += side_;
  }
  return LatticePoint(std::move(out));
}

std::string MetricSpace::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(D=" << dim_;
  if (finite()) os << ",n=" << side_;
  os << ')';
  return os.str();
}

Coord distance(const LatticePoint& p, const LatticePoint& q, const MetricSpace& m) {
  m.require_contains(p);
  m.require_contains(q);
  Coord sum = 0;
  for (int i = 0; i < m.dim(); ++i) {
    Coord delta = abs_diff(p[i], q[i]);
    if (m.kind() == MetricKind::kTorus) delta = std::min(delta, m.side() - delta);
    sum = checked_add(sum, delta);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Sphere sizes

namespace {

// table[dim][r] = N(dim, r); prefix[dim][r] = sum_{t <= r} N(dim, t).
struct SphereTable {
  std::vector<std::vector<Count>> size;
  std::vector<std::vector<Count>> prefix;

  Count get(int dim, Coord r) {
    if (static_cast<int>(size.size()) <= dim) {
      size.resize(static_cast<std::size_t>(dim) + 1);
      prefix.resize(static_cast<std::size_t>(dim) + 1);
    }
    const auto idx = static_cast<std::size_t>(dim);
    while (static_cast<Coord>(size[idx].size()) <= r) extend(dim);
    return size[idx][static_cast<std::size_t>(r)];
  }

  void extend(int dim) {
    const auto idx = static_cast<std::size_t>(dim);
    const Coord r = static_cast<Coord>(size[idx].size());
    Count value;
    if (dim == 1) {
      value = r == 0 ? 1 : 2;
    } else {
      // N(D, r) = sum_{k=-r..r} N(D-1, r-|k|) = N(D-1, r) + 2 * sum_{t<r} N(D-1, t)
      value = get(dim - 1, r);
      if (r > 0) {
        value = checked_add(value, checked_mul(2, prefix[idx - 1][static_cast<std::size_t>(r - 1)]));
      }
    }
    auto& pre = prefix[idx];
    pre.push_back(pre.empty() ? value : checked_add(pre.back(), value));
    size[idx].push_back(value);
  }
};

SphereTable& sphere_table() {
  thread_local SphereTable table;
  return table;
}

// Radii above this use the closed form instead of growing the table.
constexpr Coord kSphereTableLimit = Coord{1} << 16;

Count binomial(Coord n, Coord k) {
  Count c = 1;
  for (Coord i = 0; i < k; ++i) c = checked_mul(c, static_cast<Count>(n - i)) / static_cast<Count>(i + 1);
  return c;
}

// N(D, r) = sum_{k=1}^{min(D,r)} 2^k C(D,k) C(r-1,k-1) for r >= 1.
Count sphere_size_closed(int dim, Coord r) {
  if (r == 0) return 1;
  Count total = 0;
  for (Coord k = 1; k <= std::min<Coord>(dim, r); ++k) {
    if (k >= 127) throw OverflowError("sphere size overflows 128 bits");
    const Count term = checked_mul(checked_mul(Count{1} << k, binomial(dim, k)), binomial(r - 1, k - 1));
    total = checked_add(total, term);
  }
  return total;
}

}  // namespace

Count sphere_size(int dim, Coord r) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  require_nonnegative(r, "radius");
  if (r > kSphereTableLimit || dim > 64) return sphere_size_closed(dim, r);
  return sphere_table().get(dim, r);
}

LatticePoint sample_sphere_uniform(const LatticePoint& u, Coord r, Rng& rng) {
  require_nonnegative(r, "radius");
  const int dim = u.dim();
  std::vector<Coord> out(u.coords());
  Coord rr = r;
  for (int k = 0; k < dim && rr > 0; ++k) {
    const int rem = dim - k;
    Coord delta;
    if (rem == 1) {
      delta = (rng() & 1) ? rr : -rr;
    } else {
      // Index the remaining sphere; offsets with |delta| = t own 2 * N(rem-1, rr-t)
      // consecutive indices (one block per sign), t = 0 owns N(rem-1, rr).
      std::uint64_t idx = uniform_below(rng, narrow_u64(sphere_size(rem, rr)));
      delta = 0;
      for (Coord t = 0; t <= rr; ++t) {
        const std::uint64_t block = narrow_u64(sphere_size(rem - 1, rr - t));
        if (t == 0) {
          if (idx < block) break;
          idx -= block;
        } else {
          if (idx < block) { delta = -t; break; }
          idx -= block;
          if (idx < block) { delta = t; break; }
          idx -= block;
        }
      }
    }
    out[static_cast<std::size_t>(k)] = checked_add(out[static_cast<std::size_t>(k)], delta);
    rr -= checked_abs(delta);
  }
  return LatticePoint(std::move(out));
}

// ---------------------------------------------------------------------------
// Intersection counts by recursion on the first coordinate

namespace {

class IntersectionCounter {
 public:
  // exact = false: norm <= bound; exact = true: norm == bound.
  IntersectionCounter(const LatticePoint& u, bool exact)
      : abs_u_(canonical_form(u).coords()), exact_(exact) {}

  Count count(int k, Coord rr, Coord bound) {
    if (bound < 0 || rr < 0) return 0;
    const Coord uk = abs_u_[static_cast<std::size_t>(k)];
    const int rem = static_cast<int>(abs_u_.size()) - k;
    if (rem == 1) {
      Count c = 0;
      const Coord lo = checked_add(uk, -rr);
      const Coord hi = checked_add(uk, rr);
      c += accepts(checked_abs(lo), bound) ? 1 : 0;
      if (rr != 0) c += accepts(checked_abs(hi), bound) ? 1 : 0;
      return c;
    }
    const std::uint64_t key = pack_key(static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(rr),
                                       static_cast<std::uint64_t>(bound));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Count total = 0;
    const Coord lo = std::max(checked_add(uk, -rr), -bound);
    const Coord hi = std::min(checked_add(uk, rr), bound);
    for (Coord x = lo; x <= hi; ++x) {
      total = checked_add(total, count(k + 1, rr - abs_diff(x, uk), bound - checked_abs(x)));
    }
    memo_.emplace(key, total);
    return total;
  }

 private:
  bool accepts(Coord norm, Coord bound) const { return exact_ ? norm == bound : norm <= bound; }

  std::vector<Coord> abs_u_;
  bool exact_;
  std::unordered_map<std::uint64_t, Count> memo_;
};

}  // namespace

Count count_sphere_ball(const LatticePoint& u, Coord r, Coord j) {
  require_nonnegative(r, "radius");
  if (j < 1) throw std::invalid_argument("ball parameter j must be >= 1");
  require_key_range(r, j);
  IntersectionCounter counter(u, false);
  return counter.count(0, r, j - 1);
}

Count count_sphere_sphere(const LatticePoint& u, Coord r, Coord m) {
  require_nonnegative(r, "radius");
  require_nonnegative(m, "norm");
  require_key_range(r, m);
  IntersectionCounter counter(u, true);
  return counter.count(0, r, m);
}

// ---------------------------------------------------------------------------
// Spheres clipped to [0, n-1]^D

namespace {

class BoxCounter {
 public:
  BoxCounter(const LatticePoint& u, Coord r, Coord n) : u_(u), n_(n) {
    memo_.assign(static_cast<std::size_t>(u.dim()),
                 std::vector<std::optional<Count>>(static_cast<std::size_t>(r) + 1));
  }

  // Points (x_k, ..., x_{D-1}) in the box with sum |x_i - u_i| = rr.
  Count count(int k, Coord rr) {
    const Coord uk = u_[k];
    if (k == u_.dim() - 1) {
      Count c = in_box(uk - rr) ? 1 : 0;
      if (rr != 0 && in_box(uk + rr)) ++c;
      return c;
    }
    auto& slot = memo_[static_cast<std::size_t>(k)][static_cast<std::size_t>(rr)];
    if (slot) return *slot;
    Count total = 0;
    for (Coord x = std::max<Coord>(0, uk - rr); x <= std::min(n_ - 1, uk + rr); ++x) {
      total = checked_add(total, count(k + 1, rr - abs_diff(x, uk)));
    }
    slot = total;
    return total;
  }

  LatticePoint sample(Coord r, Rng& rng) {
    std::vector<Coord> out(u_.coords());
    Coord rr = r;
    for (int k = 0; k < u_.dim(); ++k) {
      const Coord uk = u_[k];
      if (k == u_.dim() - 1) {
        const bool lo_ok = in_box(uk - rr);
        const bool hi_ok = rr != 0 && in_box(uk + rr);
        if (lo_ok && hi_ok) {
          out[static_cast<std::size_t>(k)] = (rng() & 1) ? uk + rr : uk - rr;
        } else {
          out[static_cast<std::size_t>(k)] = lo_ok ? uk - rr : uk + rr;
        }
        break;
      }
      std::uint64_t idx = uniform_below(rng, narrow_u64(count(k, rr)));
      for (Coord x = std::max<Coord>(0, uk - rr); x <= std::min(n_ - 1, uk + rr); ++x) {
        const std::uint64_t block = narrow_u64(count(k + 1, rr - abs_diff(x, uk)));
        if (idx < block) {
          out[static_cast<std::size_t>(k)] = x;
          rr -= abs_diff(x, uk);
          break;
        }
        idx -= block;
      }
    }
    return LatticePoint(std::move(out));
  }

 private:
  bool in_box(Coord x) const { return x >= 0 && x < n_; }

  const LatticePoint& u_;
  Coord n_;
  std::vector<std::vector<std::optional<Count>>> memo_;
};

}  // namespace

Count count_sphere_in_box(const LatticePoint& u, Coord r, Coord n) {
  require_nonnegative(r, "radius");
  if (n < 1) throw std::invalid_argument("box side must be positive");
  BoxCounter counter(u, r, n);
  return counter.count(0, r);
}

std::optional<LatticePoint> sample_sphere_in_box(const LatticePoint& u, Coord r, Coord n,
                                                 Rng& rng) {
  require_nonnegative(r, "radius");
  BoxCounter counter(u, r, n);
  if (counter.count(0, r) == 0) return std::nullopt;
  return counter.sample(r, rng);
}

// ---------------------------------------------------------------------------
// Norm profiles

SphereNormProfile::SphereNormProfile(const LatticePoint& u, Coord max_norm)
    : abs_u_(canonical_form(u).coords()), max_norm_(max_norm),
      memo_(static_cast<std::size_t>(u.dim())) {
  require_nonnegative(max_norm, "norm bound");
}

const std::vector<Count>& SphereNormProfile::counts(Coord r) {
  require_nonnegative(r, "radius");
  if (auto it = top_.find(r); it != top_.end()) return it->second;
  std::vector<Count> out(static_cast<std::size_t>(max_norm_) + 1, 0);
  accumulate(0, r, 0, out);
  return top_.emplace(r, std::move(out)).first->second;
}

Count SphereNormProfile::ball(Coord r, Coord j) {
  if (j < 1 || j - 1 > max_norm_) throw std::out_of_range("ball parameter outside profile");
  const auto& c = counts(r);
  Count total = 0;
  for (Coord m = 0; m < j; ++m) total = checked_add(total, c[static_cast<std::size_t>(m)]);
  return total;
}

const std::vector<Count>& SphereNormProfile::suffix(int k, Coord rr) {
  auto& level = memo_[static_cast<std::size_t>(k)];
  if (auto it = level.find(rr); it != level.end()) return it->second;
  std::vector<Count> out(static_cast<std::size_t>(max_norm_) + 1, 0);
  accumulate(k, rr, 0, out);
  return level.emplace(rr, std::move(out)).first->second;
}

void SphereNormProfile::accumulate(int k, Coord rr, Coord shift, std::vector<Count>& out) {
  const Coord uk = abs_u_[static_cast<std::size_t>(k)];
  const int rem = static_cast<int>(abs_u_.size()) - k;
  const Coord room = max_norm_ - shift;
  if (room < 0) return;
  if (rem == 1) {
    const Coord a = checked_abs(uk - rr);
    if (a <= room) out[static_cast<std::size_t>(shift + a)] += 1;
    if (rr != 0 && uk + rr <= room) out[static_cast<std::size_t>(shift + uk + rr)] += 1;
    return;
  }
  const Coord lo = std::max(uk - rr, -room);
  const Coord hi = std::min(uk + rr, room);
  for (Coord x = lo; x <= hi; ++x) {
    const Coord ax = checked_abs(x);
    const Coord sub_rr = rr - abs_diff(x, uk);
    if (rem == 2) {
      accumulate(k + 1, sub_rr, shift + ax, out);
      continue;
    }
    const auto& sub = suffix(k + 1, sub_rr);
    for (Coord m = 0; shift + ax + m <= max_norm_; ++m) {
      const Count c = sub[static_cast<std::size_t>(m)];
      if (c != 0) {
        auto& slot = out[static_cast<std::size_t>(shift + ax + m)];
        slot = checked_add(slot, c);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Geometry audit

GeometryAudit audit_geometry(int dim, Coord d_min, Coord d_max,
                             const std::function<void(const GeometryRow&)>& on_row) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (d_min < 1 || d_max < d_min) throw std::invalid_argument("bad distance range");
  GeometryAudit audit;
  for (Coord d = d_min; d <= d_max; ++d) {
    const Coord d_star = d - d / 2;
    for (const LatticePoint& u : canonical_points(dim, d)) {
      ++audit.centres;
      SphereNormProfile profile(u, d_star - 1);
      // Triangle inequality: S_{u,r} meets B_{0,d*-1} only if d-(d*-1) <= r <= d+d*-1.
      for (Coord r = d - d_star + 1; r <= d + d_star - 1; ++r) {
        const auto& counts = profile.counts(r);
        std::vector<Count> prefix(static_cast<std::size_t>(d_star) + 1, 0);
        for (Coord m = 0; m < d_star; ++m) {
          prefix[static_cast<std::size_t>(m) + 1] =
              checked_add(prefix[static_cast<std::size_t>(m)], counts[static_cast<std::size_t>(m)]);
        }
        const Count outer = prefix[static_cast<std::size_t>(d_star)];
        if (outer == 0) continue;
        ++audit.configurations;
        for (Coord j = 1; j <= d_star; ++j) {
          GeometryRow row;
          row.dim = dim;
          row.d = d;
          row.u = u;
          row.r = r;
          row.j = j;
          row.lhs = checked_mul(prefix[static_cast<std::size_t>(j)], static_cast<Count>(d_star));
          row.rhs = checked_mul(static_cast<Count>(2 * j), outer);
          ++audit.checks;
          if (row.violated()) {
            ++audit.violations;
            audit.violation_rows.push_back(row);
          } else if (row.lhs == row.rhs) {
            ++audit.equalities;
          }
          if (on_row) on_row(row);
        }
      }
    }
  }
  return audit;
}

TightnessWitness tightness_probe(Coord d, bool axis_only) {
  if (d < 3) throw std::invalid_argument("tightness probe needs d >= 3");
  const Coord d_star = d - d / 2;
  TightnessWitness best;
  best.factor = -1;
  std::vector<LatticePoint> centres =
      axis_only ? std::vector<LatticePoint>{LatticePoint{0, d}} : canonical_points(2, d);
  for (const LatticePoint& u : centres) {
    SphereNormProfile profile(u, d_star - 1);
    for (Coord r = d - d_star + 1; r <= d + d_star - 1; ++r) {
      const auto& counts = profile.counts(r);
      Count outer = 0;
      for (Coord m = 0; m < d_star; ++m) outer += counts[static_cast<std::size_t>(m)];
      if (outer == 0) continue;
      Count inner = 0;
      for (Coord j = 1; j <= d_star; ++j) {
        inner += counts[static_cast<std::size_t>(j - 1)];
        Rational factor(to_bigint(inner) * d_star, to_bigint(outer) * (2 * j));
        if (factor > best.factor) {
          best = TightnessWitness{d, u, r, j, inner, outer, factor};
        }
      }
    }
  }
  return best;
}

}  // namespace swlab
