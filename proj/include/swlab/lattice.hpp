#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "swlab/count.hpp"
#include "swlab/random.hpp"

namespace swlab {

using Coord = std::int64_t;

/// Point of Z^D, D >= 1.
class LatticePoint {
 public:
  explicit LatticePoint(std::vector<Coord> coords);
  LatticePoint(std::initializer_list<Coord> coords);

  static LatticePoint origin(int dim);

  int dim() const { return static_cast<int>(coords_.size()); }
  Coord operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) { return coords_[static_cast<std::size_t>(i)]; }
  const std::vector<Coord>& coords() const { return coords_; }

  bool operator==(const LatticePoint&) const = default;
  auto operator<=>(const LatticePoint&) const = default;

 private:
  std::vector<Coord> coords_;
};

LatticePoint operator+(const LatticePoint& a, const LatticePoint& b);
LatticePoint operator-(const LatticePoint& a, const LatticePoint& b);

std::string to_string(const LatticePoint& p);
std::ostream& operator<<(std::ostream& os, const LatticePoint& p);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept;
};

/// Sum of absolute coordinates. Throws OverflowError instead of wrapping.
Coord manhattan_norm(const LatticePoint& p);

/// Representative of p under coordinate permutations and sign flips:
/// absolute values sorted ascending.
LatticePoint canonical_form(const LatticePoint& p);

/// All canonical points of norm d in dimension dim, lexicographic order.
std::vector<LatticePoint> canonical_points(int dim, Coord d);

enum class MetricKind { kInfiniteGrid, kFiniteGrid, kTorus };

std::string to_string(MetricKind kind);

class MetricSpace {
 public:
  static MetricSpace infinite_grid(int dim);
  static MetricSpace finite_grid(int dim, Coord n);
  static MetricSpace torus(int dim, Coord n);

  MetricKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Side length; zero for the infinite grid.
  Coord side() const { return side_; }
  bool finite() const { return kind_ != MetricKind::kInfiniteGrid; }

  bool contains(const LatticePoint& p) const;
  /// Throws std::invalid_argument on a dimension mismatch and std::out_of_range
  /// when p leaves [0, n-1]^D.
  void require_contains(const LatticePoint& p) const;

  /// Largest radius whose torus sphere wraps injectively: floor((n-1)/2).
  Coord max_torus_radius() const { return (side_ - 1) / 2; }

  /// Reduces coordinates into [0, n-1] on the torus; identity otherwise.
  LatticePoint wrap(const LatticePoint& p) const;

  std::string describe() const;

 private:
  MetricSpace(MetricKind kind, int dim, Coord side) : kind_(kind), dim_(dim), side_(side) {}

  MetricKind kind_;
  int dim_;
  Coord side_;
};

/// Shortest-path distance in m: Manhattan on grids, per-coordinate
/// min(|a-b|, n-|a-b|) summed on the torus.
Coord distance(const LatticePoint& p, const LatticePoint& q, const MetricSpace& m);

/// |{x in Z^dim : |x|_1 = r}|, memoized per thread.
Count sphere_size(int dim, Coord r);

/// Uniform point on the Manhattan sphere of radius r around u.
LatticePoint sample_sphere_uniform(const LatticePoint& u, Coord r, Rng& rng);

/// |{x : |x - u|_1 = r and |x|_1 <= j - 1}|.
Count count_sphere_ball(const LatticePoint& u, Coord r, Coord j);

/// |{x : |x - u|_1 = r and |x|_1 = m}|.
Count count_sphere_sphere(const LatticePoint& u, Coord r, Coord m);

/// |{x : |x - u|_1 = r and x in [0, n-1]^D}|.
Count count_sphere_in_box(const LatticePoint& u, Coord r, Coord n);

/// Uniform point of the sphere restricted to [0, n-1]^D, or nullopt when
/// the restriction is empty.
std::optional<LatticePoint> sample_sphere_in_box(const LatticePoint& u, Coord r, Coord n,
                                                 Rng& rng);

/// Norm histogram of spheres around a fixed centre.
///
/// counts(r)[m] is the number of points x with |x - u|_1 = r and |x|_1 = m,
/// for 0 <= m <= max_norm. Sub-profiles of coordinate suffixes are shared
/// across radii, so sweeping r for one centre is cheap. Not thread-safe.
class SphereNormProfile {
 public:
  SphereNormProfile(const LatticePoint& u, Coord max_norm);

  const std::vector<Count>& counts(Coord r);
  /// Points of S_{u,r} with norm <= j - 1; requires j - 1 <= max_norm.
  Count ball(Coord r, Coord j);
  Coord max_norm() const { return max_norm_; }

 private:
  void accumulate(int k, Coord rr, Coord shift, std::vector<Count>& out);
  const std::vector<Count>& suffix(int k, Coord rr);

  std::vector<Coord> abs_u_;
  Coord max_norm_;
  std::vector<std::unordered_map<Coord, std::vector<Count>>> memo_;
  std::unordered_map<Coord, std::vector<Count>> top_;
};

/// One (u, r, j) instance of the sphere/ball ratio bound, cross-multiplied:
/// lhs = |B_{0,j-1} ∩ S_{u,r}| * d*, rhs = 2j * |B_{0,d*-1} ∩ S_{u,r}|.
struct GeometryRow {
  int dim = 0;
  Coord d = 0;
  LatticePoint u{0};
  Coord r = 0;
  Coord j = 0;
  Count lhs = 0;
  Count rhs = 0;
  bool violated() const { return lhs > rhs; }
};

struct GeometryAudit {
  std::int64_t centres = 0;
  std::int64_t configurations = 0;  // (u, r) pairs with a nonempty inner intersection
  std::int64_t checks = 0;          // (u, r, j) triples
  std::int64_t violations = 0;
  std::int64_t equalities = 0;
  std::vector<GeometryRow> violation_rows;
};

/// Exhaustive check of |B_{0,j-1} ∩ S_{u,r}| * d* <= 2j * |B_{0,d*-1} ∩ S_{u,r}|
/// with d* = d - floor(d/2), over canonical u with |u| = d in [d_min, d_max],
/// every r with a nonempty B_{0,d*-1} ∩ S_{u,r}, and 1 <= j <= d*.
/// on_row, when set, sees every checked triple.
GeometryAudit audit_geometry(int dim, Coord d_min, Coord d_max,
                             const std::function<void(const GeometryRow&)>& on_row = {});

struct TightnessWitness {
  Coord d = 0;
  LatticePoint u{0};
  Coord r = 0;
  Coord j = 0;
  Count inner = 0;
  Count outer = 0;
  Rational factor;  // inner * d* / (2j * outer); at most 1 when the bound holds
};

/// Largest ratio of the geometry bound attained at distance d in dimension 2.
/// With axis_only the search is restricted to u = (0, d).
TightnessWitness tightness_probe(Coord d, bool axis_only = false);

}  // namespace swlab
