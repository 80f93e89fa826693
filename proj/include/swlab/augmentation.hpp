#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swlab/count.hpp"
#include "swlab/lattice.hpp"
#include "swlab/random.hpp"

namespace swlab {

/// Law of the long-range-contact radius. Finite support, radii >= 1.
///
/// Every distribution carries exact rational masses alongside the double
/// masses used for sampling. Table weights are taken as the exact binary
/// value of the double; integer power-law exponents give exact weights.
class LrcDistribution {
 public:
  static LrcDistribution from_table(std::span<const std::pair<Coord, double>> pairs);
  static LrcDistribution from_exact(std::span<const std::pair<Coord, Rational>> pairs);
  static LrcDistribution point_mass(Coord r);

  const std::vector<Coord>& support() const { return support_; }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<Rational>& exact_masses() const { return exact_; }

  double mass(Coord r) const;
  Rational exact_mass(Coord r) const;
  /// lambda([lo, hi)).
  double mass_between(Coord lo, Coord hi) const;
  Coord max_radius() const { return support_.back(); }

  Coord sample_radius(Rng& rng) const;

  const std::string& descriptor() const { return descriptor_; }

 private:
  LrcDistribution() = default;
  static LrcDistribution build(std::vector<std::pair<Coord, Rational>> weights,
                               std::string descriptor);

  std::vector<Coord> support_;
  std::vector<double> masses_;
  std::vector<Rational> exact_;
  std::vector<double> cumulative_;
  std::string descriptor_;

  friend LrcDistribution lrc_node_power(int dim, double alpha, Coord r_max);
};

/// Normalized table; duplicate radii are merged. Throws std::invalid_argument
/// on an empty or all-zero table, a negative weight, or a radius < 1.
LrcDistribution lrc_from_table(std::span<const std::pair<Coord, double>> pairs);

/// mass(r) proportional to sphere_size(dim, r) * r^-alpha on 1..r_max, i.e. every
/// node at distance r is individually proportional to r^-alpha.
LrcDistribution lrc_node_power(int dim, double alpha, Coord r_max);

/// Reads "radius weight" lines; '#' starts a comment. Throws
/// std::invalid_argument with the offending line number on malformed input.
LrcDistribution parse_lrc_table(std::istream& in);
LrcDistribution load_lrc_table(const std::string& path);

/// Throws std::invalid_argument when lambda cannot be used on m (torus
/// support beyond floor((n-1)/2), or dimension mismatch for finite kinds).
void require_compatible(const LrcDistribution& lambda, const MetricSpace& m);

/// Two-stage contact draw: r ~ lambda, then uniform on the sphere of radius r
/// around u. The torus wraps; the finite grid conditions on staying inside
/// and yields nullopt when that sphere has no in-bounds point.
std::optional<LatticePoint> sample_contact(const LatticePoint& u, const LrcDistribution& lambda,
                                           const MetricSpace& m, Rng& rng);

}  // namespace swlab
