#include "swlab/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace swlab {

namespace {

constexpr int kRejectionAttempts = 64;

Rational exact_from_double(double w) {
  if (!std::isfinite(w)) throw std::invalid_argument("weight must be finite");
  return Rational(w);
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

LrcDistribution LrcDistribution::build(std::vector<std::pair<Coord, Rational>> weights,
                                       std::string descriptor) {
  if (weights.empty()) throw std::invalid_argument("lrc table is empty");
  std::map<Coord, Rational> merged;
  for (auto& [r, w] : weights) {
    if (r < 1) throw std::invalid_argument("lrc radius must be >= 1 (got " + std::to_string(r) + ")");
    if (w < 0) throw std::invalid_argument("lrc weight must be nonnegative");
    merged[r] += w;
  }
  Rational total = 0;
  for (const auto& [r, w] : merged) total += w;
  if (total == 0) throw std::invalid_argument("lrc table has no positive weight");

  LrcDistribution out;
  out.descriptor_ = std::move(descriptor);
  double running = 0;
  for (const auto& [r, w] : merged) {
    if (w == 0) continue;
    out.support_.push_back(r);
    out.exact_.push_back(w / total);
    out.masses_.push_back(static_cast<double>(out.exact_.back()));
    running += out.masses_.back();
    out.cumulative_.push_back(running);
  }
  out.cumulative_.back() = 1.0;
  return out;
}

LrcDistribution LrcDistribution::from_table(std::span<const std::pair<Coord, double>> pairs) {
  std::vector<std::pair<Coord, Rational>> weights;
  weights.reserve(pairs.size());
  for (const auto& [r, w] : pairs) {
    if (!(w >= 0)) throw std::invalid_argument("lrc weight must be nonnegative");
    weights.emplace_back(r, exact_from_double(w));
  }
  return build(std::move(weights), "table");
}

LrcDistribution LrcDistribution::from_exact(std::span<const std::pair<Coord, Rational>> pairs) {
  return build(std::vector<std::pair<Coord, Rational>>(pairs.begin(), pairs.end()), "table");
}

LrcDistribution LrcDistribution::point_mass(Coord r) {
  std::vector<std::pair<Coord, Rational>> w{{r, Rational(1)}};
  return build(std::move(w), "point-mass(r=" + std::to_string(r) + ")");
}

double LrcDistribution::mass(Coord r) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), r);
  if (it == support_.end() || *it != r) return 0.0;
  return masses_[static_cast<std::size_t>(it - support_.begin())];
}

Rational LrcDistribution::exact_mass(Coord r) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), r);
  if (it == support_.end() || *it != r) return Rational(0);
  return exact_[static_cast<std::size_t>(it - support_.begin())];
}

double LrcDistribution::mass_between(Coord lo, Coord hi) const {
  double total = 0;
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (support_[k] >= lo && support_[k] < hi) total += masses_[k];
  }
  return total;
}

Coord LrcDistribution::sample_radius(Rng& rng) const {
  const double x = uniform01(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
  if (it == cumulative_.end()) --it;
  return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

LrcDistribution lrc_from_table(std::span<const std::pair<Coord, double>> pairs) {
  return LrcDistribution::from_table(pairs);
}

LrcDistribution lrc_node_power(int dim, double alpha, Coord r_max) {
  if (r_max < 1) throw std::invalid_argument("r_max must be >= 1");
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  const bool integral = alpha == std::floor(alpha) && alpha <= 64;
  std::vector<std::pair<Coord, Rational>> weights;
  weights.reserve(static_cast<std::size_t>(r_max));
  for (Coord r = 1; r <= r_max; ++r) {
    const Count size = sphere_size(dim, r);
    if (integral) {
      BigInt den = boost::multiprecision::pow(BigInt(r), static_cast<unsigned>(alpha));
      weights.emplace_back(r, Rational(to_bigint(size), den));
    } else {
      weights.emplace_back(r, exact_from_double(to_double(size) * std::pow(static_cast<double>(r), -alpha)));
    }
  }
  std::string descriptor = "node-power(D=" + std::to_string(dim) + ",alpha=" + format_double(alpha) +
                           ",r_max=" + std::to_string(r_max) + ")";
  return LrcDistribution::build(std::move(weights), std::move(descriptor));
}

LrcDistribution parse_lrc_table(std::istream& in) {
  std::vector<std::pair<Coord, double>> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    std::istringstream rest(line);
    long long r;
    double w;
    std::string extra;
    if (!(rest >> r >> w) || (rest >> extra)) {
      throw std::invalid_argument("lrc table line " + std::to_string(line_no) +
                                  ": expected \"radius weight\"");
    }
    pairs.emplace_back(static_cast<Coord>(r), w);
  }
  try {
    return lrc_from_table(pairs);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("lrc table: ") + e.what());
  }
}

LrcDistribution load_lrc_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open lrc table " + path);
  return parse_lrc_table(in);
}

void require_compatible(const LrcDistribution& lambda, const MetricSpace& m) {
  if (m.kind() == MetricKind::kTorus && lambda.max_radius() > m.max_torus_radius()) {
    throw std::invalid_argument("lrc support radius " + std::to_string(lambda.max_radius()) +
                                " exceeds floor((n-1)/2) = " + std::to_string(m.max_torus_radius()) +
                                " on " + m.describe());
  }
}

std::optional<LatticePoint> sample_contact(const LatticePoint& u, const LrcDistribution& lambda,
                                           const MetricSpace& m, Rng& rng) {
  m.require_contains(u);
  const Coord r = lambda.sample_radius(rng);
  switch (m.kind()) {
    case MetricKind::kInfiniteGrid:
      return sample_sphere_uniform(u, r, rng);
    case MetricKind::kTorus:
      require_compatible(lambda, m);
      return m.wrap(sample_sphere_uniform(u, r, rng));
    case MetricKind::kFiniteGrid: {
      const Coord n = m.side();
      const bool inside = std::all_of(u.coords().begin(), u.coords().end(),
                                      [&](Coord c) { return c - r >= 0 && c + r <= n - 1; });
      if (inside) return sample_sphere_uniform(u, r, rng);
      for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
        LatticePoint v = sample_sphere_uniform(u, r, rng);
        if (m.contains(v)) return v;
      }
      // Sparse or empty in-bounds part: draw from it directly.
      return sample_sphere_in_box(u, r, n, rng);
    }
  }
  return std::nullopt;
}

}  // namespace swlab
