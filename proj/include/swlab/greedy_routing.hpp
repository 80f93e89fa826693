#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "swlab/augmentation.hpp"
#include "swlab/lattice.hpp"
#include "swlab/random.hpp"

namespace swlab {

struct RouteResult {
  std::int64_t hops = 0;
  std::optional<std::vector<LatticePoint>> path;  // s ... t when recorded
  std::int64_t lrc_uses = 0;
};

/// Source of long-range contacts for one routing trial. Node x's contact is a
/// pure function of (trial key, x), so lazily sampled and pre-materialized
/// contacts coincide for the same key.
class ContactOracle {
 public:
  ContactOracle(const LrcDistribution& lambda, const MetricSpace& m, std::uint64_t trial_key);

  std::optional<LatticePoint> contact(const LatticePoint& x) const;

  const LrcDistribution& lambda() const { return *lambda_; }
  const MetricSpace& metric() const { return metric_; }

 private:
  const LrcDistribution* lambda_;
  MetricSpace metric_;
  std::uint64_t key_;
};

/// Greedy routing from s to t. Each visited node's contact is drawn on first
/// visit; ties prefer the long-range contact, then lower coordinate index,
/// then the negative direction. The trial key is one draw from rng.
RouteResult greedy_route(const LatticePoint& s, const LatticePoint& t,
                         const LrcDistribution& lambda, const MetricSpace& m, Rng& rng,
                         bool record_path = false);

RouteResult greedy_route_keyed(const LatticePoint& s, const LatticePoint& t,
                               const LrcDistribution& lambda, const MetricSpace& m,
                               std::uint64_t trial_key, bool record_path = false);

/// All contacts of a finite metric space, indexed by row-major node index.
class ContactTable {
 public:
  ContactTable(const LrcDistribution& lambda, const MetricSpace& m, std::uint64_t trial_key);

  const std::optional<LatticePoint>& contact(const LatticePoint& x) const;
  const MetricSpace& metric() const { return metric_; }

 private:
  std::size_t index_of(const LatticePoint& x) const;

  MetricSpace metric_;
  std::vector<std::optional<LatticePoint>> contacts_;
};

/// Greedy routing over pre-materialized contacts; same tie rules.
RouteResult greedy_route_eager(const LatticePoint& s, const LatticePoint& t,
                               const ContactTable& contacts, bool record_path = false);

struct RoutingEstimate {
  std::int64_t trials = 0;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  double mean_lrc_uses = 0.0;
  std::int64_t max_hops = 0;
  std::int64_t initial_distance = 0;
  std::map<std::int64_t, std::int64_t> histogram;  // hops -> trials
  std::vector<std::int64_t> hops;                  // per trial, by index
};

/// Independent greedy-routing trials; trial k uses derive_seed(seed, k), so
/// the result does not depend on jobs.
RoutingEstimate estimate_routing_time(const LatticePoint& s, const LatticePoint& t,
                                      const LrcDistribution& lambda, const MetricSpace& m,
                                      std::int64_t trials, std::uint64_t seed, int jobs = 1);

}  // namespace swlab
