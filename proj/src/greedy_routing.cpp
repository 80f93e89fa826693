#include "swlab/greedy_routing.hpp"

#include <stdexcept>
#include <unordered_map>

#include "parallel.hpp"
#include "swlab/stats.hpp"

namespace swlab {

namespace {

template <class ContactFn>
RouteResult route(const LatticePoint& s, const LatticePoint& t, const MetricSpace& m,
                  ContactFn&& contact_of, bool record_path) {
  m.require_contains(s);
  m.require_contains(t);
  RouteResult result;
  if (record_path) result.path.emplace().push_back(s);
  LatticePoint cur = s;
  Coord dc = distance(cur, t, m);
  std::unordered_map<LatticePoint, std::optional<LatticePoint>, LatticePointHash> seen;
  while (dc > 0) {
    auto [slot, fresh] = seen.try_emplace(cur);
    if (!fresh) throw std::logic_error("greedy routing revisited " + to_string(cur));
    slot->second = contact_of(cur);
    const auto& lrc = slot->second;

    std::optional<LatticePoint> next;
    Coord next_dist = dc;
    if (lrc) {
      const Coord dl = distance(*lrc, t, m);
      // A local step reaches dc - 1, so the contact wins every tie it can win.
      if (dl < dc) {
        next = *lrc;
        next_dist = dl;
        ++result.lrc_uses;
      }
    }
    for (int k = 0; k < m.dim() && !next; ++k) {
      for (Coord dir : {Coord{-1}, Coord{1}}) {
        LatticePoint cand = cur;
        cand[k] += dir;
        if (m.kind() == MetricKind::kTorus) {
          cand = m.wrap(cand);
        } else if (!m.contains(cand)) {
          continue;
        }
        const Coord dn = distance(cand, t, m);
        if (dn == dc - 1) {
          next = std::move(cand);
          next_dist = dn;
          break;
        }
      }
    }
    if (!next || next_dist >= dc) {
      throw std::logic_error("greedy routing made no progress at " + to_string(cur));
    }
    cur = std::move(*next);
    dc = next_dist;
    ++result.hops;
    if (record_path) result.path->push_back(cur);
  }
  return result;
}

}  // namespace

ContactOracle::ContactOracle(const LrcDistribution& lambda, const MetricSpace& m,
                             std::uint64_t trial_key)
    : lambda_(&lambda), metric_(m), key_(trial_key) {
  require_compatible(lambda, m);
}

std::optional<LatticePoint> ContactOracle::contact(const LatticePoint& x) const {
  Rng rng(derive_seed(key_, LatticePointHash{}(x)));
  return sample_contact(x, *lambda_, metric_, rng);
}

RouteResult greedy_route_keyed(const LatticePoint& s, const LatticePoint& t,
                               const LrcDistribution& lambda, const MetricSpace& m,
                               std::uint64_t trial_key, bool record_path) {
  ContactOracle oracle(lambda, m, trial_key);
  return route(s, t, m, [&](const LatticePoint& x) { return oracle.contact(x); }, record_path);
}

RouteResult greedy_route(const LatticePoint& s, const LatticePoint& t,
                         const LrcDistribution& lambda, const MetricSpace& m, Rng& rng,
                         bool record_path) {
  return greedy_route_keyed(s, t, lambda, m, rng(), record_path);
}

ContactTable::ContactTable(const LrcDistribution& lambda, const MetricSpace& m,
                           std::uint64_t trial_key)
    : metric_(m) {
  if (!m.finite()) throw std::invalid_argument("contact table needs a finite metric space");
  ContactOracle oracle(lambda, m, trial_key);
  std::size_t total = 1;
  for (int k = 0; k < m.dim(); ++k) total *= static_cast<std::size_t>(m.side());
  contacts_.reserve(total);
  LatticePoint x = LatticePoint::origin(m.dim());
  for (std::size_t idx = 0; idx < total; ++idx) {
    contacts_.push_back(oracle.contact(x));
    for (int k = m.dim() - 1; k >= 0; --k) {
      if (++x[k] < m.side()) break;
      x[k] = 0;
    }
  }
}

std::size_t ContactTable::index_of(const LatticePoint& x) const {
  metric_.require_contains(x);
  std::size_t idx = 0;
  for (int k = 0; k < metric_.dim(); ++k) {
    idx = idx * static_cast<std::size_t>(metric_.side()) + static_cast<std::size_t>(x[k]);
  }
  return idx;
}

const std::optional<LatticePoint>& ContactTable::contact(const LatticePoint& x) const {
  return contacts_[index_of(x)];
}

RouteResult greedy_route_eager(const LatticePoint& s, const LatticePoint& t,
                               const ContactTable& contacts, bool record_path) {
  return route(s, t, contacts.metric(),
               [&](const LatticePoint& x) { return contacts.contact(x); }, record_path);
}

RoutingEstimate estimate_routing_time(const LatticePoint& s, const LatticePoint& t,
                                      const LrcDistribution& lambda, const MetricSpace& m,
                                      std::int64_t trials, std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  require_compatible(lambda, m);
  RoutingEstimate est;
  est.trials = trials;
  est.initial_distance = distance(s, t, m);
  est.hops.assign(static_cast<std::size_t>(trials), 0);
  std::vector<std::int64_t> lrc(static_cast<std::size_t>(trials), 0);
  detail::parallel_for(trials, jobs, [&](std::int64_t k) {
    const RouteResult r = greedy_route_keyed(s, t, lambda, m, derive_seed(seed, static_cast<std::uint64_t>(k)));
    if (r.hops > est.initial_distance) throw std::logic_error("greedy route longer than distance");
    est.hops[static_cast<std::size_t>(k)] = r.hops;
    lrc[static_cast<std::size_t>(k)] = r.lrc_uses;
  });
  RunningStats hops_stats;
  RunningStats lrc_stats;
  for (std::int64_t k = 0; k < trials; ++k) {
    const auto h = est.hops[static_cast<std::size_t>(k)];
    hops_stats.add(static_cast<double>(h));
    lrc_stats.add(static_cast<double>(lrc[static_cast<std::size_t>(k)]));
    ++est.histogram[h];
    est.max_hops = std::max(est.max_hops, h);
  }
  est.mean = hops_stats.mean();
  est.stderr_of_mean = hops_stats.stderr_of_mean();
  est.mean_lrc_uses = lrc_stats.mean();
  return est;
}

}  // namespace swlab
