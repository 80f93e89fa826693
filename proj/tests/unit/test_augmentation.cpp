#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "swlab/augmentation.hpp"
#include "swlab/stats.hpp"

using namespace swlab;

TEST_SUITE("augmentation") {

TEST_CASE("table construction") {
  const std::vector<std::pair<Coord, double>> one{{5, 1.0}};
  const auto a = lrc_from_table(one);
  CHECK(a.support() == std::vector<Coord>{5});
  CHECK(a.exact_mass(5) == 1);

  const std::vector<std::pair<Coord, double>> two{{1, 1}, {2, 1}};
  const auto b = lrc_from_table(two);
  CHECK(b.exact_mass(1) == Rational(1, 2));
  CHECK(b.mass(2) == 0.5);

  const std::vector<std::pair<Coord, double>> dup{{3, 2}, {3, 2}};
  const auto c = lrc_from_table(dup);
  CHECK(c.support() == std::vector<Coord>{3});
  CHECK(c.exact_mass(3) == 1);

  const std::vector<std::pair<Coord, double>> zero_radius{{0, 1}, {2, 1}};
  CHECK_THROWS_AS(lrc_from_table(zero_radius), std::invalid_argument);
  CHECK_THROWS_AS(lrc_from_table({}), std::invalid_argument);
  const std::vector<std::pair<Coord, double>> all_zero{{1, 0}};
  CHECK_THROWS_AS(lrc_from_table(all_zero), std::invalid_argument);
  const std::vector<std::pair<Coord, double>> negative{{1, 1}, {2, -0.5}};
  CHECK_THROWS_AS(lrc_from_table(negative), std::invalid_argument);
  CHECK_THROWS_AS(LrcDistribution::point_mass(0), std::invalid_argument);
}

TEST_CASE("node power laws") {
  const auto flat = lrc_node_power(2, 0, 2);
  CHECK(flat.exact_mass(1) == Rational(1, 3));
  CHECK(flat.exact_mass(2) == Rational(2, 3));

  const auto sq = lrc_node_power(2, 2, 2);
  CHECK(sq.exact_mass(1) == Rational(2, 3));
  CHECK(sq.exact_mass(2) == Rational(1, 3));

  const auto line = lrc_node_power(1, 1, 3);
  // (2, 1, 2/3) normalised by 11/3.
  CHECK(line.exact_mass(1) == Rational(6, 11));
  CHECK(line.exact_mass(2) == Rational(3, 11));
  CHECK(line.exact_mass(3) == Rational(2, 11));

  // Each node at distance r carries weight proportional to r^-alpha.
  const auto law = lrc_node_power(3, 3, 40);
  for (Coord r = 1; r <= 40; ++r) {
    const Rational per_node = law.exact_mass(r) / to_rational(sphere_size(3, r));
    CHECK(per_node * Rational(r * r * r) == law.exact_mass(1) / 6);
  }
  CHECK(law.descriptor().find("node-power") == 0);

  Rational total = 0;
  for (const auto& m : law.exact_masses()) total += m;
  CHECK(total == 1);
}

TEST_CASE("table files") {
  std::istringstream ok("# radius weight\n1 0.25\n\n4 0.75  # tail\n");
  const auto l = parse_lrc_table(ok);
  CHECK(l.support() == std::vector<Coord>{1, 4});
  CHECK(l.mass(4) == doctest::Approx(0.75));

  std::istringstream bad("1 0.5\nfoo bar\n");
  try {
    parse_lrc_table(bad);
    FAIL("malformed table accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream extra("1 0.5 7\n");
  CHECK_THROWS_AS(parse_lrc_table(extra), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(parse_lrc_table(empty), std::invalid_argument);
  CHECK_THROWS_AS(load_lrc_table("/nonexistent/lambda.txt"), std::invalid_argument);
}

TEST_CASE("torus support limit") {
  const auto l = lrc_node_power(2, 2, 4);
  CHECK_NOTHROW(require_compatible(l, MetricSpace::torus(2, 9)));
  CHECK_THROWS_AS(require_compatible(l, MetricSpace::torus(2, 8)), std::invalid_argument);
  Rng rng(1);
  CHECK_THROWS_AS(sample_contact({0, 0}, l, MetricSpace::torus(2, 8), rng), std::invalid_argument);
}

TEST_CASE("one-dimensional unit contact is a fair coin") {
  Rng rng(7);
  const auto l = LrcDistribution::point_mass(1);
  int plus = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto v = sample_contact({0}, l, MetricSpace::infinite_grid(1), rng);
    REQUIRE(v.has_value());
    REQUIRE(((*v)[0] == 1 || (*v)[0] == -1));
    plus += (*v)[0] == 1;
  }
  const std::vector<std::uint64_t> counts{static_cast<std::uint64_t>(plus), static_cast<std::uint64_t>(n - plus)};
  CHECK(chi_square_uniform_statistic(counts) <= chi_square_critical(1, 0.001));
}

TEST_CASE("contact marginals are uniform per node") {
  Rng rng(11);
  const auto l = LrcDistribution::point_mass(2);
  const auto pts = oracle::sphere_points({0, 0}, 2);
  std::map<oracle::Point, std::size_t> index;
  for (std::size_t k = 0; k < pts.size(); ++k) index[pts[k]] = k;
  std::vector<std::uint64_t> counts(pts.size(), 0);
  for (int k = 0; k < 1000000; ++k) {
    const auto v = *sample_contact({0, 0}, l, MetricSpace::infinite_grid(2), rng);
    ++counts[index.at({v[0], v[1]})];
  }
  CHECK(chi_square_uniform_statistic(counts) <= chi_square_critical(7, 0.01));
}

TEST_CASE("radius frequencies follow the law") {
  Rng rng(3);
  const auto l = lrc_node_power(2, 2, 6);
  std::vector<double> observed(7, 0);
  const int n = 200000;
  for (int k = 0; k < n; ++k) observed[static_cast<std::size_t>(l.sample_radius(rng))] += 1;
  double stat = 0;
  for (Coord r = 1; r <= 6; ++r) {
    const double e = l.mass(r) * n;
    stat += (observed[static_cast<std::size_t>(r)] - e) * (observed[static_cast<std::size_t>(r)] - e) / e;
  }
  CHECK(stat <= chi_square_critical(5, 0.001));
}

TEST_CASE("isotropy over orbits of the sphere") {
  // D=3, r=3: orbit of (1,1,1) (8 points) against the orbit of (3,0,0) (6 points)
  // and of (2,1,0) (24 points); each point should be equally likely.
  Rng rng(5);
  const auto l = LrcDistribution::point_mass(3);
  std::map<oracle::Point, std::uint64_t> hits;
  const int n = 380000;
  for (int k = 0; k < n; ++k) {
    const auto v = *sample_contact({0, 0, 0}, l, MetricSpace::infinite_grid(3), rng);
    ++hits[{v[0], v[1], v[2]}];
  }
  CHECK(hits.size() == 38);
  std::map<oracle::Point, std::vector<std::uint64_t>> orbits;
  for (const auto& [p, c] : hits) {
    oracle::Point key{std::llabs(p[0]), std::llabs(p[1]), std::llabs(p[2])};
    std::sort(key.begin(), key.end());
    orbits[key].push_back(c);
  }
  CHECK(orbits.size() == 3);
  for (const auto& [key, counts] : orbits) {
    CHECK(chi_square_uniform_statistic(counts) <= chi_square_critical(static_cast<double>(counts.size() - 1), 0.001));
  }
}

TEST_CASE("finite grid contacts stay inside") {
  Rng rng(17);
  const auto m = MetricSpace::finite_grid(2, 5);
  const auto l = LrcDistribution::point_mass(7);
  int none = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto v = sample_contact({0, 0}, l, m, rng);
    if (!v) {
      ++none;
      continue;
    }
    CHECK(m.contains(*v));
    CHECK(manhattan_norm(*v) == 7);
  }
  CHECK(none == 0);
  // No point of the 5x5 grid lies at distance 9 from the centre.
  CHECK_FALSE(sample_contact({2, 2}, LrcDistribution::point_mass(9), m, rng).has_value());
}

TEST_CASE("finite grid contacts are uniform over the clipped sphere") {
  Rng rng(23);
  const auto m = MetricSpace::finite_grid(2, 4);
  const auto l = LrcDistribution::point_mass(3);
  std::map<std::pair<Coord, Coord>, std::uint64_t> hits;
  for (int k = 0; k < 60000; ++k) {
    const auto v = *sample_contact({1, 0}, l, m, rng);
    ++hits[{v[0], v[1]}];
  }
  std::size_t expect = 0;
  for (const auto& p : oracle::sphere_points({1, 0}, 3)) expect += (p[0] >= 0 && p[0] < 4 && p[1] >= 0 && p[1] < 4);
  CHECK(hits.size() == expect);
  std::vector<std::uint64_t> counts;
  for (const auto& [p, c] : hits) counts.push_back(c);
  CHECK(chi_square_uniform_statistic(counts) <= chi_square_critical(static_cast<double>(counts.size() - 1), 0.001));
}

TEST_CASE("torus contacts wrap") {
  Rng rng(29);
  const auto m = MetricSpace::torus(2, 9);
  const auto l = LrcDistribution::point_mass(4);
  for (int k = 0; k < 1000; ++k) {
    const auto v = *sample_contact({0, 8}, l, m, rng);
    CHECK(m.contains(v));
    CHECK(distance({0, 8}, v, m) == 4);
  }
}

}  // TEST_SUITE
