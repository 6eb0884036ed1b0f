#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tubecantor/errors.hpp"
#include "tubecantor/geometry.hpp"

using namespace tubecantor;

namespace {

Tube horizontal(double y, double width) { return Tube{{0.0, y}, {1.0, 0.0}, width}; }

Tube random_tube(std::mt19937_64& g, int d, double width) {
  return Tube{oracle::random_point(g, d), oracle::random_unit(g, d), width};
}

}  // namespace

TEST(Distance, TrivialCases) {
  EXPECT_DOUBLE_EQ(distance_point_to_line(Point{0.0, 0.0}, Tube{{0.0, 0.0}, {0.6, 0.8}, 1.0}), 0.0);
  EXPECT_NEAR(distance_point_to_line(Point{5.0, 0.3}, horizontal(0.0, 1.0)), 0.3, 1e-15);
}

TEST(Distance, AgreesWithDenseLineSampling) {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    const Tube t = random_tube(g, d, 0.1);
    const Point p = oracle::random_point(g, d);
    EXPECT_NEAR(distance_point_to_line(p, t), oracle::sampled_point_line_distance(p, t, 4.0), 1e-6);
  }
}

TEST(Distance, IndependentOfAnchorShift) {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 100; ++trial) {
    Tube t = random_tube(g, 3, 0.1);
    const Point p = oracle::random_point(g, 3);
    const double before = distance_point_to_line(p, t);
    t.anchor = oracle::line_point(t, 3.7);
    EXPECT_NEAR(distance_point_to_line(p, t), before, 1e-12);
  }
}

TEST(PointInTube, ClosedConvention) {
  EXPECT_TRUE(point_in_tube(Point{7.0, 0.09}, horizontal(0.0, 0.2)));
  EXPECT_FALSE(point_in_tube(Point{7.0, 0.11}, horizontal(0.0, 0.2)));
  EXPECT_TRUE(point_in_tube(Point{7.0, 0.1}, horizontal(0.0, 0.2)));
  EXPECT_TRUE(point_in_tube(Point{-3.0, -0.1}, horizontal(0.0, 0.2)));
}

TEST(Tube, InvalidDirectionRejected) {
  EXPECT_THROW(require_valid(Tube{{0.0, 0.0}, {1.0, 1.0}, 0.1}), ContractViolation);
  EXPECT_THROW(require_valid(Tube{{0.0, 0.0}, {1.0, 0.0}, 0.0}), ContractViolation);
  EXPECT_THROW(require_valid(Tube{{0.0, 0.0, 0.0}, {1.0, 0.0}, 0.1}), ContractViolation);
}

TEST(ScaleTube, Identity) {
  const Tube t{{0.2, 0.3}, {0.6, 0.8}, 0.1};
  const Tube u = scale_tube(t, 1.0);
  EXPECT_EQ(u.anchor, t.anchor);
  EXPECT_EQ(u.direction, t.direction);
  EXPECT_EQ(u.width, t.width);
}

TEST(ScaleTube, DoublesWidth) { EXPECT_DOUBLE_EQ(scale_tube(horizontal(0.0, 0.1), 2.0).width, 0.2); }

TEST(ScaleTube, Composition) {
  const Tube t{{0.2, 0.3}, {0.6, 0.8}, 0.1};
  for (double a : {0.5, 2.0, 3.0}) {
    for (double b : {0.5, 2.0, 3.0}) {
      EXPECT_NEAR(scale_tube(scale_tube(t, a), b).width, scale_tube(t, a * b).width, 1e-15);
    }
  }
}

TEST(TubeCube, TrivialCases) {
  const Cube unit = unit_cube(2);
  EXPECT_TRUE(tube_cube_intersects(horizontal(0.5, 1e-9), unit));
  EXPECT_FALSE(tube_cube_intersects(horizontal(2.0, 0.5), unit));
  EXPECT_NEAR(line_cube_distance(horizontal(2.0, 0.5), unit), 1.0, 1e-15);
  EXPECT_TRUE(tube_cube_intersects(horizontal(2.0, 2.0), unit));  // gap exactly w/2
}

TEST(TubeCube, LineDistanceMatchesTernarySearch) {
  std::mt19937_64 g(13);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 3;
    const Tube t{oracle::random_point(g, d, -1.0, 2.0), oracle::random_unit(g, d), 0.1};
    const Cube c{oracle::random_point(g, d), std::uniform_real_distribution<double>(0.01, 0.5)(g)};
    EXPECT_NEAR(line_cube_distance(t, c), oracle::ternary_line_cube_distance(t, c), 1e-9);
  }
}

// Membership oracle: rejection sampling of cube points tested with point_in_tube. Cases within
// 0.01 of tangency are skipped since a finite sample cannot settle them.
TEST(TubeCube, AgreesWithMonteCarloMembership) {
  std::mt19937_64 g(14);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + trial % 2;
    const Tube t{oracle::random_point(g, d, -0.5, 1.5), oracle::random_unit(g, d),
                 std::uniform_real_distribution<double>(0.05, 0.6)(g)};
    const Cube c{oracle::random_point(g, d), 0.3};
    const double gap = oracle::ternary_line_cube_distance(t, c) - 0.5 * t.width;
    if (std::abs(gap) < 0.01) continue;
    bool hit = false;
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    for (int i = 0; i < 100000 && !hit; ++i) {
      Point p(d);
      for (int a = 0; a < d; ++a) p[a] = c.center[a] + U(g) * c.side;
      hit = point_in_tube(p, t);
    }
    EXPECT_EQ(tube_cube_intersects(t, c), hit) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 900);
}

TEST(Subdivide, Identity) {
  const Cube r{{0.3, 0.4}, 0.2};
  const auto cells = subdivide_cube(r, 1);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0], r);
}

TEST(Subdivide, UnitSquareInFour) {
  const auto cells = subdivide_cube(unit_cube(2), 2);
  ASSERT_EQ(cells.size(), 4u);
  std::set<std::pair<double, double>> centres;
  for (const Cube& c : cells) {
    EXPECT_DOUBLE_EQ(c.side, 0.5);
    centres.insert({c.center[0], c.center[1]});
  }
  EXPECT_EQ(centres, (std::set<std::pair<double, double>>{{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}}));
}

TEST(Subdivide, Partition) {
  for (int d : {2, 3}) {
    const Cube r{Point(d, 0.4), 0.6};
    for (int g : {2, 3, 5}) {
      const auto cells = subdivide_cube(r, g);
      ASSERT_EQ(cells.size(), static_cast<std::size_t>(std::pow(g, d)));
      double vol = 0.0;
      for (const Cube& c : cells) {
        vol += std::pow(c.side, d);
        EXPECT_TRUE(r.contains(c));
      }
      EXPECT_NEAR(vol, std::pow(r.side, d), 1e-12);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = i + 1; j < cells.size(); ++j) EXPECT_FALSE(cells[i].interiors_overlap(cells[j]));
      }
    }
  }
}

TEST(CandidateTubes, Counts) {
  EXPECT_EQ(candidate_worst_tubes(std::vector<Point>{{0.1, 0.1}, {0.5, 0.9}}, 0.1).size(), 1u);
  EXPECT_EQ(candidate_worst_tubes(std::vector<Point>{{0.1, 0.1}, {0.5, 0.9}, {0.9, 0.2}}, 0.1).size(), 3u);
  // Collinear triple shares one line.
  EXPECT_EQ(candidate_worst_tubes(std::vector<Point>{{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}}, 0.1).size(), 1u);
  std::mt19937_64 g(15);
  for (std::size_t n : {4u, 7u, 12u}) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(oracle::random_point(g, 3));
    const auto tubes = candidate_worst_tubes(pts, 0.05);
    EXPECT_LE(tubes.size(), n * (n - 1) / 2);
    for (const Tube& t : tubes) {
      std::size_t on_axis = 0;
      for (const Point& p : pts) on_axis += oracle::point_line_distance(p, t) < 1e-9;
      EXPECT_GE(on_axis, 2u);
    }
  }
}

TEST(Representatives, DomainChecked) {
  EXPECT_THROW(representative_tubes(0.0, 2), DomainError);
  EXPECT_THROW(representative_tubes(1.5, 2), DomainError);
}

TEST(Representatives, UnitWidthHasMemberContainingSquare) {
  const auto fam = representative_tubes(1.0, 2);
  bool found = false;
  for (const Tube& t : fam.tubes()) {
    double worst = 0.0;
    for (Point v : {Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{1, 1}}) worst = std::max(worst, oracle::point_line_distance(v, t));
    found = found || worst <= 0.5 * t.width;
  }
  EXPECT_TRUE(found);
}

TEST(Representatives, SizeAndCoverageAudit) {
  const double tau = 0.125;
  const auto fam = representative_tubes(tau, 2);
  EXPECT_NEAR(fam.size_constant() * std::pow(tau, -2.0), static_cast<double>(fam.size()), 1e-6);
  for (const Tube& t : fam.tubes()) EXPECT_NEAR(t.width, 2.0 * tau, 1e-15);

  std::mt19937_64 g(16);
  int audited = 0, failures = 0;
  while (audited < 10000) {
    const Tube t{oracle::random_point(g, 2, -0.3, 1.3), oracle::random_unit(g, 2), tau};
    if (oracle::clip_square_by_strip(t).empty()) continue;
    ++audited;
    const auto idx = fam.covering_index(t);
    if (!idx) {
      ++failures;
      continue;
    }
    const Tube rep = fam.tube(*idx);
    if (oracle::clip_excess_2d(t, rep) > 0.5 * rep.width + 1e-12) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(Representatives, CoverageAuditThreeDimensions) {
  const double tau = 0.5;
  const auto fam = representative_tubes(tau, 3);
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int failures = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Tube t{oracle::random_point(g, 3), oracle::random_unit(g, 3), tau};
    const auto idx = fam.covering_index(t);
    if (!idx) {
      ++failures;
      continue;
    }
    const Tube rep = fam.tube(*idx);
    // Points of the clip: random cube points that fall in t.
    for (int i = 0; i < 2000; ++i) {
      const Point p = {U(g), U(g), U(g)};
      if (oracle::point_line_distance(p, t) <= 0.5 * tau && oracle::point_line_distance(p, rep) > 0.5 * rep.width + 1e-12) {
        ++failures;
        break;
      }
    }
  }
  EXPECT_EQ(failures, 0);
}

TEST(Representatives, GrowthRateWhenHalvingTau) {
  for (double tau : {0.5, 0.25, 0.125, 0.0625}) {
    const double big = static_cast<double>(representative_tubes(tau, 2).size());
    const double small = static_cast<double>(representative_tubes(tau / 2, 2).size());
    EXPECT_LE(small, 8.0 * big) << "tau " << tau;
  }
}

// Brute force over every member: each member holding ≥ q points must be reported.
TEST(Representatives, OccupiedMatchesBruteForce) {
  std::mt19937_64 g(18);
  for (int d : {2, 3}) {
    const double tau = d == 2 ? 0.05 : 0.3;
    const RepresentativeFamily fam(tau, d);
    std::vector<Point> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(oracle::random_point(g, d));
    for (int i = 0; i < 6; ++i) pts.push_back(Point(d, 0.1 + 0.15 * i));  // a diagonal row
    const std::size_t q = 5;
    const auto occ = fam.occupied(pts, q, fam.half_width());
    std::size_t pos = 0;
    for (std::size_t idx = 0; idx < fam.size(); ++idx) {
      const Tube t = fam.tube(idx);
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (oracle::point_line_distance(pts[i], t) <= fam.half_width() + 1e-12) members.push_back(i);
      }
      if (members.size() < q) continue;
      ASSERT_LT(pos, occ.size()) << "missing member " << idx;
      EXPECT_EQ(occ[pos].index, idx);
      EXPECT_EQ(occ[pos].members, members);
      ++pos;
    }
    EXPECT_EQ(pos, occ.size());
  }
}

TEST(Representatives, DenseDirectionsContainEveryOccupiedDirection) {
  std::mt19937_64 g(19);
  const RepresentativeFamily fam(0.02, 2, 0.125);
  std::vector<Point> pts;
  for (int i = 0; i < 150; ++i) pts.push_back(oracle::random_point(g, 2));
  for (int i = 0; i < 8; ++i) pts.push_back({0.2 + 0.07 * i, 0.3 + 0.02 * i});
  for (std::size_t q : {3u, 4u, 6u}) {
    const auto dense = fam.dense_directions(pts, q, fam.half_width());
    const std::set<std::size_t> dense_set(dense.begin(), dense.end());
    for (std::size_t dir = 0; dir < fam.direction_count(); ++dir) {
      if (!fam.occupied_along(dir, pts, q, fam.half_width()).empty()) {
        EXPECT_TRUE(dense_set.count(dir)) << "direction " << dir << " q " << q;
      }
    }
  }
}

TEST(CellsWithinReach, TouchingCellsCount) {
  EXPECT_EQ(cells_within_reach(2, 1.0, 0.5), 9u);
  EXPECT_EQ(cells_within_reach(3, 1.0, 0.5), 27u);
  EXPECT_EQ(cells_within_reach(2, 1.0, 1.5), 25u);  // diagonal gap √2 < 1.5
  EXPECT_EQ(cells_within_reach(2, 1.0, 1.0), 21u);  // gap exactly 1 counts, √2 does not
}
