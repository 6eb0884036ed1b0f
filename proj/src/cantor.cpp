#include "tubecantor/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tubecantor/analysis.hpp"
#include "tubecantor/errors.hpp"
#include "tubecantor/rng.hpp"

namespace tubecantor {

void validate(const CantorSchedule& sc) {
  if (sc.d < 2) throw DomainError("dimension d must be at least 2");
  if (!(sc.s > 0.0) || !(sc.s < sc.d - 1)) throw DomainError("s must satisfy 0 < s < d-1");
  if (sc.n_generations < 1) throw DomainError("at least one generation is required");
  if (!sc.m_schedule.empty() && sc.m_schedule.size() != static_cast<std::size_t>(sc.n_generations)) {
    throw DomainError("m schedule length must match the generation count");
  }
  for (std::int64_t m : sc.m_schedule) {
    if (m < 1) throw DomainError("m must be positive");
  }
  if (!(sc.C_abs > 0.0)) throw DomainError("C_abs must be positive");
}

int effective_k(const CantorSchedule& sc) { return sc.k > 0 ? sc.k : select_k(sc.d, sc.s); }

const std::vector<Cube>& CantorSet::cubes(std::size_t n) const {
  if (n == 0) return root;
  if (n > generations.size()) throw DomainError("generation index beyond the built depth");
  return generations[n - 1].children;
}

const std::vector<std::size_t>& CantorSet::parents(std::size_t n) const {
  if (n == 0 || n > generations.size()) throw DomainError("generation index has no parents");
  return generations[n - 1].child_parent;
}

std::int64_t schedule_m(const CantorSchedule& sc, std::size_t n, double delta) {
  if (!sc.m_schedule.empty()) return sc.m_schedule.at(n);
  BoundInputs in;
  in.d = sc.d;
  in.s = sc.s;
  in.k = effective_k(sc);
  in.delta = delta;
  in.C_abs = sc.C_abs;
  return choose_m(in);
}

ConstructionParams generation_params(const CantorSchedule& sc, std::size_t n, double delta) {
  ConstructionParams p;
  p.d = sc.d;
  p.s = sc.s;
  p.delta = delta;
  p.k = effective_k(sc);
  p.A = sc.A;
  p.seed = mix_seed(sc.seed, n);
  p.max_retries = sc.max_retries;
  p.margin = sc.margin;
  p.m = schedule_m(sc, n, delta);
  return p;
}

CantorSet build_cantor(const CantorSchedule& sc) {
  validate(sc);
  CantorSet cs;
  cs.d = sc.d;
  cs.s = sc.s;
  cs.root = {unit_cube(sc.d)};
  cs.side_lengths = {1.0};
  for (int n = 0; n < sc.n_generations; ++n) {
    const auto gen = static_cast<std::size_t>(n);
    ParentFamily parents{cs.cubes(gen), cs.side_lengths.back()};
    const ConstructionParams p = generation_params(sc, gen, parents.delta);
    try {
      validate_parent_family(parents, p);
    } catch (const DomainError& e) {
      throw ConstructionFailed("generation " + std::to_string(n + 1) + ": parent hypothesis broken: " + e.what(),
                               {{"hypothesis", 1}}, n + 1);
    }
    try {
      cs.generations.push_back(build_generation(p, parents));
    } catch (const ConstructionFailed& e) {
      throw ConstructionFailed("generation " + std::to_string(n + 1) + ": " + e.what(), e.failures(), n + 1);
    }
    cs.side_lengths.push_back(cs.generations.back().epsilon);
  }
  return cs;
}

double mass_check(const CantorSet& cs, std::size_t n) {
  if (n >= cs.depth()) throw DomainError("mass_check needs generation n+1");
  const auto& parents = cs.cubes(n);
  const auto& children = cs.cubes(n + 1);
  const auto& link = cs.parents(n + 1);
  std::vector<double> sums(parents.size(), 0.0);
  for (std::size_t i = 0; i < children.size(); ++i) sums[link[i]] += std::pow(children[i].diameter(), cs.s);
  double worst = 0.0;
  for (std::size_t j = 0; j < parents.size(); ++j) {
    worst = std::max(worst, std::abs(sums[j] / std::pow(parents[j].diameter(), cs.s) - 1.0));
  }
  return worst;
}

std::size_t count_cubes_meeting_tube(const CantorSet& cs, std::size_t n, const Tube& t) {
  return count_cubes_met(t, cs.cubes(n));
}

ContentEstimate tube_content_estimate(const CantorSet& cs, const Tube& t) {
  require_valid(t);
  ContentEstimate out;
  if (t.width >= 1.0) {
    out.value = 1.0;
    out.trivial = true;
    return out;
  }
  std::size_t n = 1;
  while (n < cs.depth() && !(cs.side_lengths[n] < t.width)) ++n;
  if (!(cs.side_lengths[n] < t.width)) out.extrapolated = true;
  out.generation = n;
  out.count = count_cubes_meeting_tube(cs, n, t);
  out.value = static_cast<double>(out.count) *
              std::pow(std::sqrt(static_cast<double>(cs.d)) * cs.side_lengths[n], cs.s);
  return out;
}

double ball_ratio(const CantorSet& cs, std::size_t n, const Point& centre, double diameter) {
  if (n > cs.depth()) throw DomainError("generation index beyond the built depth");
  if (!(diameter > 0.0)) throw DomainError("ball diameter must be positive");
  const double radius = 0.5 * diameter;
  double mass = 0.0;
  for (const Cube& q : cs.cubes(n)) {
    double d2 = 0.0;
    for (int a = 0; a < cs.d; ++a) {
      const double gap = std::max({0.0, q.lower(a) - centre[a], centre[a] - q.upper(a)});
      d2 += gap * gap;
    }
    if (std::sqrt(d2) <= radius + kGeomTol) mass += std::pow(q.diameter(), cs.s);
  }
  return mass / std::pow(diameter, cs.s);
}

double ball_property_check(const CantorSet& cs, std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (n > cs.depth()) throw DomainError("generation index beyond the built depth");
  const auto& cubes = cs.cubes(n);
  const double lo = std::log(cs.side_lengths[n]);
  const double hi = std::log(std::sqrt(static_cast<double>(cs.d)));
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Cube& host = cubes[rng.below(cubes.size())];
    const Point c = rng.point_in(host);
    const double diam = std::exp(rng.uniform(lo, hi));
    worst = std::max(worst, ball_ratio(cs, n, c, diam));
  }
  return worst;
}

std::vector<Tube> sweep_tubes(const CantorSet& cs, std::size_t count, double w_min, double w_max, std::uint64_t seed) {
  if (!(w_min > 0.0) || w_max < w_min) throw DomainError("sweep widths need 0 < w_min <= w_max");
  const auto& deepest = cs.cubes(cs.depth());
  const Cube box = unit_cube(cs.d);
  Rng rng(seed);
  std::vector<Tube> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Tube t;
    t.width = std::exp(rng.uniform(std::log(w_min), std::log(w_max)));
    t.direction = rng.unit_vector(cs.d);
    t.anchor = (i % 2 == 0 && !deepest.empty()) ? rng.point_in(deepest[rng.below(deepest.size())]) : rng.point_in(box);
    out.push_back(std::move(t));
  }
  return out;
}

double box_dimension_estimate(const CantorSet& cs) {
  if (cs.depth() < 2) throw DomainError("box dimension estimate needs at least two generations");
  std::vector<double> x, y;
  for (std::size_t n = 1; n <= cs.depth(); ++n) {
    x.push_back(std::log(1.0 / cs.side_lengths[n]));
    y.push_back(std::log(static_cast<double>(cs.cubes(n).size())));
  }
  const double count = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / count;
    my += y[i] / count;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) throw DomainError("generations share one side length");
  return sxy / sxx;
}

}  // namespace tubecantor
