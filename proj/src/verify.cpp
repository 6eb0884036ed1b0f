#include "tubecantor/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tubecantor/errors.hpp"
#include "tubecantor/parallel.hpp"
#include "tubecantor/rng.hpp"

namespace tubecantor {

bool VerificationReport::all_pass() const {
  for (const CheckResult* c : checks()) {
    if (!c->pass) return false;
  }
  return true;
}

std::vector<const CheckResult*> VerificationReport::checks() const {
  return {&integrity,      &children_per_parent, &nesting,        &eta_separation,
          &thin_tube_max,  &intermediate_law,    &hypothesis_max, &tube_budget};
}

double eta_for(double delta, double s, int d, std::int64_t m) {
  return std::pow(delta, (d - s) / d) * std::pow(static_cast<double>(m), -s / d);
}

namespace {

std::vector<Point> centers_of(const std::vector<Cube>& cubes) {
  std::vector<Point> out;
  out.reserve(cubes.size());
  for (const Cube& c : cubes) out.push_back(c.center);
  return out;
}

std::string describe(const Tube& t) {
  std::ostringstream os;
  os.precision(17);
  os << "anchor (";
  for (std::size_t i = 0; i < t.anchor.size(); ++i) os << (i ? ", " : "") << t.anchor[i];
  os << ") direction (";
  for (std::size_t i = 0; i < t.direction.size(); ++i) os << (i ? ", " : "") << t.direction[i];
  os << ") width " << t.width;
  return os.str();
}

struct Best {
  std::size_t count = 0;
  std::optional<Tube> tube;
};

/// Counts in parallel; ties keep the earliest tube so the witness does not depend on threads.
void count_all(const std::vector<Tube>& tubes, const std::vector<Cube>& cubes, Best& best) {
  std::vector<std::size_t> counts(tubes.size(), 0);
  parallel_for(tubes.size(), [&](std::size_t i) { counts[i] = count_cubes_met(tubes[i], cubes); });
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    if (counts[i] > best.count || !best.tube) {
      best.count = counts[i];
      best.tube = tubes[i];
    }
  }
}

/// Half the tubes are anchored inside a random cube of the family, half anywhere in [0,1]^d.
std::vector<Tube> random_tubes(Rng& rng, const std::vector<Cube>& cubes, int d, double w, std::size_t n) {
  std::vector<Tube> out;
  out.reserve(n);
  const Cube unit = unit_cube(d);
  for (std::size_t i = 0; i < n; ++i) {
    Point a = (i % 2 == 0 && !cubes.empty()) ? rng.point_in(cubes[rng.below(cubes.size())]) : rng.point_in(unit);
    out.push_back(Tube{std::move(a), rng.unit_vector(d), w});
  }
  return out;
}

/// Representatives of width 2τ whose line passes within τ + √d·side/2 of more than `floor`
/// centres, counted exactly.
void count_representatives(double tau, const std::vector<Cube>& cubes, int d, std::size_t floor, Best& best) {
  if (cubes.size() <= floor) return;
  const RepresentativeFamily family(tau, d);
  const std::vector<Point> centers = centers_of(cubes);
  const double reach = family.half_width() + 0.5 * std::sqrt(static_cast<double>(d)) * cubes.front().side;
  for (std::size_t dir : family.dense_directions(centers, floor + 1, reach)) {
    for (const auto& occ : family.occupied_along(dir, centers, floor + 1, reach)) {
      const Tube t = family.tube(occ.index);
      std::size_t met = 0;
      for (std::size_t i : occ.members) met += tube_cube_intersects(t, cubes[i]) ? 1 : 0;
      if (met > best.count) {
        best.count = met;
        best.tube = t;
      }
    }
  }
}

}  // namespace

VerifyInput verify_integrity(const VerifyInput& in, CheckResult& out) {
  out = CheckResult{"integrity", true, 0.0, 0.0, "", std::nullopt};
  VerifyInput clean = in;
  clean.children.clear();
  clean.child_parent.clear();
  std::map<std::pair<std::vector<double>, double>, std::size_t> seen;
  std::size_t duplicates = 0;
  std::ostringstream detail;
  for (std::size_t i = 0; i < in.children.size(); ++i) {
    const Cube& c = in.children[i];
    const auto key = std::make_pair(c.center, c.side);
    if (seen.count(key)) {
      if (duplicates == 0) detail << "cube " << i << " duplicates cube " << seen[key] << "; ";
      ++duplicates;
      continue;
    }
    seen[key] = i;
    clean.children.push_back(c);
    clean.child_parent.push_back(i < in.child_parent.size() ? in.child_parent[i] : in.parents.size());
  }
  out.measured = static_cast<double>(duplicates);
  if (duplicates > 0) out.pass = false;
  if (in.child_parent.size() != in.children.size()) {
    out.pass = false;
    detail << "parent links do not match the cube count; ";
  }
  for (std::size_t i = 0; i < clean.children.size(); ++i) {
    const Cube& c = clean.children[i];
    if (c.dim() != in.d) {
      out.pass = false;
      detail << "cube " << i << " has the wrong dimension; ";
      break;
    }
    if (std::abs(c.side - clean.children.front().side) > 1e-15) {
      out.pass = false;
      detail << "cube " << i << " has a different side; ";
      break;
    }
    if (clean.child_parent[i] >= in.parents.size()) {
      out.pass = false;
      detail << "cube " << i << " links to a missing parent; ";
      break;
    }
  }
  out.detail = detail.str();
  return clean;
}

CheckResult verify_counts(const VerifyInput& in) {
  CheckResult out{"children_per_parent", true, 0.0, 0.0, "", std::nullopt};
  if (in.children.empty()) {
    out.pass = false;
    out.detail = "no children";
    return out;
  }
  const double eps = in.children.front().side;
  const double n_real = std::pow(in.delta / eps, in.s);
  const auto N = static_cast<std::size_t>(std::llround(n_real));
  out.limit = static_cast<double>(N);
  if (std::abs(n_real - static_cast<double>(N)) > 1e-9 * std::max(1.0, n_real) || N == 0) {
    out.pass = false;
    out.detail = "(delta/epsilon)^s = " + std::to_string(n_real) + " is not an integer";
    return out;
  }
  std::vector<std::size_t> counts(in.parents.size(), 0);
  for (std::size_t pid : in.child_parent) {
    if (pid < counts.size()) ++counts[pid];
  }
  std::ostringstream detail;
  std::size_t worst = N;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] != N) {
      if (out.pass) detail << "parent " << j << " holds " << counts[j] << " children, expected " << N << "; ";
      out.pass = false;
      if (std::max(counts[j], N) - std::min(counts[j], N) > std::max(worst, N) - std::min(worst, N)) worst = counts[j];
    }
  }
  const double total_expected = static_cast<double>(N) * std::round(std::pow(in.delta, -in.s));
  if (static_cast<double>(in.children.size()) != total_expected) {
    out.pass = false;
    detail << "total " << in.children.size() << " differs from N*delta^{-s} = " << total_expected << "; ";
  }
  out.measured = static_cast<double>(worst);
  out.detail = detail.str();
  return out;
}

CheckResult verify_nesting(const VerifyInput& in) {
  CheckResult out{"nesting", true, 0.0, 0.0, "", std::nullopt};
  std::size_t broken = 0;
  std::ostringstream detail;
  for (std::size_t i = 0; i < in.children.size(); ++i) {
    const std::size_t pid = in.child_parent[i];
    if (pid >= in.parents.size() || !in.parents[pid].contains(in.children[i])) {
      if (broken == 0) detail << "cube " << i << " is not inside parent " << pid << "; ";
      ++broken;
    }
  }
  out.pass = broken == 0;
  out.measured = static_cast<double>(broken);
  out.detail = detail.str();
  return out;
}

CheckResult verify_eta_cell(const VerifyInput& in) {
  CheckResult out{"eta_separation", true, 0.0, 0.0, "", std::nullopt};
  const double eta = eta_for(in.delta, in.s, in.d, in.m);
  out.limit = 5.0 * in.d * eta;
  const std::size_t n = in.children.size();
  double min_dist = std::numeric_limits<double>::infinity();
  std::pair<std::size_t, std::size_t> closest{0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = distance(in.children[i].center, in.children[j].center);
      if (dist < min_dist) {
        min_dist = dist;
        closest = {i, j};
      }
    }
  }
  out.measured = n >= 2 ? min_dist : 0.0;
  std::ostringstream detail;
  if (n >= 2 && min_dist < out.limit - 1e-12) {
    out.pass = false;
    detail << "cubes " << closest.first << " and " << closest.second << " are " << min_dist << " apart; ";
  }

  // Phase-shifted η-grids.
  const int d = in.d;
  for (std::uint32_t phase = 0; phase < (1u << d) && out.pass; ++phase) {
    std::map<std::vector<std::int64_t>, std::size_t> owner;
    for (std::size_t i = 0; i < n && out.pass; ++i) {
      const Cube& c = in.children[i];
      std::vector<std::int64_t> lo(d), hi(d);
      for (int a = 0; a < d; ++a) {
        const double shift = (phase >> a) & 1u ? 0.5 * eta : 0.0;
        lo[a] = static_cast<std::int64_t>(std::floor((c.lower(a) - shift) / eta - 1e-12));
        hi[a] = static_cast<std::int64_t>(std::floor((c.upper(a) - shift) / eta + 1e-12));
      }
      std::vector<std::int64_t> cell = lo;
      while (true) {
        // A cell only meets the cube if the closed intervals overlap on every axis.
        bool meets = true;
        for (int a = 0; a < d; ++a) {
          const double shift = (phase >> a) & 1u ? 0.5 * eta : 0.0;
          const double cl = shift + cell[a] * eta, cu = cl + eta;
          if (cu < c.lower(a) - kGeomTol || cl > c.upper(a) + kGeomTol) meets = false;
        }
        if (meets) {
          auto [it, fresh] = owner.emplace(cell, i);
          if (!fresh && it->second != i) {
            out.pass = false;
            detail << "an eta-cell (phase " << phase << ") meets cubes " << it->second << " and " << i << "; ";
            break;
          }
        }
        int a = d - 1;
        while (a >= 0 && cell[a] == hi[a]) {
          cell[a] = lo[a];
          --a;
        }
        if (a < 0) break;
        ++cell[a];
      }
    }
  }
  out.detail = detail.str();
  return out;
}

CheckResult verify_thin_tubes(const VerifyInput& in, std::size_t sample_size) {
  CheckResult out{"thin_tube_max", true, 0.0, static_cast<double>(in.k), "", std::nullopt};
  if (in.children.empty()) return out;
  const int d = in.d;
  const double eps = in.children.front().side;
  const double w = 2.0 * eps;
  Best best;

  const std::vector<Point> centers = centers_of(in.children);
  const double inflated = w + std::sqrt(static_cast<double>(d)) * eps;
  const std::vector<Tube> pairs = candidate_worst_tubes(centers, inflated);
  count_all(pairs, in.children, best);

  Rng rng(mix_seed(in.seed, 0x7417));
  if (d == 2) {
    std::vector<Tube> nudged;
    nudged.reserve(4 * pairs.size());
    for (const Tube& t : pairs) {
      for (int rep = 0; rep < 4; ++rep) {
        const double angle = rng.uniform(-1.0, 1.0) * eps;
        const double shift = rng.uniform(-0.5, 0.5) * eps;
        const double c = std::cos(angle), s = std::sin(angle);
        Point u{c * t.direction[0] - s * t.direction[1], s * t.direction[0] + c * t.direction[1]};
        Point a{t.anchor[0] - shift * u[1], t.anchor[1] + shift * u[0]};
        nudged.push_back(Tube{std::move(a), std::move(u), w});
      }
    }
    count_all(nudged, in.children, best);
  }
  count_all(random_tubes(rng, in.children, d, w, sample_size), in.children, best);
  count_representatives(eps, in.children, d, std::max<std::size_t>(best.count, in.k), best);

  out.measured = static_cast<double>(best.count);
  out.witness = best.tube;
  out.pass = best.count <= static_cast<std::size_t>(in.k);
  if (!out.pass && best.tube) out.detail = "tube meeting " + std::to_string(best.count) + " cubes: " + describe(*best.tube);
  return out;
}

std::vector<double> law_widths(double epsilon, double delta) {
  std::vector<double> out;
  for (double w = epsilon; w < delta * (1.0 - 1e-12); w *= 2.0) out.push_back(w);
  out.push_back(delta);
  return out;
}

CheckResult verify_intermediate_tubes(const VerifyInput& in, const std::vector<double>& widths, std::size_t sample_size,
                                      double C_law, std::vector<LawRow>* rows) {
  CheckResult out{"intermediate_law", true, 0.0, C_law, "", std::nullopt};
  if (in.children.empty()) return out;
  const int d = in.d;
  const double eps = in.children.front().side;
  const std::vector<Point> centers = centers_of(in.children);
  Rng rng(mix_seed(in.seed, 0x1a3));
  for (double w : widths) {
    if (w < eps * (1.0 - 1e-12) || w > in.delta * (1.0 + 1e-12)) throw DomainError("law widths must lie in [epsilon, delta]");
    Best best;
    count_all(candidate_worst_tubes(centers, w + std::sqrt(static_cast<double>(d)) * eps), in.children, best);
    count_all(random_tubes(rng, in.children, d, w, sample_size), in.children, best);
    const double constant = static_cast<double>(best.count) / (in.k * std::pow(w / eps, in.s));
    if (rows) rows->push_back(LawRow{w, best.count, constant});
    if (constant > out.measured || !out.witness) {
      out.measured = constant;
      out.witness = best.tube;
    }
  }
  out.pass = out.measured <= C_law;
  if (!out.pass) out.detail = "law constant " + std::to_string(out.measured) + " exceeds " + std::to_string(C_law);
  return out;
}

CheckResult verify_hypothesis(const VerifyInput& in, std::size_t sample_size) {
  CheckResult out{"hypothesis_max", true, 0.0, static_cast<double>(in.k), "", std::nullopt};
  if (in.parents.empty()) return out;
  const int d = in.d;
  const double w = 2.0 * in.delta;
  Best best;
  count_all(candidate_worst_tubes(centers_of(in.parents), w), in.parents, best);
  Rng rng(mix_seed(in.seed, 0x4e7));
  count_all(random_tubes(rng, in.parents, d, w, sample_size), in.parents, best);
  count_representatives(in.delta, in.parents, d, std::max<std::size_t>(best.count, in.k), best);
  if (best.count == 0) best.count = 1;  // one parent always lies in some width-2δ tube
  out.measured = static_cast<double>(best.count);
  out.witness = best.tube;
  out.pass = best.count <= static_cast<std::size_t>(in.k);
  if (!out.pass && best.tube) out.detail = "tube meeting " + std::to_string(best.count) + " parents: " + describe(*best.tube);
  return out;
}

CheckResult verify_tube_budget(const VerifyInput& in) {
  CheckResult out{"tube_budget", true, 0.0, 0.0, "", std::nullopt};
  if (!in.tube_removed || !in.tube_budget) {
    out.detail = "no PRP(ii) accounting recorded";
    return out;
  }
  out.measured = *in.tube_removed;
  out.limit = *in.tube_budget;
  out.pass = *in.tube_removed <= *in.tube_budget + 1e-9;
  if (!out.pass) out.detail = "PRP(ii) removed more points than the budget allows";
  return out;
}

VerificationReport full_report(const VerifyInput& raw, const VerifyOptions& opt) {
  VerificationReport r;
  r.generation = raw.generation;
  r.d = raw.d;
  r.s = raw.s;
  r.k = raw.k;
  r.delta = raw.delta;
  r.m = raw.m;
  r.seed = raw.seed;
  r.eta = eta_for(raw.delta, raw.s, raw.d, raw.m);

  const VerifyInput in = verify_integrity(raw, r.integrity);
  if (!in.children.empty()) {
    r.epsilon = in.children.front().side;
    r.N = static_cast<std::size_t>(std::llround(std::pow(raw.delta / r.epsilon, raw.s)));
  }
  r.children_per_parent = verify_counts(in);
  r.nesting = verify_nesting(in);
  r.eta_separation = verify_eta_cell(in);
  r.thin_tube_max = verify_thin_tubes(in, opt.thin_samples);
  if (!in.children.empty()) {
    r.intermediate_law = verify_intermediate_tubes(in, law_widths(r.epsilon, raw.delta), opt.law_samples, opt.C_law, &r.law_rows);
  } else {
    r.intermediate_law = CheckResult{"intermediate_law", true, 0.0, opt.C_law, "", std::nullopt};
  }
  r.hypothesis_max = verify_hypothesis(in, opt.hypothesis_samples);
  r.tube_budget = verify_tube_budget(in);
  r.caveat = raw.d == 2 ? "pair tubes at inflated width bound the maximum; perturbed pair tubes audited"
                        : "pair tubes at inflated width are not proven to bound the maximum for d >= 3";
  return r;
}

}  // namespace tubecantor
