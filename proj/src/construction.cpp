#include "tubecantor/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tubecantor/errors.hpp"
#include "tubecantor/rng.hpp"

namespace tubecantor {

std::int64_t ceil_count(double x) { return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)))); }

bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

void validate(const ConstructionParams& p) {
  if (p.d < 2) throw DomainError("dimension d must be at least 2");
  if (!(p.s > 0.0) || !(p.s < p.d - 1)) throw DomainError("s must satisfy 0 < s < d-1");
  if (!(p.delta > 0.0) || p.delta > 1.0) throw DomainError("delta must lie in (0, 1]");
  if (!near_integer(std::pow(p.delta, -p.s))) throw DomainError("delta^{-s} must be an integer");
  if (p.k < 1 || p.k * (p.d - 1 - p.s) - 2.0 * (p.d - 1) <= 0.0) {
    throw DomainError("k must satisfy k(d-1-s) - 2(d-1) > 0");
  }
  if (p.A < 2) throw DomainError("A must be at least 2");
  if (p.m < 1) throw DomainError("m must be positive");
  if (p.max_retries < 1) throw DomainError("max_retries must be positive");
  if (!(p.margin >= 0.0) || !(p.margin < 0.5)) throw DomainError("margin must lie in [0, 1/2)");
}

Scales scales(const ConstructionParams& p) {
  Scales sc;
  const double m = static_cast<double>(p.m);
  sc.point_target = std::pow(m, p.s);
  sc.sample_count = static_cast<std::size_t>(ceil_count(sc.point_target));
  sc.cell_target = std::pow(p.delta * m, p.s);
  sc.cell_ceiling = static_cast<std::size_t>(ceil_count(sc.cell_target));
  sc.grid_per_axis = static_cast<int>(std::max<std::int64_t>(1, ceil_count(std::pow(p.delta * m, p.s / p.d))));
  sc.eta = std::pow(p.delta, (p.d - p.s) / p.d) * std::pow(m, -p.s / p.d);
  sc.eta_realized = p.delta / sc.grid_per_axis;
  sc.spacing = 5.0 * p.d * sc.eta;
  sc.n_floor = 1;
  sc.beta_max = m * sc.eta_realized;
  sc.budget = static_cast<double>(sc.cell_ceiling) / 8.0;
  return sc;
}

ParentFamily root_family(int dim) { return ParentFamily{{unit_cube(dim)}, 1.0}; }

std::size_t parent_family_max_occupancy(const ParentFamily& parents) {
  if (parents.cubes.empty()) return 0;
  const int d = parents.cubes.front().dim();
  const double w = 2.0 * parents.delta;
  std::vector<Point> centers;
  centers.reserve(parents.cubes.size());
  for (const Cube& c : parents.cubes) centers.push_back(c.center);

  std::size_t best = 1;
  for (const Tube& t : candidate_worst_tubes(centers, w)) best = std::max(best, count_cubes_met(t, parents.cubes));

  // Members of width 2δ; a cube can only meet one whose axis passes within δ + √d·δ/2 of its centre.
  const RepresentativeFamily family(parents.delta, d);
  const double reach = family.width_parameter() + 0.5 * std::sqrt(static_cast<double>(d)) * parents.delta;
  for (const auto& occ : family.occupied(centers, best + 1, reach)) {
    const Tube t = family.tube(occ.index);
    std::size_t met = 0;
    for (std::size_t i : occ.members) met += tube_cube_intersects(t, parents.cubes[i]) ? 1 : 0;
    best = std::max(best, met);
  }
  return best;
}

void validate_parent_family(const ParentFamily& parents, const ConstructionParams& p) {
  if (parents.cubes.empty()) throw DomainError("parent family is empty");
  const double expected = std::pow(p.delta, -p.s);
  if (static_cast<double>(parents.cubes.size()) != std::round(expected)) {
    throw DomainError("parent family must hold exactly delta^{-s} cubes");
  }
  const Cube unit = unit_cube(p.d);
  for (const Cube& c : parents.cubes) {
    if (c.dim() != p.d) throw DomainError("parent cube has the wrong dimension");
    if (std::abs(c.side - p.delta) > 1e-12 * std::max(1.0, p.delta)) throw DomainError("parent side differs from delta");
    if (!unit.contains(c)) throw DomainError("parent cube leaves the unit cube");
  }
  for (std::size_t i = 0; i < parents.cubes.size(); ++i) {
    for (std::size_t j = i + 1; j < parents.cubes.size(); ++j) {
      if (parents.cubes[i].intersects(parents.cubes[j], 0.0)) throw DomainError("parent cubes are not disjoint");
    }
  }
  if (parent_family_max_occupancy(parents) > static_cast<std::size_t>(p.k)) {
    throw DomainError("a tube of width 2*delta meets more than k parent cubes");
  }
}

std::vector<std::size_t> PointCloud::counts_per_parent(std::size_t parents) const {
  std::vector<std::size_t> counts(parents, 0);
  for (std::size_t pid : parent) ++counts[pid];
  return counts;
}

namespace {

void require_stage(const PointCloud& cloud, Stage stage, const char* op) {
  if (cloud.stage != stage) throw ContractViolation(std::string(op) + " called at the wrong pipeline stage");
}

PointCloud keep_only(const PointCloud& cloud, const std::vector<bool>& keep, Stage stage) {
  PointCloud out;
  out.stage = stage;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!keep[i]) continue;
    out.points.push_back(cloud.points[i]);
    out.parent.push_back(cloud.parent[i]);
    out.sample_index.push_back(cloud.sample_index[i]);
  }
  return out;
}

// Index of the η-cell of `parent` holding x (cells are closed; shared faces go to the upper cell).
std::size_t cell_of(const Cube& parent, int g, std::span<const double> x) {
  std::size_t flat = 0;
  for (int a = 0; a < parent.dim(); ++a) {
    auto j = static_cast<std::int64_t>(std::floor((x[a] - parent.lower(a)) / parent.side * g));
    j = std::clamp<std::int64_t>(j, 0, g - 1);
    flat = flat * static_cast<std::size_t>(g) + static_cast<std::size_t>(j);
  }
  return flat;
}

double binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0.0;
  double acc = 1.0;
  for (std::size_t i = 1; i <= r; ++i) acc = acc * static_cast<double>(n - r + i) / static_cast<double>(i);
  return std::round(acc);
}

std::vector<std::size_t> cell_counts(const PointCloud& cloud, const Cube& parent, int g) {
  std::size_t cells = 1;
  for (int a = 0; a < parent.dim(); ++a) cells *= static_cast<std::size_t>(g);
  std::vector<std::size_t> counts(cells, 0);
  for (const Point& x : cloud.points) {
    if (parent.contains(x, 0.0)) ++counts[cell_of(parent, g, x)];
  }
  return counts;
}

}  // namespace

PointCloud sample_points(const ConstructionParams& p, const ParentFamily& parents) {
  if (parents.cubes.empty()) throw DomainError("cannot sample from an empty parent family");
  const Scales sc = scales(p);
  Rng rng(p.seed);
  PointCloud cloud;
  cloud.stage = Stage::P0;
  cloud.points.reserve(sc.sample_count);
  for (std::size_t i = 0; i < sc.sample_count; ++i) {
    const std::size_t pid = static_cast<std::size_t>(rng.below(parents.cubes.size()));
    cloud.points.push_back(rng.point_in(parents.cubes[pid]));
    cloud.parent.push_back(pid);
    cloud.sample_index.push_back(i);
  }
  return cloud;
}

std::vector<Cube> grid_of_parent(const Cube& parent, const ConstructionParams& p) {
  return subdivide_cube(parent, scales(p).grid_per_axis);
}

bool check_event_min_count(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p) {
  require_stage(cloud, Stage::P0, "check_event_min_count");
  const double need = static_cast<double>(scales(p).cell_ceiling) / 2.0;
  for (std::size_t c : cloud.counts_per_parent(parents.cubes.size())) {
    if (static_cast<double>(c) < need) return false;
  }
  return true;
}

double grid_cluster_sum(const PointCloud& cloud, const Cube& parent, const ConstructionParams& p) {
  const int g = scales(p).grid_per_axis;
  double sum = 0.0;
  for (std::size_t c : cell_counts(cloud, parent, g)) sum += binomial(c, static_cast<std::size_t>(p.A));
  return sum;
}

double compute_XR(const PointCloud& cloud, const Cube& parent, const ConstructionParams& p) {
  require_stage(cloud, Stage::P0, "compute_XR");
  return grid_cluster_sum(cloud, parent, p) / scales(p).cell_target;
}

bool check_event_grid(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p) {
  require_stage(cloud, Stage::P0, "check_event_grid");
  const double budget = scales(p).budget;
  for (const Cube& parent : parents.cubes) {
    if (grid_cluster_sum(cloud, parent, p) > budget) return false;
  }
  return true;
}

GridPruneResult prp_grid(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p) {
  require_stage(cloud, Stage::P0, "prp_grid");
  const int g = scales(p).grid_per_axis;
  std::vector<std::vector<std::size_t>> per_cell_count(parents.cubes.size());
  GridPruneResult out;
  out.removed_per_parent.assign(parents.cubes.size(), 0);

  // Sampling order: the first A−1 arrivals in each cell survive.
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cloud.sample_index[a] < cloud.sample_index[b]; });
  std::vector<bool> keep(cloud.size(), true);
  const auto cap = static_cast<std::size_t>(p.A - 1);
  for (std::size_t i : order) {
    const std::size_t pid = cloud.parent[i];
    auto& counts = per_cell_count[pid];
    if (counts.empty()) {
      std::size_t cells = 1;
      for (int a = 0; a < p.d; ++a) cells *= static_cast<std::size_t>(g);
      counts.assign(cells, 0);
    }
    const std::size_t cell = cell_of(parents.cubes[pid], g, cloud.points[i]);
    if (counts[cell] >= cap) {
      keep[i] = false;
      ++out.removed_per_parent[pid];
    } else {
      ++counts[cell];
    }
  }
  out.cloud = keep_only(cloud, keep, Stage::PTilde);
  return out;
}

TubePruneResult prp_tubes(const PointCloud& cloud, const ConstructionParams& p, double r) {
  if (cloud.stage == Stage::P0) throw ContractViolation("prp_tubes needs the grid stage to run first");
  if (!(r >= 1.0)) throw DomainError("tube dilation r must be at least 1");
  const Scales sc = scales(p);
  const double m = static_cast<double>(p.m);

  TubePruneResult out;
  std::vector<bool> alive(cloud.size(), true);
  std::size_t alive_count = cloud.size();
  std::vector<std::size_t> live_per_parent;
  for (std::size_t pid : cloud.parent) {
    if (pid >= live_per_parent.size()) live_per_parent.resize(pid + 1, 0);
    ++live_per_parent[pid];
  }

  for (int j = 0;; ++j) {
    const double beta = std::ldexp(1.0, j);
    if (beta > sc.beta_max * (1.0 + 1e-12)) break;
    const auto q = static_cast<std::size_t>(ceil_count(p.k * std::pow(beta, p.s)));
    std::size_t removed_here = 0;
    if (alive_count >= q) {
      const double tau = r * beta / m;
      const RepresentativeFamily family(tau, p.d, kPruneSlack);
      const double radius = family.half_width();

      std::vector<std::size_t> live;
      std::vector<Point> live_points;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (alive[i]) {
          live.push_back(i);
          live_points.push_back(cloud.points[i]);
        }
      }
      for (std::size_t dir : family.dense_directions(live_points, q, radius)) {
        for (const auto& occ : family.occupied_along(dir, live_points, q, radius)) {
          std::vector<std::size_t> members;
          for (std::size_t local : occ.members) {
            if (alive[live[local]]) members.push_back(live[local]);
          }
          if (members.size() < q) continue;
          const Tube t = family.tube(occ.index);
          std::vector<double> dist(cloud.size(), 0.0);
          for (std::size_t i : members) dist[i] = distance_point_to_line(cloud.points[i], t);
          // One point at a time: from the parent with the most survivors, then farthest from the axis.
          while (members.size() >= q) {
            auto worst = std::max_element(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
              if (live_per_parent[cloud.parent[a]] != live_per_parent[cloud.parent[b]]) {
                return live_per_parent[cloud.parent[a]] < live_per_parent[cloud.parent[b]];
              }
              if (dist[a] != dist[b]) return dist[a] < dist[b];
              return cloud.sample_index[a] < cloud.sample_index[b];
            });
            alive[*worst] = false;
            --live_per_parent[cloud.parent[*worst]];
            --alive_count;
            ++removed_here;
            members.erase(worst);
          }
        }
      }
    }
    out.removed_per_beta.push_back(removed_here);
    out.removed_total += removed_here;
  }
  out.budget_exceeded = static_cast<double>(out.removed_total) > sc.budget;
  out.cloud = keep_only(cloud, alive, Stage::PTilde);
  return out;
}

SpacingResult enforce_spacing(const PointCloud& cloud, std::size_t parents, const ConstructionParams& p) {
  if (cloud.stage != Stage::PTilde) throw ContractViolation("enforce_spacing needs the pruned cloud");
  const double gap = scales(p).spacing;
  const double gap2 = (gap - kGeomTol) * (gap - kGeomTol);

  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cloud.sample_index[a] < cloud.sample_index[b]; });

  // Kept points bucketed on a grid of side `gap`, so only neighbouring buckets are scanned.
  std::map<std::vector<std::int64_t>, std::vector<std::size_t>> buckets;
  auto bucket_of = [&](const Point& x) {
    std::vector<std::int64_t> key(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) key[a] = static_cast<std::int64_t>(std::floor(x[a] / gap));
    return key;
  };

  std::vector<bool> keep(cloud.size(), false);
  SpacingResult out;
  out.removed_per_parent.assign(parents, 0);
  const int d = p.d;
  for (std::size_t i : order) {
    const Point& x = cloud.points[i];
    const auto home = bucket_of(x);
    bool clear = true;
    std::vector<std::int64_t> probe(home.size());
    std::vector<int> off(static_cast<std::size_t>(d), -1);
    while (clear) {
      for (int a = 0; a < d; ++a) probe[a] = home[a] + off[a];
      if (auto it = buckets.find(probe); it != buckets.end()) {
        for (std::size_t k : it->second) {
          if (distance_squared(x, cloud.points[k]) < gap2) {
            clear = false;
            break;
          }
        }
      }
      int a = d - 1;
      for (; a >= 0; --a) {
        if (++off[a] <= 1) break;
        off[a] = -1;
      }
      if (a < 0) break;
    }
    if (clear) {
      keep[i] = true;
      buckets[home].push_back(i);
    } else {
      ++out.removed_per_parent[cloud.parent[i]];
    }
  }
  out.cloud = keep_only(cloud, keep, Stage::PTilde);
  for (std::size_t c : out.cloud.counts_per_parent(parents)) out.degenerate = out.degenerate || c == 0;
  return out;
}

EqualizeResult equalize_counts(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p) {
  if (cloud.stage != Stage::PTilde) throw ContractViolation("equalize_counts needs the pruned cloud");
  const auto counts = cloud.counts_per_parent(parents.cubes.size());
  EqualizeResult out;
  out.N = counts.empty() ? 0 : *std::min_element(counts.begin(), counts.end());
  out.removed_per_parent.assign(parents.cubes.size(), 0);

  std::vector<std::vector<std::size_t>> members(parents.cubes.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) members[cloud.parent[i]].push_back(i);
  std::vector<bool> keep(cloud.size(), false);
  for (std::size_t pid = 0; pid < members.size(); ++pid) {
    auto& mem = members[pid];
    std::sort(mem.begin(), mem.end(),
              [&](std::size_t a, std::size_t b) { return cloud.sample_index[a] < cloud.sample_index[b]; });
    for (std::size_t n = 0; n < mem.size(); ++n) {
      if (n < out.N) {
        keep[mem[n]] = true;
      } else {
        ++out.removed_per_parent[pid];
      }
    }
  }
  out.cloud = keep_only(cloud, keep, Stage::P);
  out.below_floor = out.N < scales(p).n_floor;
  return out;
}

double derive_epsilon(std::size_t N, double delta, double s) {
  if (N < 1) throw DomainError("N must be at least 1");
  return delta * std::pow(static_cast<double>(N), -1.0 / s);
}

double dilation_for(double epsilon, const ConstructionParams& p) {
  return std::max(1.0, 2.0 * (1.0 + std::sqrt(static_cast<double>(p.d))) * epsilon * static_cast<double>(p.m));
}

namespace {

struct Attempt {
  std::string rejection;  // empty when accepted
  GenerationOutput output;
};

Attempt attempt_generation(const ConstructionParams& p, const ParentFamily& parents) {
  Attempt at;
  GenerationOutput& g = at.output;
  const Scales sc = scales(p);
  const std::size_t np = parents.cubes.size();
  g.params = p;
  g.seed_used = p.seed;
  g.eta = sc.eta;
  g.eta_realized = sc.eta_realized;
  g.grid_per_axis = sc.grid_per_axis;
  g.sample_count = sc.sample_count;
  g.tube_budget = static_cast<std::size_t>(std::floor(sc.budget));
  g.cells_in_reach = cells_within_reach(p.d, sc.eta_realized, sc.spacing);

  const PointCloud p0 = sample_points(p, parents);
  if (!check_event_min_count(p0, parents, p)) {
    at.rejection = "event_min_count";
    return at;
  }
  if (!check_event_grid(p0, parents, p)) {
    at.rejection = "event_grid";
    return at;
  }
  GridPruneResult grid = prp_grid(p0, parents, p);
  g.prp_log.grid_removed = grid.removed_per_parent;
  for (std::size_t removed : grid.removed_per_parent) {
    if (static_cast<double>(removed) > sc.budget) {
      at.rejection = "grid_budget";
      return at;
    }
  }

  // Centres within margin·δ of a face are dropped before spacing, so thinning keeps interior points.
  std::vector<bool> interior(grid.cloud.size(), true);
  g.prp_log.margin_removed.assign(np, 0);
  for (std::size_t i = 0; i < grid.cloud.size(); ++i) {
    const Cube& parent = parents.cubes[grid.cloud.parent[i]];
    if (!Cube{parent.center, parent.side * (1.0 - 2.0 * p.margin)}.contains(grid.cloud.points[i], 0.0)) {
      interior[i] = false;
      ++g.prp_log.margin_removed[grid.cloud.parent[i]];
    }
  }
  const PointCloud kept = keep_only(grid.cloud, interior, Stage::PTilde);
  const auto tilde_counts = kept.counts_per_parent(np);
  SpacingResult spaced = enforce_spacing(kept, np, p);
  g.prp_log.spacing_removed = spaced.removed_per_parent;
  g.survivors_after_spacing = spaced.cloud.counts_per_parent(np);
  for (std::size_t pid = 0; pid < np; ++pid) {
    g.spacing_floor.push_back(static_cast<double>(tilde_counts[pid]) /
                              (static_cast<double>(p.A) * static_cast<double>(g.cells_in_reach)));
  }
  if (spaced.degenerate) {
    at.rejection = "degenerate_thinning";
    return at;
  }

  // r depends on ε, which depends on the final N; tube pruning only lowers N, so iterate
  // from the post-spacing minimum down to a fixed point.
  std::size_t target = *std::min_element(g.survivors_after_spacing.begin(), g.survivors_after_spacing.end());
  TubePruneResult tubes;
  while (true) {
    if (target < sc.n_floor) {
      at.rejection = "insufficient_density";
      return at;
    }
    ++g.fixed_point_rounds;
    const double eps = derive_epsilon(target, p.delta, p.s);
    g.r = dilation_for(eps, p);
    // Children of side ε must fit inside their parent.
    std::vector<bool> inside(spaced.cloud.size(), true);
    g.prp_log.boundary_removed.assign(np, 0);
    for (std::size_t i = 0; i < spaced.cloud.size(); ++i) {
      const Cube& parent = parents.cubes[spaced.cloud.parent[i]];
      if (!parent.contains(Cube{spaced.cloud.points[i], eps})) {
        inside[i] = false;
        ++g.prp_log.boundary_removed[spaced.cloud.parent[i]];
      }
    }
    tubes = prp_tubes(keep_only(spaced.cloud, inside, Stage::PTilde), p, g.r);
    if (tubes.budget_exceeded) {
      at.rejection = "tube_budget";
      return at;
    }
    const auto counts = tubes.cloud.counts_per_parent(np);
    const std::size_t reached = *std::min_element(counts.begin(), counts.end());
    if (reached >= target) break;
    target = reached;
  }
  g.prp_log.tube_removed_total = tubes.removed_total;
  g.prp_log.tube_removed_per_beta = tubes.removed_per_beta;

  // Trim to exactly `target`: equalize_counts would pick the minimum, which can exceed it.
  const auto counts = tubes.cloud.counts_per_parent(np);
  std::vector<std::size_t> seen(np, 0);
  std::vector<std::size_t> order(tubes.cloud.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tubes.cloud.sample_index[a] < tubes.cloud.sample_index[b];
  });
  std::vector<bool> keep(tubes.cloud.size(), false);
  for (std::size_t i : order) {
    if (seen[tubes.cloud.parent[i]]++ < target) keep[i] = true;
  }
  PointCloud trimmed = keep_only(tubes.cloud, keep, Stage::PTilde);
  EqualizeResult eq = equalize_counts(trimmed, parents, p);
  g.prp_log.equalize_removed.assign(np, 0);
  for (std::size_t pid = 0; pid < np; ++pid) g.prp_log.equalize_removed[pid] = counts[pid] - eq.N;
  if (eq.below_floor) {
    at.rejection = "insufficient_density";
    return at;
  }

  g.N = eq.N;
  g.epsilon = derive_epsilon(g.N, p.delta, p.s);
  // An η-cube meeting two children would need their centres within √d(η + ε).
  if (std::sqrt(static_cast<double>(p.d)) * (sc.eta + g.epsilon) > sc.spacing + kGeomTol) {
    at.rejection = "children_too_large";
    return at;
  }

  std::vector<std::size_t> idx(eq.cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (eq.cloud.parent[a] != eq.cloud.parent[b]) return eq.cloud.parent[a] < eq.cloud.parent[b];
    return eq.cloud.sample_index[a] < eq.cloud.sample_index[b];
  });
  for (std::size_t i : idx) {
    Cube child{eq.cloud.points[i], g.epsilon};
    if (!parents.cubes[eq.cloud.parent[i]].contains(child)) {
      at.rejection = "child_outside_parent";
      return at;
    }
    g.children.push_back(std::move(child));
    g.child_parent.push_back(eq.cloud.parent[i]);
    g.points.push_back(eq.cloud.points[i]);
  }
  return at;
}

}  // namespace

GenerationOutput build_generation(const ConstructionParams& p, const ParentFamily& parents) {
  validate(p);
  if (parents.cubes.empty()) throw DomainError("cannot build from an empty parent family");
  std::map<std::string, int> rejections;
  for (int retry = 0; retry < p.max_retries; ++retry) {
    ConstructionParams attempt_params = p;
    attempt_params.seed = p.seed + static_cast<std::uint64_t>(retry);
    Attempt at = attempt_generation(attempt_params, parents);
    if (at.rejection.empty()) {
      at.output.params = p;
      at.output.retries = retry;
      at.output.rejections = rejections;
      return std::move(at.output);
    }
    ++rejections[at.rejection];
  }
  ConstructionFailed err("construction failed after " + std::to_string(p.max_retries) + " attempts", rejections);
  throw ConstructionFailed(std::string(err.what()) + " (most frequent rejection: " + err.dominant_failure() + ")",
                           rejections);
}

}  // namespace tubecantor
