#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tubecantor/geometry.hpp"

namespace tubecantor {

/// Inputs of one application of the generation lemma.
struct ConstructionParams {
  int d = 2;
  double s = 0.5;
  double delta = 1.0;      ///< parent side; δ^{-s} must be an integer
  int k = 5;               ///< tube occupancy cap
  int A = 4;               ///< grid cluster threshold
  std::int64_t m = 1000;   ///< density parameter; ⌈m^s⌉ points are sampled
  std::uint64_t seed = 1;
  int max_retries = 50;
  double margin = 1.0 / 16.0;  ///< centres closer than margin·δ to a parent face are dropped before spacing
};

/// Throws DomainError when a field is out of range (including k(d−1−s) − 2(d−1) ≤ 0).
void validate(const ConstructionParams& p);

/// ⌈x⌉ that ignores float noise just above an integer.
std::int64_t ceil_count(double x);

/// True when x is within 1e-9 of an integer.
bool near_integer(double x);

/// Quantities every stage derives from the parameters.
struct Scales {
  double point_target = 0.0;       ///< m^s
  std::size_t sample_count = 0;    ///< ⌈m^s⌉
  double cell_target = 0.0;        ///< (δm)^s
  std::size_t cell_ceiling = 0;    ///< ⌈(δm)^s⌉
  int grid_per_axis = 1;           ///< ⌈(δm)^{s/d}⌉
  double eta = 0.0;                ///< δ^{(d−s)/d} m^{−s/d}
  double eta_realized = 0.0;       ///< δ / grid_per_axis
  double spacing = 0.0;            ///< 5d·η
  std::size_t n_floor = 1;         ///< smallest admissible N
  double beta_max = 1.0;           ///< dyadic β range: β ≤ m·η′
  double budget = 0.0;             ///< ⌈(δm)^s⌉ / 8
};

Scales scales(const ConstructionParams& p);

/// The family 𝒰 of equal parent cubes.
struct ParentFamily {
  std::vector<Cube> cubes;
  double delta = 1.0;
};

ParentFamily root_family(int dim);

/// Largest number of parents met by one width-2δ tube, over pair tubes and representatives.
std::size_t parent_family_max_occupancy(const ParentFamily& parents);

/// Throws DomainError naming the broken invariant: count δ^{-s}, equal sides, containment in
/// [0,1]^d, disjointness, and the width-2δ tube hypothesis (≤ k parents per tube).
void validate_parent_family(const ParentFamily& parents, const ConstructionParams& p);

enum class Stage { P0, PTilde, P };

/// Points tagged with their parent and their position in the original sample.
struct PointCloud {
  std::vector<Point> points;
  std::vector<std::size_t> parent;
  std::vector<std::size_t> sample_index;
  Stage stage = Stage::P0;

  std::size_t size() const { return points.size(); }
  std::vector<std::size_t> counts_per_parent(std::size_t parents) const;
};

struct PrpLog {
  std::vector<std::size_t> grid_removed;
  std::size_t tube_removed_total = 0;
  std::vector<std::size_t> tube_removed_per_beta;
  std::vector<std::size_t> spacing_removed;
  std::vector<std::size_t> margin_removed;
  std::vector<std::size_t> boundary_removed;  ///< closer than ε/2 to the parent boundary
  std::vector<std::size_t> equalize_removed;
};

PointCloud sample_points(const ConstructionParams& p, const ParentFamily& parents);

/// η-grid S_R of one parent.
std::vector<Cube> grid_of_parent(const Cube& parent, const ConstructionParams& p);

bool check_event_min_count(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p);

/// Σ_S binom(|P0 ∩ S|, A) over the η-grid of `parent`.
double grid_cluster_sum(const PointCloud& cloud, const Cube& parent, const ConstructionParams& p);

/// X_R = (δm)^{-s} Σ_S binom(|P0 ∩ S|, A).
double compute_XR(const PointCloud& cloud, const Cube& parent, const ConstructionParams& p);

bool check_event_grid(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p);

struct GridPruneResult {
  PointCloud cloud;
  std::vector<std::size_t> removed_per_parent;
};

/// Leaves at most A−1 points per η-cell, dropping the last-sampled ones.
GridPruneResult prp_grid(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p);

struct TubePruneResult {
  PointCloud cloud;
  std::size_t removed_total = 0;
  std::vector<std::size_t> removed_per_beta;
  bool budget_exceeded = false;
};

/// Representatives used by prp_tubes are only (1 + kPruneSlack) times wider than the tubes
/// they cover.
inline constexpr double kPruneSlack = 0.125;

/// Dyadic tube pruning at dilation r: for every β = 2^j ≤ m·η′, each representative covering
/// width-rβ/m tubes keeps at most ⌈kβ^s⌉ − 1 points. Farthest-from-axis points go first.
TubePruneResult prp_tubes(const PointCloud& cloud, const ConstructionParams& p, double r);

struct SpacingResult {
  PointCloud cloud;
  std::vector<std::size_t> removed_per_parent;
  bool degenerate = false;  ///< some parent lost every point
};

/// Greedy thinning in sampling order to pairwise distance ≥ 5d·η.
SpacingResult enforce_spacing(const PointCloud& cloud, std::size_t parents, const ConstructionParams& p);

struct EqualizeResult {
  PointCloud cloud;
  std::size_t N = 0;
  std::vector<std::size_t> removed_per_parent;
  bool below_floor = false;
};

/// Trims every parent to the smallest per-parent count N (last-sampled dropped first).
EqualizeResult equalize_counts(const PointCloud& cloud, const ParentFamily& parents, const ConstructionParams& p);

/// ε = δ·N^{-1/s}, so that (δ/ε)^s = N.
double derive_epsilon(std::size_t N, double delta, double s);

/// Dilation r = max(1, 2(1+√d)·ε·m): a tube of width ≤ 2βε, widened by √d·ε, meets only
/// cubes whose centres lie in the width-rβ/m tube with the same axis.
double dilation_for(double epsilon, const ConstructionParams& p);

/// One accepted application of the lemma: the child family 𝒬 and its bookkeeping.
struct GenerationOutput {
  ConstructionParams params;
  std::vector<Cube> children;
  std::vector<std::size_t> child_parent;
  std::vector<Point> points;  ///< final P, the child centres
  double epsilon = 0.0;
  std::size_t N = 0;
  PrpLog prp_log;
  int retries = 0;
  std::uint64_t seed_used = 0;
  double eta = 0.0;
  double eta_realized = 0.0;
  int grid_per_axis = 1;
  double r = 1.0;
  std::size_t sample_count = 0;
  std::size_t tube_budget = 0;  ///< ⌊⌈(δm)^s⌉/8⌋
  std::size_t fixed_point_rounds = 0;
  std::size_t cells_in_reach = 0;              ///< c_d
  std::vector<double> spacing_floor;           ///< |P̃∩R| / (A·c_d) per parent
  std::vector<std::size_t> survivors_after_spacing;
  std::map<std::string, int> rejections;
};

/// Samples, tests the events, prunes and emits 𝒬; resamples with seed + retry on rejection.
/// Throws ConstructionFailed after max_retries rejected attempts.
GenerationOutput build_generation(const ConstructionParams& p, const ParentFamily& parents);

}  // namespace tubecantor
