#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tubecantor/construction.hpp"
#include "tubecantor/geometry.hpp"

namespace tubecantor {

struct CantorSchedule {
  int d = 2;
  double s = 0.5;
  std::uint64_t seed = 1;
  int n_generations = 1;
  std::vector<std::int64_t> m_schedule;  ///< one m per generation; empty means choose_m ("auto")
  int k = 0;                             ///< 0 selects select_k(d, s)
  int A = 4;
  double C_abs = 1.0;
  int max_retries = 50;
  double margin = 1.0 / 16.0;
};

/// Throws DomainError for an unusable schedule.
void validate(const CantorSchedule& sc);

/// k actually used: sc.k, or select_k(d, s) when sc.k == 0.
int effective_k(const CantorSchedule& sc);

/// 𝒬₀ = {[0,1]^d} followed by the built generations.
struct CantorSet {
  int d = 2;
  double s = 0.5;
  std::vector<GenerationOutput> generations;  ///< generations[n] builds 𝒬_{n+1} from 𝒬_n
  std::vector<double> side_lengths;           ///< ℓ_0 = 1, ℓ_1, ...

  std::size_t depth() const { return generations.size(); }
  /// 𝒬_n for 0 ≤ n ≤ depth().
  const std::vector<Cube>& cubes(std::size_t n) const;
  /// Index into 𝒬_{n−1} of each cube of 𝒬_n, n ≥ 1.
  const std::vector<std::size_t>& parents(std::size_t n) const;

  std::vector<Cube> root;
};

/// Builds generation n+1 with δ = ℓ_n, seed mix_seed(seed, n) and the m of the schedule.
/// Checks the width-2ℓ_n tube hypothesis on 𝒬_n first. ConstructionFailed carries the
/// 1-based generation index.
CantorSet build_cantor(const CantorSchedule& sc);

/// Parameters of generation n+1 built from parents of side δ.
ConstructionParams generation_params(const CantorSchedule& sc, std::size_t n, double delta);

/// m used for generation n+1 (explicit or choose_m with δ = ℓ_n).
std::int64_t schedule_m(const CantorSchedule& sc, std::size_t n, double delta);

/// max over Q ∈ 𝒬_n of |Σ_{children Q′} diam(Q′)^s / diam(Q)^s − 1|. Requires n < depth().
double mass_check(const CantorSet& cs, std::size_t n);

std::size_t count_cubes_meeting_tube(const CantorSet& cs, std::size_t n, const Tube& t);

struct ContentEstimate {
  double value = 0.0;
  std::size_t generation = 0;
  std::size_t count = 0;
  bool trivial = false;       ///< w ≥ 1, value 1
  bool extrapolated = false;  ///< w ≤ ℓ_depth, estimated at the deepest generation
};

/// count of 𝒬_n cubes met · (√d·ℓ_n)^s for the n with ℓ_n < w ≤ ℓ_{n−1}.
ContentEstimate tube_content_estimate(const CantorSet& cs, const Tube& t);

/// Σ_{Q ∈ 𝒬_n, Q ∩ B ≠ ∅} diam(Q)^s / diam(B)^s for the closed ball B.
double ball_ratio(const CantorSet& cs, std::size_t n, const Point& centre, double diameter);

/// Max of Σ_{Q ∈ 𝒬_n, Q ∩ B ≠ ∅} diam(Q)^s / diam(B)^s over random balls of diameter
/// log-uniform in [ℓ_n, √d] centred at random points of random cubes of 𝒬_n.
double ball_property_check(const CantorSet& cs, std::size_t n, std::size_t trials, std::uint64_t seed);

/// Sweep tubes: widths log-uniform in [w_min, w_max], uniform directions, anchors alternating
/// between a random point of a random deepest cube and a uniform point of [0,1]^d.
std::vector<Tube> sweep_tubes(const CantorSet& cs, std::size_t count, double w_min, double w_max, std::uint64_t seed);

/// Least-squares slope of log|𝒬_n| against log(1/ℓ_n) over n = 1..depth(); needs depth ≥ 2.
double box_dimension_estimate(const CantorSet& cs);

}  // namespace tubecantor
