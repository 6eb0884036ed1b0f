#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tubecantor/construction.hpp"

namespace tubecantor {

/// Inputs of the probability bounds. D = e·C_abs·δ^{s−d+1}.
struct BoundInputs {
  int d = 2;
  double s = 0.5;
  int k = 5;
  double delta = 1.0;
  double m = 1000.0;
  double C_abs = 1.0;

  double D() const;
};

/// Throws DomainError unless d ≥ 2, 0 < s < d−1, k ≥ 1, δ ∈ (0,1], m ≥ 1, C_abs > 0.
void validate(const BoundInputs& in);

/// Smallest k with k(d−1−s) − 2(d−1) > 0 and s(1 − 2/d) − sk(d−1−s)/d < 0.
int select_k(int d, double s);

/// min(1, C_abs·k·δ^{s−d+1}·(β/m)^{d−1}).
double tube_point_probability(const BoundInputs& in, double beta);

/// D^{kβ^s}·(β/m)^{kβ^s(d−1−s) − 2(d−1)}, evaluated in logs.
/// Throws DomainError ("k too small") when the exponent is ≤ 0 and β < m.
double expected_cluster_bound(const BoundInputs& in, double beta);

struct ClusterTotal {
  double direct = 0.0;       ///< Σ over dyadic β ≤ δ^{(d−s)/d}·m^{1−s/d} (β = 1 always included)
  double closed_form = 0.0;  ///< C_s·ρ/(1−ρ)·m^{2s(d−1)/d}, ρ = D^k·m^{−sk(d−1−s)/d}
  double ratio = 0.0;        ///< ρ
  int C_s = 1;               ///< ⌊1/s⌋ + 1
  std::vector<double> terms;
};

/// Throws DomainError ("m too small") when ρ ≥ 1.
ClusterTotal total_cluster_bound(const BoundInputs& in);

/// Smallest m ≥ floor_m (doubling, then bisection) with total direct bound < (δm)^s/100.
/// `in.m` is ignored. Throws ConfigError when no m below 2^40 qualifies.
std::int64_t choose_m(const BoundInputs& in, std::int64_t floor_m = 1);

/// max_R X_R over one sampling of P0.
double max_XR(const ConstructionParams& p, const ParentFamily& parents);

struct MainClaimReport {
  std::size_t trials = 0;
  std::size_t exceed = 0;       ///< trials with max_R X_R ≥ 1/10
  double frequency = 0.0;
  std::vector<double> max_xr;   ///< per trial, in trial order
  std::vector<double> bin_edges;
  std::vector<std::size_t> histogram;  ///< counts per [edge_i, edge_{i+1}); last bin open-ended
};

/// Trial t samples with seed mix_seed(p.seed, t). Throws DomainError when trials < 100.
MainClaimReport montecarlo_mainclaim(const ConstructionParams& p, const ParentFamily& parents, std::size_t trials);

/// Σ over dyadic β ≤ m·η′ and width-2τ representatives (τ = r₀β/m, r₀ = 2(1+√d)) of
/// binom(points in member, ⌈kβ^s⌉). Overcounts subsets lying in several members.
double form4_proxy(const PointCloud& cloud, const ConstructionParams& p);

struct EventsReport {
  std::size_t trials = 0;
  std::size_t form5_passes = 0;
  std::size_t form4a_passes = 0;
  std::size_t form4_passes = 0;
  bool form4_evaluated = true;
  double form5_frequency() const;
  double form4a_frequency() const;
  double form4_frequency() const;
};

/// Throws DomainError when trials < 100. The (form4) proxy costs O(n² log n) per dyadic level
/// in d = 2 and can be switched off for large clouds.
EventsReport montecarlo_events(const ConstructionParams& p, const ParentFamily& parents, std::size_t trials,
                               bool with_form4_proxy = true);

}  // namespace tubecantor
