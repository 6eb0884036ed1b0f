#include "tubecantor/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tubecantor/errors.hpp"
#include "tubecantor/parallel.hpp"
#include "tubecantor/rng.hpp"

namespace tubecantor {

double BoundInputs::D() const { return std::exp(1.0) * C_abs * std::pow(delta, s - d + 1); }

void validate(const BoundInputs& in) {
  if (in.d < 2) throw DomainError("dimension d must be at least 2");
  if (!(in.s > 0.0) || !(in.s < in.d - 1)) throw DomainError("s must satisfy 0 < s < d-1");
  if (in.k < 1) throw DomainError("k must be positive");
  if (!(in.delta > 0.0) || in.delta > 1.0) throw DomainError("delta must lie in (0, 1]");
  if (!(in.m >= 1.0)) throw DomainError("m must be at least 1");
  if (!(in.C_abs > 0.0)) throw DomainError("C_abs must be positive");
}

int select_k(int d, double s) {
  if (d < 2) throw DomainError("dimension d must be at least 2");
  if (!(s > 0.0) || !(s < d - 1)) throw DomainError("s must satisfy 0 < s < d-1");
  const double gap = d - 1 - s;
  for (int k = 1;; ++k) {
    const bool first = k * gap - 2.0 * (d - 1) > 0.0;
    const bool second = s * (1.0 - 2.0 / d) - s * k * gap / d < 0.0;
    if (first && second) return k;
  }
}

double tube_point_probability(const BoundInputs& in, double beta) {
  validate(in);
  if (!(beta >= 1.0) || beta > in.m) throw DomainError("beta must lie in [1, m]");
  const double v = in.C_abs * in.k * std::pow(in.delta, in.s - in.d + 1) * std::pow(beta / in.m, in.d - 1);
  return std::min(1.0, v);
}

double expected_cluster_bound(const BoundInputs& in, double beta) {
  validate(in);
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double q = in.k * std::pow(beta, in.s);
  if (q < 1.0) throw DomainError("k*beta^s must be at least 1");
  const double exponent = q * (in.d - 1 - in.s) - 2.0 * (in.d - 1);
  if (exponent <= 0.0 && beta < in.m) throw DomainError("k too small: cluster bound exponent is not positive");
  return std::exp(q * std::log(in.D()) + exponent * std::log(beta / in.m));
}

ClusterTotal total_cluster_bound(const BoundInputs& in) {
  validate(in);
  ClusterTotal out;
  const double gap = in.d - 1 - in.s;
  const double log_rho = in.k * std::log(in.D()) - in.s * in.k * gap / in.d * std::log(in.m);
  out.ratio = std::exp(log_rho);
  if (!(out.ratio < 1.0)) throw DomainError("m too small: geometric ratio D^k m^{-sk(d-1-s)/d} is not below 1");
  out.C_s = static_cast<int>(std::floor(1.0 / in.s)) + 1;
  out.closed_form = out.C_s * out.ratio / (1.0 - out.ratio) * std::pow(in.m, 2.0 * in.s * (in.d - 1) / in.d);

  const double beta_top = std::pow(in.delta, (in.d - in.s) / in.d) * std::pow(in.m, 1.0 - in.s / in.d);
  for (double beta = 1.0; beta == 1.0 || beta <= beta_top * (1.0 + 1e-12); beta *= 2.0) {
    const double term = expected_cluster_bound(in, beta);
    out.terms.push_back(term);
    out.direct += term;
  }
  return out;
}

std::int64_t choose_m(const BoundInputs& in, std::int64_t floor_m) {
  if (floor_m < 1) throw DomainError("floor_m must be positive");
  const std::int64_t limit = std::int64_t{1} << 40;
  auto ok = [&](std::int64_t m) {
    BoundInputs x = in;
    x.m = static_cast<double>(m);
    validate(x);
    const double gap = x.d - 1 - x.s;
    if (x.k * std::log(x.D()) - x.s * x.k * gap / x.d * std::log(x.m) >= 0.0) return false;
    return total_cluster_bound(x).direct < std::pow(x.delta * x.m, x.s) / 100.0;
  };
  std::int64_t hi = floor_m;
  while (!ok(hi)) {
    if (hi >= limit) throw ConfigError("no m below 2^40 makes the cluster bound small enough");
    hi = std::min(limit, hi * 2);
  }
  if (hi == floor_m) return hi;
  std::int64_t lo = std::max(floor_m, hi / 2);  // fails
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double max_XR(const ConstructionParams& p, const ParentFamily& parents) {
  const PointCloud cloud = sample_points(p, parents);
  double best = 0.0;
  for (const Cube& r : parents.cubes) best = std::max(best, compute_XR(cloud, r, p));
  return best;
}

MainClaimReport montecarlo_mainclaim(const ConstructionParams& p, const ParentFamily& parents, std::size_t trials) {
  if (trials < 100) throw DomainError("Monte Carlo needs at least 100 trials");
  validate(p);
  MainClaimReport out;
  out.trials = trials;
  out.max_xr.assign(trials, 0.0);
  parallel_for(trials, [&](std::size_t t) {
    ConstructionParams q = p;
    q.seed = mix_seed(p.seed, t);
    out.max_xr[t] = max_XR(q, parents);
  });
  for (int i = 0; i <= 20; ++i) out.bin_edges.push_back(0.01 * i);
  out.histogram.assign(out.bin_edges.size(), 0);
  for (double x : out.max_xr) {
    if (x >= 0.1) ++out.exceed;
    auto bin = static_cast<std::size_t>(std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(), x) -
                                        out.bin_edges.begin());
    ++out.histogram[bin == 0 ? 0 : bin - 1];
  }
  out.frequency = static_cast<double>(out.exceed) / static_cast<double>(trials);
  return out;
}

namespace {

double binomial(std::size_t n, std::size_t q) {
  if (q > n) return 0.0;
  double v = 1.0;
  for (std::size_t i = 0; i < q; ++i) v = v * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return v;
}

}  // namespace

double form4_proxy(const PointCloud& cloud, const ConstructionParams& p) {
  const Scales sc = scales(p);
  const double r0 = 2.0 * (1.0 + std::sqrt(static_cast<double>(p.d)));
  const double m = static_cast<double>(p.m);
  double total = 0.0;
  for (int j = 0;; ++j) {
    const double beta = std::ldexp(1.0, j);
    if (j > 0 && beta > sc.beta_max * (1.0 + 1e-12)) break;
    const auto q = static_cast<std::size_t>(ceil_count(p.k * std::pow(beta, p.s)));
    if (cloud.size() < q) continue;
    const double tau = r0 * beta / m;
    const RepresentativeFamily family(tau, p.d);
    for (std::size_t dir : family.dense_directions(cloud.points, q, tau)) {
      for (const auto& occ : family.occupied_along(dir, cloud.points, q, tau)) total += binomial(occ.members.size(), q);
    }
  }
  return total;
}

double EventsReport::form5_frequency() const { return trials ? static_cast<double>(form5_passes) / trials : 0.0; }
double EventsReport::form4a_frequency() const { return trials ? static_cast<double>(form4a_passes) / trials : 0.0; }
double EventsReport::form4_frequency() const { return trials ? static_cast<double>(form4_passes) / trials : 0.0; }

EventsReport montecarlo_events(const ConstructionParams& p, const ParentFamily& parents, std::size_t trials,
                               bool with_form4_proxy) {
  if (trials < 100) throw DomainError("Monte Carlo needs at least 100 trials");
  validate(p);
  const double budget = scales(p).budget;
  std::vector<unsigned char> f5(trials), f4a(trials), f4(trials);
  parallel_for(trials, [&](std::size_t t) {
    ConstructionParams q = p;
    q.seed = mix_seed(p.seed, t);
    const PointCloud cloud = sample_points(q, parents);
    f5[t] = check_event_min_count(cloud, parents, q);
    f4a[t] = check_event_grid(cloud, parents, q);
    if (with_form4_proxy) f4[t] = form4_proxy(cloud, q) <= budget;
  });
  EventsReport out;
  out.trials = trials;
  out.form4_evaluated = with_form4_proxy;
  for (std::size_t t = 0; t < trials; ++t) {
    out.form5_passes += f5[t];
    out.form4a_passes += f4a[t];
    out.form4_passes += f4[t];
  }
  return out;
}

}  // namespace tubecantor
