#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tubecantor/geometry.hpp"

namespace tubecantor {

/// Everything verify looks at: the two cube families, the parent links and the parameters.
/// Nothing here comes from construction internals except the PRP(ii) echo.
struct VerifyInput {
  int generation = 1;
  int d = 2;
  double s = 0.5;
  int k = 5;
  double delta = 1.0;
  std::int64_t m = 1;
  std::uint64_t seed = 1;
  std::vector<Cube> parents;
  std::vector<Cube> children;
  std::vector<std::size_t> child_parent;
  std::optional<double> tube_removed;  ///< manifest echo of PRP(ii) removals
  std::optional<double> tube_budget;
};

struct VerifyOptions {
  std::size_t thin_samples = 10000;
  std::size_t law_samples = 1000;
  std::size_t hypothesis_samples = 2000;
  double C_law = 8.0;
};

struct CheckResult {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double limit = 0.0;
  std::string detail;
  std::optional<Tube> witness;
};

struct LawRow {
  double width = 0.0;
  std::size_t max_count = 0;
  double constant = 0.0;
};

struct VerificationReport {
  int generation = 1;
  int d = 2;
  double s = 0.5;
  int k = 5;
  double delta = 1.0;
  std::int64_t m = 1;
  std::uint64_t seed = 1;
  double epsilon = 0.0;
  double eta = 0.0;
  std::size_t N = 0;
  CheckResult integrity;
  CheckResult children_per_parent;
  CheckResult nesting;
  CheckResult eta_separation;
  CheckResult thin_tube_max;
  CheckResult intermediate_law;
  CheckResult hypothesis_max;
  CheckResult tube_budget;
  std::vector<LawRow> law_rows;
  std::string caveat;

  bool all_pass() const;
  std::vector<const CheckResult*> checks() const;
};

/// η = δ^{(d−s)/d}·m^{−s/d}.
double eta_for(double delta, double s, int d, std::int64_t m);

/// Exact duplicate children, unequal sides and out-of-range parent links.
/// Returns the input with exact duplicates removed.
VerifyInput verify_integrity(const VerifyInput& in, CheckResult& out);

/// Exactly N = (δ/ε)^s children per parent, total N·δ^{−s}.
CheckResult verify_counts(const VerifyInput& in);

/// Each child inside the parent it is linked to.
CheckResult verify_nesting(const VerifyInput& in);

/// Pairwise centre distance ≥ 5d·η, and no cell of an η-grid shifted by 0 or η/2 along each
/// axis meets two children.
CheckResult verify_eta_cell(const VerifyInput& in);

/// Max children met by width-2ε tubes: inflated pair tubes, width-2ε representatives,
/// random tubes (and perturbed pair tubes for d = 2). Passes when ≤ k.
CheckResult verify_thin_tubes(const VerifyInput& in, std::size_t sample_size);

/// Law constant max count/(k·(w/ε)^s) over w ∈ {ε, 2ε, 4ε, …} ∪ {δ}. Passes when ≤ C_law.
CheckResult verify_intermediate_tubes(const VerifyInput& in, const std::vector<double>& widths, std::size_t sample_size,
                                      double C_law, std::vector<LawRow>* rows = nullptr);

/// Dyadic widths ε·2^j below δ, then δ.
std::vector<double> law_widths(double epsilon, double delta);

/// Max parents met by width-2δ tubes. Passes when ≤ k.
CheckResult verify_hypothesis(const VerifyInput& in, std::size_t sample_size);

CheckResult verify_tube_budget(const VerifyInput& in);

VerificationReport full_report(const VerifyInput& in, const VerifyOptions& opt = {});

}  // namespace tubecantor
