#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "agcrn/autodiff.hpp"

namespace agcrn {

struct ParamCheck {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t entries_checked = 0;
};

struct CheckReport {
  bool pass = false;
  double step = 0.0;
  double tol = 0.0;
  std::vector<ParamCheck> params;

  std::string to_json() const;
  void write_json(const std::string& path) const;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tol = 1e-4;
  /// Above this many total entries a seeded random subset is probed.
  std::size_t entry_budget = 10000;
  std::uint64_t seed = 1;
  /// Test hook: corrupts one analytic gradient entry before comparing,
  /// so the failure path of consumers can be exercised.
  bool corrupt = false;
};

/// Compares analytic gradients against central finite differences.
///
/// `loss` must run a full forward/backward pass, accumulate gradients into
/// `params`, and return the scalar loss; it must be deterministic for fixed
/// parameter values (this is verified with a repeated evaluation, and a
/// mismatch is a hard NumericsError). Relative error uses
/// |a-n| / max(|a|,|n|), falling back to the absolute difference when both
/// magnitudes are below 1e-8. Gradients are left zeroed on return.
CheckReport finite_difference_check(const std::function<double()>& loss,
                                    std::span<Parameter* const> params,
                                    const GradCheckOptions& opt = {});

}  // namespace agcrn
