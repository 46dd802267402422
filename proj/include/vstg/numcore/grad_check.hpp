// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vstg/numcore/autograd.hpp"

namespace vstg {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double tol = 0.0;
  bool passed = false;

  std::string summary() const;
};

struct GradCheckOptions {
  double tol = 1e-4;
  double step = 1e-5;
  /// Denominator floor for the relative error |a - n| / max(|a|, |n|, floor),
  /// so gradients that are zero on both routes count as exact. Sits above the
  /// central-difference roundoff (about eps * |f| / step, near 1e-10 here).
  double floor = 1e-5;
};

/// Compares reverse-mode gradients of the scalar `f` against central
/// differences (f(p + h) - f(p - h)) / 2h for every element of every
/// parameter. `f` must rebuild its graph from the current parameter values
/// on each call. Throws NumericError naming the parameter if any probe
/// produces a non-finite value.
GradCheckReport grad_check(const std::function<Var()>& f, std::span<const NamedParam> params,
                           const GradCheckOptions& opts = {});

}  // namespace vstg
