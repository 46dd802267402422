// SPDX-License-Identifier: Apache-2.0
#include "vstg/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vstg/error.hpp"

namespace vstg {
namespace {

double eval_scalar(const std::function<Var()>& f, const std::string& name) {
  const Var out = f();
  const double v = out.item();
  if (!std::isfinite(v)) throw NumericError("non-finite objective while probing parameter '" + name + "'");
  return v;
}

}  // namespace

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << " max_rel=" << max_rel_error << " tol=" << tol;
  for (const auto& e : entries) os << "\n  " << e.name << ": rel=" << e.max_rel_error << " abs=" << e.max_abs_error;
  return os.str();
}

GradCheckReport grad_check(const std::function<Var()>& f, std::span<const NamedParam> params,
                           const GradCheckOptions& opts) {
  for (const auto& p : params) {
    Var v = p.var;
    v.zero_grad();
  }
  const Var root = f();
  if (!std::isfinite(root.item())) throw NumericError("non-finite objective at the unperturbed point");
  root.backward();

  GradCheckReport report;
  report.tol = opts.tol;
  for (const auto& p : params) {
    Var var = p.var;
    const Tensor analytic = var.grad();
    if (!analytic.all_finite()) throw NumericError("non-finite analytic gradient for parameter '" + p.name + "'");
    GradCheckEntry entry{p.name};
    Tensor& value = var.mutable_value();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + opts.step;
      const double up = eval_scalar(f, p.name);
      value[i] = saved - opts.step;
      const double down = eval_scalar(f, p.name);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double abs_err = std::abs(analytic[i] - numeric);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), opts.floor});
      const double rel = abs_err / denom;
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      if (rel > entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_index = i;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error < opts.tol;
  return report;
}

}  // namespace vstg
