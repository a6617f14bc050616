#pragma once

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/tape.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  bool pass = true;
  double max_rel_err = 0.0;
  double tol = 0.0;
  std::vector<GradCheckEntry> entries;

  std::string str() const {
    std::string s;
    char line[160];
    for (const auto& e : entries) {
      std::snprintf(line, sizeof(line), "%-28s max_rel_err=%.3e (analytic=%.6e numeric=%.6e) %s\n",
                    e.name.c_str(), e.max_rel_err, e.analytic_at_worst, e.numeric_at_worst,
                    e.pass ? "ok" : "FAIL");
      s += line;
    }
    return s;
  }
};

/// Central finite-difference oracle. `f` is a nullary callable returning a
/// scalar tensor; it must read the listed inputs through their shared
/// storage so that in-place perturbations are visible. Runs f twice untaped
/// first and refuses non-deterministic functions, then compares the taped
/// analytic gradient of every input element against (f(x+eps) - f(x-eps)) /
/// (2 eps). Relative error is |a-n| / max(1, |a|, |n|).
template <typename F>
GradCheckReport grad_check(F&& f, const std::vector<std::pair<std::string, Tensor<double>>>& inputs,
                           double eps = 1e-4, double tol = 1e-4) {
  if (!(eps > 0.0)) throw ConfigError("grad_check: eps must be positive");

  {
    Tape<double>::Suspend off;
    const double base1 = f().item();
    const double base2 = f().item();
    if (std::memcmp(&base1, &base2, sizeof(double)) != 0) {
      throw DeterminismError("grad_check: two baseline evaluations differ (" +
                             std::to_string(base1) + " vs " + std::to_string(base2) + ")");
    }
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape<double> tape;
    for (const auto& kv : inputs) {
      Tensor<double> t = kv.second;
      t.set_requires_grad(true);
      t.clear_grad();
    }
    Tensor<double> y = f();
    tape.backward(y);
    for (const auto& kv : inputs) {
      const Tensor<double>& t = kv.second;
      if (t.has_grad()) {
        auto g = t.grad();
        analytic.emplace_back(g.begin(), g.end());
      } else {
        analytic.emplace_back(t.size(), 0.0);
      }
    }
  }

  GradCheckReport report;
  report.tol = tol;
  Tape<double>::Suspend off;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    GradCheckEntry entry;
    entry.name = inputs[k].first;
    Tensor<double> t = inputs[k].second;
    auto vals = t.values();
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const double saved = vals[j];
      vals[j] = saved + eps;
      const double f_plus = f().item();
      vals[j] = saved - eps;
      const double f_minus = f().item();
      vals[j] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[k][j];
      const double rel = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      if (rel > entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.worst_index = j;
        entry.analytic_at_worst = a;
        entry.numeric_at_worst = numeric;
      }
    }
    entry.pass = entry.max_rel_err <= tol;
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace ravnet
