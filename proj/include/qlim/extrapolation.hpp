#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace qlim {

struct StepEstimate {
  double step = 0.0;
  double estimate = 0.0;
};

struct LimitOptions {
  double initial_step = 0.0;  // 0 selects 1e-3 / k
  int max_halvings = 8;
  double rel_tol = 1e-6;
};

struct LimitResult {
  Eigen::VectorXd value;
  double reduced = 0.0;
  std::vector<StepEstimate> steps;  // raw estimate at each step
  std::vector<double> extrapolants;  // diagonal of the Richardson tableau
  bool converged = false;
};

// Richardson extrapolation in h^2 of a vector-valued sample(h), halving h each level.
// reduce() maps a sample to the scalar used for the convergence test.
template <typename Sample, typename Reduce>
LimitResult richardson_limit(Sample&& sample, Reduce&& reduce, double h0, const LimitOptions& opt,
                             double abs_floor) {
  LimitResult out;
  std::vector<std::vector<Eigen::VectorXd>> t;
  double h = h0;
  for (int i = 0; i <= opt.max_halvings; ++i, h /= 2.0) {
    std::vector<Eigen::VectorXd> row{sample(h)};
    out.steps.push_back({h, reduce(row[0])});
    double factor = 1.0;
    for (int j = 1; j <= i; ++j) {
      factor *= 4.0;
      row.push_back(row[j - 1] + (row[j - 1] - t[i - 1][j - 1]) / (factor - 1.0));
    }
    t.push_back(std::move(row));
    out.value = t[i][i];
    out.reduced = reduce(out.value);
    out.extrapolants.push_back(out.reduced);
    if (i >= 2) {
      const double diff = std::abs(out.extrapolants[i] - out.extrapolants[i - 1]);
      if (diff <= opt.rel_tol * std::abs(out.reduced) + abs_floor) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace qlim
