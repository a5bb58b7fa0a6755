#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "seirenes/policy.hpp"
#include "seirenes/tasks.hpp"

namespace seirenes::testing {

// Small pool with fixed truths, for hand-checked cases.
inline TaskPool make_pool(std::vector<int> truths, int k, double difficulty = 0.5) {
  TaskPool pool;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    pool.questions.push_back({static_cast<QuestionId>(i), k, truths[i], difficulty});
  }
  return pool;
}

// Every trainable entry drawn from N(0, scale²).
inline PolicyParams random_params(const PolicyShape& shape, std::mt19937_64& gen,
                                  double scale = 1.0) {
  auto p = PolicyParams::zeros(shape, {0.5, 1.0, 1.5});
  std::normal_distribution<double> n(0.0, scale);
  for (std::size_t i = 0; i < p.trainable_size(); ++i) p.trainable(i) = n(gen);
  return p;
}

// Central differences of f over every trainable coordinate.
inline PolicyParams finite_difference(const PolicyParams& at,
                                      const std::function<double(const PolicyParams&)>& f,
                                      double h = 1e-5) {
  auto grad = PolicyParams::zeros_like(at);
  auto probe = at;
  for (std::size_t i = 0; i < at.trainable_size(); ++i) {
    const double x = at.trainable(i);
    probe.trainable(i) = x + h;
    const double up = f(probe);
    probe.trainable(i) = x - h;
    const double down = f(probe);
    probe.trainable(i) = x;
    grad.trainable(i) = (up - down) / (2.0 * h);
  }
  return grad;
}

// Largest relative error over coordinates where either gradient is
// materially nonzero; tiny coordinates are compared absolutely.
inline double max_relative_error(const PolicyParams& analytic, const PolicyParams& numeric,
                                 double floor = 1e-7) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.trainable_size(); ++i) {
    const double a = analytic.trainable(i);
    const double n = numeric.trainable(i);
    const double mag = std::max(std::abs(a), std::abs(n));
    const double err = mag > floor ? std::abs(a - n) / mag : std::abs(a - n) / floor * 1e-4;
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace seirenes::testing
