#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace seirenes {

inline double logsumexp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

inline std::vector<double> log_softmax(std::span<const double> x) {
  const double lse = logsumexp(x);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
  return out;
}

inline std::vector<double> softmax(std::span<const double> x) {
  auto out = log_softmax(x);
  for (double& v : out) v = std::exp(v);
  return out;
}

// Shannon entropy in nats; 0·log 0 is taken as 0.
inline double entropy_of(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// KL(p || q) for two categorical distributions given as logits.
inline double kl_from_logits(std::span<const double> p_logits, std::span<const double> q_logits) {
  const auto lp = log_softmax(p_logits);
  const auto lq = log_softmax(q_logits);
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const double p = std::exp(lp[i]);
    if (p > 0.0) kl += p * (lp[i] - lq[i]);
  }
  return std::max(kl, 0.0);
}

}  // namespace seirenes
