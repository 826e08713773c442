#pragma once

// Noise calibration helpers: smooth upper bounds on the local sensitivity of
// the released norm and frequency estimates, global-sensitivity constants,
// and privacy-budget composition arithmetic. log means log2 throughout; the
// calibration scale kappa multiplies the 1/200-style constants so the same
// formulas remain usable at desk scale.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dphh {

struct SmoothBoundParams {
  double epsilon = 1.0;
  double alpha = 0.5;
  double stream_bound = 2.0;  // m, upper bound on the stream length
  double kappa = 1.0;         // calibration scale on the constants

  double log_m() const { return std::max(1.0, std::log2(stream_bound)); }

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (!(stream_bound >= 1.0)) throw std::invalid_argument("stream bound must be >= 1");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  }
};

/// Smooth upper bound on the local sensitivity of the released norm
/// estimate: S(g) = kappa * eps * g / (200 log m) + 2.
inline double l2_smooth_bound(double g_value, const SmoothBoundParams& p) {
  if (g_value < 0.0) throw std::invalid_argument("l2_smooth_bound: value must be >= 0");
  return p.kappa * p.epsilon * g_value / (200.0 * p.log_m()) + 2.0;
}

/// Smoothness rate matching l2_smooth_bound: beta = kappa * eps / (150 log m).
inline double l2_smooth_beta(const SmoothBoundParams& p) {
  return p.kappa * p.epsilon / (150.0 * p.log_m());
}

/// Smooth upper bound on the local sensitivity of a released per-item
/// frequency estimate: S(h) = kappa * alpha^3 * eps * h / (200 log m) + 2.
inline double freq_smooth_bound(double h_value, const SmoothBoundParams& p) {
  if (h_value < 0.0) throw std::invalid_argument("freq_smooth_bound: value must be >= 0");
  double a3 = p.alpha * p.alpha * p.alpha;
  return p.kappa * a3 * p.epsilon * h_value / (200.0 * p.log_m()) + 2.0;
}

inline double freq_smooth_beta(const SmoothBoundParams& p) {
  double a3 = p.alpha * p.alpha * p.alpha;
  return p.kappa * a3 * p.epsilon / (150.0 * p.log_m());
}

/// L1 sensitivity of a Misra-Gries release over a block: threshold * length.
inline double mg_release_sensitivity(double mg_threshold, double block_length) {
  if (block_length < 0.0) {
    throw std::invalid_argument("mg_release_sensitivity: block length must be >= 0");
  }
  return mg_threshold * block_length;
}

/// Laplace scale for a smooth-bound value S at privacy budget eps: 2S/eps.
inline double smooth_laplace_scale(double bound_value, double epsilon) {
  if (!(bound_value > 0.0)) throw std::invalid_argument("smooth_laplace_scale: bound must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("smooth_laplace_scale: epsilon must be > 0");
  return 2.0 * bound_value / epsilon;
}

/// Configuration floor for the one-shot L2 release:
/// eps > kappa * 1000 log m / (alpha^3 sqrt(W)). Checked warn-not-fail.
inline double epsilon_floor(const SmoothBoundParams& p, double window) {
  double a3 = p.alpha * p.alpha * p.alpha;
  return p.kappa * 1000.0 * p.log_m() / (a3 * std::sqrt(std::max(1.0, window)));
}

inline bool meets_epsilon_floor(const SmoothBoundParams& p, double window) {
  return p.epsilon > epsilon_floor(p, window);
}

/// Basic composition: budgets add coordinatewise.
inline std::pair<double, double> compose_basic(
    const std::vector<std::pair<double, double>>& budgets) {
  double e = 0.0, d = 0.0;
  for (const auto& [ei, di] : budgets) {
    e += ei;
    d += di;
  }
  return {e, d};
}

/// Advanced composition of k mechanisms, each (eps, delta)-private, with
/// slack delta_prime.
inline std::pair<double, double> compose_advanced(std::uint64_t k, double eps,
                                                  double delta,
                                                  double delta_prime) {
  if (!(delta_prime > 0.0)) throw std::invalid_argument("compose_advanced: delta_prime must be > 0");
  double kd = static_cast<double>(k);
  double e = eps * std::sqrt(2.0 * kd * std::log(1.0 / delta_prime)) +
             kd * eps * (std::exp(eps) - 1.0) / (std::exp(eps) + 1.0);
  return {e, kd * delta + delta_prime};
}

/// Clamps a raw norm estimate into the accuracy band around the exact value
/// assumed by the smooth-bound analysis. Idempotent and order-preserving;
/// the test suite uses it, production code has no oracle to clamp against.
inline double clamp_to_band(double raw, double exact, double rel) {
  double lo = (1.0 - rel) * exact;
  double hi = (1.0 + rel) * exact;
  return std::min(std::max(raw, lo), hi);
}

}  // namespace dphh
