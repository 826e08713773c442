#pragma once

// Shared run configuration for the one-shot and continual release
// algorithms, plus the derived internal parameters (histogram gap, tracking
// threshold, counter budgets, noise scales).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "dphh/count_sketch.hpp"
#include "dphh/dp_bounds.hpp"

namespace dphh {

enum class ContinualNoiseScale {
  kDerived,      // 2 * logW * block sensitivity / eps
  kBoxSixteen,   // alpha sqrt(W) / (16 log^2 W)
  kBoxSqrtAlpha  // sqrt(alpha W) / (8 log^2 W)
};

struct PrivacyConfig {
  double alpha = 0.1;        // heavy-hitter threshold
  double epsilon = 1.0;      // privacy budget
  double delta = 1e-6;       // approximation slack ((eps,delta)-DP variant)
  std::uint64_t window = 1;  // W, the query window the run is tuned for
  std::uint64_t universe = 1;       // n
  std::uint64_t stream_bound = 2;   // m, upper bound on stream length
  double kappa = 1.0;               // calibration scale on structural constants
  double kappa_w = 1.0;             // exact-window fallback scale
  bool noise = true;
  std::uint64_t seed = 0;

  // Engine knobs. Zero means "derive from the constants above". Property
  // tests of the literal maintenance rules run with both cadences at 1.
  std::uint32_t ams_rows = 0;
  std::uint32_t ams_reps = 5;
  std::uint32_t cs_rows = 5;
  std::uint32_t cs_bucket_cap = 1u << 13;
  std::uint32_t spawn_every = 1;
  std::uint32_t prune_every = 1;
  CsEstimator cs_estimator = CsEstimator::kMedianSigned;
  bool l1_box_noise = false;  // Lap(1/(eps alpha log m)) instead of Lap(2/eps)
  ContinualNoiseScale continual_scale = ContinualNoiseScale::kDerived;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (universe < 1) throw std::invalid_argument("universe must be >= 1");
    if (stream_bound < 1) throw std::invalid_argument("stream bound must be >= 1");
    if (window > stream_bound) throw std::invalid_argument("window must be <= stream bound");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
    if (kappa_w < 0.0) throw std::invalid_argument("kappa_w must be >= 0");
    if (ams_reps == 0 || cs_rows == 0) throw std::invalid_argument("sketch depths must be >= 1");
    if (spawn_every == 0 || prune_every == 0) throw std::invalid_argument("cadences must be >= 1");
  }

  double log_m() const { return std::max(1.0, std::log2(static_cast<double>(stream_bound))); }
  double alpha_cubed() const { return alpha * alpha * alpha; }

  /// Histogram deletion gap: (kappa * eps / (1000 log m))^2, clamped to (0, 1/2].
  double histogram_gap() const {
    double r = kappa * epsilon / (1000.0 * log_m());
    return std::min(0.5, std::max(1e-9, r * r));
  }

  /// Tracking threshold for per-timestamp heavy-hitter sketches:
  /// min(alpha/16, kappa * alpha^3 eps / (500 log m)).
  double tracking_threshold() const {
    double t = std::min(alpha / 16.0, kappa * alpha_cubed() * epsilon / (500.0 * log_m()));
    return std::min(0.999, std::max(1e-9, t));
  }

  /// Counter budget per unit of norm estimate: kappa * alpha^3 eps / (1000 log m).
  double counter_budget_coeff() const {
    return kappa * alpha_cubed() * epsilon / (1000.0 * log_m());
  }

  /// Noise scale on the released norm: Lap(L2hat / (40 log m)).
  double norm_noise_scale(double norm_estimate) const {
    return norm_estimate / (40.0 * log_m());
  }

  /// Noise scale on thresholds and released frequencies:
  /// Lap(alpha * L2hat / (75 log m)).
  double freq_noise_scale(double norm_estimate) const {
    return alpha * norm_estimate / (75.0 * log_m());
  }

  /// L1 one-shot noise scale: 2/eps by default (sensitivity 2), the literal
  /// box value 1/(eps alpha log m) behind the flag.
  double l1_noise_scale() const {
    if (l1_box_noise) return 1.0 / (epsilon * alpha * log_m());
    return 2.0 / epsilon;
  }

  /// Window length below which the exact-window fallback applies:
  /// kappa_w * log^5 m / (alpha^2 eps^2). kappa_w = 0 disables it.
  double fallback_cutoff() const {
    double lm = log_m();
    return kappa_w * std::pow(lm, 5) / (alpha * alpha * epsilon * epsilon);
  }

  std::uint32_t derived_ams_rows() const {
    if (ams_rows != 0) return ams_rows;
    double acc = std::min(0.25, std::max(0.03, histogram_gap() / 4.0));
    double r = std::ceil(6.0 / (acc * acc));
    return static_cast<std::uint32_t>(std::min(4096.0, std::max(16.0, r)));
  }

  std::uint32_t derived_cs_buckets() const {
    double t = tracking_threshold();
    double b = std::ceil(6.0 / (t * t));
    return static_cast<std::uint32_t>(
        std::min(static_cast<double>(cs_bucket_cap), std::max(8.0, b)));
  }

  SmoothBoundParams bound_params() const {
    return SmoothBoundParams{epsilon, alpha, static_cast<double>(stream_bound), kappa};
  }

  /// Warn-not-fail configuration check from the one-shot L2 analysis.
  bool epsilon_meets_floor() const {
    return meets_epsilon_floor(bound_params(), static_cast<double>(window));
  }

  std::string epsilon_floor_warning() const {
    double floor = epsilon_floor(bound_params(), static_cast<double>(window));
    return "epsilon " + std::to_string(epsilon) +
           " is below the calibration floor " + std::to_string(floor) +
           " (kappa * 1000 log m / (alpha^3 sqrt(W))); guarantees are nominal";
  }
};

}  // namespace dphh
