#pragma once

#include <cstdint>
#include <vector>

#include "thermolens/collection.hpp"

namespace thermolens {

// Exponents at or below this are rejected wherever a zeta normaliser is needed.
inline constexpr double kMinAlpha = 1.0 + 1e-6;
inline constexpr double kDefaultZetaTol = 1e-10;
inline constexpr double kDefaultKsThreshold = 0.1;

// Largest value the sampler emits (exactly representable as a double).
inline constexpr Value kMaxSampleValue = Value{1} << 53;

// Sum of v^-alpha over v >= start, within absolute error tol.
//
// Terms are summed explicitly up to a cutoff V, the remainder is bracketed by
// the convexity bounds
//
//   int_V^inf v^-a dv + V^-a / 2  <=  sum_{v>=V} v^-a  <=  int_{V-1/2}^inf v^-a dv
//
// and the bracket midpoint is returned. V is the smallest cutoff whose
// bracket is no wider than tol.
double power_tail(double alpha, Value start, double tol = kDefaultZetaTol);

// Riemann zeta, i.e. power_tail(alpha, 1, tol).
double zeta(double alpha, double tol = kDefaultZetaTol);

// Discrete power law p_v = v^-alpha / Z on v >= v_min, with cached partial
// sums up to the tail cutoff and the analytic tail bracket beyond it.
// cdf() is nondecreasing in v and bounded by 1.
class PowerLawCdf {
 public:
  explicit PowerLawCdf(double alpha, Value v_min = 1, double tol = kDefaultZetaTol);

  double alpha() const noexcept { return alpha_; }
  Value v_min() const noexcept { return v_min_; }
  double normalizer() const noexcept { return normalizer_; }

  double pmf(Value v) const;
  // P(X <= v).
  double cdf(Value v) const;
  // Sum of w^-alpha over w >= v (unnormalised).
  double tail(Value v) const;
  // Smallest v with cdf(v) > u, for u in [0, 1). Capped at kMaxSampleValue.
  Value quantile(double u) const;

 private:
  double analytic_tail(Value v) const;

  double alpha_;
  Value v_min_;
  Value cutoff_;                 // first value handled by analytic_tail
  std::vector<double> prefix_;   // prefix_[k] = sum_{w=v_min}^{v_min+k} w^-alpha
  double head_ = 0.0;            // sum over [v_min, cutoff)
  double cutoff_tail_ = 0.0;     // analytic_tail(cutoff_)
  double normalizer_ = 0.0;
};

double theoretical_pmf(double alpha, Value v, Value v_min = 1);
double theoretical_cdf(double alpha, Value v, Value v_min = 1);

// Continuous-approximation maximum-likelihood exponent
//   alpha = 1 + N / sum_i ln(v_i / v_min)
// with v_min the smallest observed value. Throws DegenerateError when every
// value is equal.
double mle_fit(const Collection &c);

// Largest gap between the empirical cdf of c and the fitted discrete power
// law on v >= v_min. Both one-sided gaps at each support point are checked,
// which gives the exact supremum over all integers.
double ks_statistic(const Collection &c, double alpha, Value v_min = 1);

struct PowerLawFit {
  double alpha = 0.0;
  Value v_min = 1;
  double zeta_value = 0.0;  // normaliser sum_{v >= v_min} v^-alpha
  double ks_stat = 0.0;
  bool is_power_law = false;
  double threshold = kDefaultKsThreshold;

  // Inverse temperature alpha = 1/kT with k = 1.
  double temperature() const noexcept { return 1.0 / alpha; }
};

// Label recorded with every fit: which estimator produced alpha.
inline constexpr const char *kEstimatorName = "continuous-mle";

// mle_fit, then ks_statistic against the fitted law; power law iff D < threshold.
PowerLawFit classify(const Collection &c, double threshold = kDefaultKsThreshold);

// n independent draws from theoretical_pmf(alpha, .) by inverse-cdf search.
// Deterministic for a fixed seed.
Collection sample(double alpha, Count n, std::uint64_t seed);

}  // namespace thermolens
