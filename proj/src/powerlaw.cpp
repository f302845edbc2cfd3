#include "thermolens/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "thermolens/error.hpp"
#include "thermolens/numeric.hpp"

namespace thermolens {
namespace {

constexpr Value kMaxCutoff = Value{1} << 26;

void check_alpha(double alpha) {
  if (!(alpha > kMinAlpha)) {
    throw DomainError("zeta divergent: alpha must exceed 1 + 1e-6");
  }
}

double term(double alpha, Value v) { return std::pow(static_cast<double>(v), -alpha); }

// int_{v-1/2}^{v} x^-alpha dx
double half_step_integral(double alpha, Value v) {
  const double x = static_cast<double>(v);
  return std::pow(x, 1.0 - alpha) *
         std::expm1((1.0 - alpha) * std::log1p(-0.5 / x)) / (alpha - 1.0);
}

// Width of the tail bracket at cutoff v.
double bracket_width(double alpha, Value v) {
  return half_step_integral(alpha, v) - 0.5 * term(alpha, v);
}

// Midpoint of the tail bracket for sum_{w >= v} w^-alpha.
double tail_midpoint(double alpha, Value v) {
  const double x = static_cast<double>(v);
  const double integral = std::pow(x, 1.0 - alpha) / (alpha - 1.0);
  return integral + 0.5 * (0.5 * term(alpha, v) + half_step_integral(alpha, v));
}

Value find_cutoff(double alpha, Value start, double tol) {
  if (bracket_width(alpha, start) <= tol) return start;
  Value lo = start;
  Value hi = std::max<Value>(start, 1);
  while (bracket_width(alpha, hi) > tol) {
    lo = hi;
    hi *= 2;
    if (hi > kMaxCutoff) {
      throw DomainError("tolerance too small for power-law tail evaluation");
    }
  }
  // bracket_width(lo) > tol >= bracket_width(hi)
  while (hi - lo > 1) {
    const Value mid = lo + (hi - lo) / 2;
    (bracket_width(alpha, mid) <= tol ? hi : lo) = mid;
  }
  return hi;
}

void check_tol(double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
}

double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double power_tail(double alpha, Value start, double tol) {
  check_alpha(alpha);
  check_tol(tol);
  if (start < 1) throw DomainError("power tail must start at v >= 1");
  const Value cutoff = find_cutoff(alpha, start, tol);
  NeumaierSum sum;
  for (Value v = cutoff - 1; v >= start; --v) sum += term(alpha, v);
  sum += tail_midpoint(alpha, cutoff);
  return sum.value();
}

double zeta(double alpha, double tol) { return power_tail(alpha, 1, tol); }

PowerLawCdf::PowerLawCdf(double alpha, Value v_min, double tol) : alpha_(alpha), v_min_(v_min) {
  check_alpha(alpha);
  check_tol(tol);
  if (v_min < 1) throw DomainError("v_min must be >= 1");
  cutoff_ = find_cutoff(alpha, v_min, tol);
  prefix_.reserve(static_cast<std::size_t>(cutoff_ - v_min));
  NeumaierSum running;
  for (Value v = v_min; v < cutoff_; ++v) {
    running += term(alpha, v);
    prefix_.push_back(running.value());
  }
  head_ = prefix_.empty() ? 0.0 : prefix_.back();
  cutoff_tail_ = tail_midpoint(alpha, cutoff_);
  normalizer_ = head_ + cutoff_tail_;
}

double PowerLawCdf::analytic_tail(Value v) const { return tail_midpoint(alpha_, v); }

double PowerLawCdf::pmf(Value v) const {
  if (v < v_min_) return 0.0;
  return term(alpha_, v) / normalizer_;
}

double PowerLawCdf::tail(Value v) const {
  if (v <= v_min_) return normalizer_;
  if (v >= cutoff_) return analytic_tail(v);
  return (head_ - prefix_[static_cast<std::size_t>(v - v_min_ - 1)]) + cutoff_tail_;
}

double PowerLawCdf::cdf(Value v) const {
  if (v < v_min_) return 0.0;
  if (v < cutoff_) return prefix_[static_cast<std::size_t>(v - v_min_)] / normalizer_;
  const double mass = head_ + (cutoff_tail_ - analytic_tail(v + 1));
  return std::min(1.0, mass / normalizer_);
}

Value PowerLawCdf::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("quantile level must lie in [0, 1)");
  const double target = u * normalizer_;
  const auto it = std::upper_bound(prefix_.begin(), prefix_.end(), target);
  if (it != prefix_.end()) {
    return v_min_ + static_cast<Value>(it - prefix_.begin());
  }

  // cdf(v) > u  <=>  analytic_tail(v + 1) < normalizer - target
  const double remaining = normalizer_ - target;
  if (!(remaining > 0.0)) return kMaxSampleValue;
  Value lo = cutoff_ - 1;
  Value hi = cutoff_;
  while (analytic_tail(hi + 1) >= remaining) {
    lo = hi;
    if (hi >= kMaxSampleValue / 2) {
      hi = kMaxSampleValue;
      if (analytic_tail(hi + 1) >= remaining) return kMaxSampleValue;
      break;
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    const Value mid = lo + (hi - lo) / 2;
    (analytic_tail(mid + 1) < remaining ? hi : lo) = mid;
  }
  return hi;
}

double theoretical_pmf(double alpha, Value v, Value v_min) {
  if (v < 1) throw DomainError("value must be >= 1");
  return PowerLawCdf(alpha, v_min).pmf(v);
}

double theoretical_cdf(double alpha, Value v, Value v_min) {
  return PowerLawCdf(alpha, v_min).cdf(v);
}

double mle_fit(const Collection &c) {
  if (c.empty()) throw EmptyCollectionError();
  const auto v_min = static_cast<double>(c.min_value());
  NeumaierSum log_spread;
  for (const Bin &b : c.bins()) {
    log_spread += static_cast<double>(b.count) * std::log(static_cast<double>(b.value) / v_min);
  }
  const double spread = log_spread.value();
  if (!(spread > 0.0)) throw DegenerateError("zero log-spread");
  return 1.0 + static_cast<double>(c.population()) / spread;
}

namespace {

double ks_against(const Collection &c, const PowerLawCdf &law) {
  const auto n = static_cast<double>(c.population());
  Count cumulative = 0;
  double d = 0.0;
  for (const Bin &b : c.bins()) {
    d = std::max(d, std::abs(static_cast<double>(cumulative) / n - law.cdf(b.value - 1)));
    cumulative += b.count;
    d = std::max(d, std::abs(static_cast<double>(cumulative) / n - law.cdf(b.value)));
  }
  return std::min(d, 1.0);
}

}  // namespace

double ks_statistic(const Collection &c, double alpha, Value v_min) {
  if (c.empty()) throw EmptyCollectionError();
  check_alpha(alpha);
  if (c.min_value() < v_min) throw DomainError("observed value below v_min");
  return ks_against(c, PowerLawCdf(alpha, v_min));
}

PowerLawFit classify(const Collection &c, double threshold) {
  if (!(threshold >= 0.0)) throw DomainError("KS threshold must be non-negative");
  PowerLawFit fit;
  fit.alpha = mle_fit(c);
  fit.v_min = c.min_value();
  fit.threshold = threshold;
  const PowerLawCdf law(fit.alpha, fit.v_min);
  fit.zeta_value = law.normalizer();
  fit.ks_stat = ks_against(c, law);
  fit.is_power_law = fit.ks_stat < threshold;
  return fit;
}

Collection sample(double alpha, Count n, std::uint64_t seed) {
  check_alpha(alpha);
  if (n < 1) throw DomainError("sample size must be >= 1");
  const PowerLawCdf law(alpha);
  std::mt19937_64 rng(seed);
  std::vector<Value> draws;
  draws.reserve(static_cast<std::size_t>(n));
  for (Count i = 0; i < n; ++i) draws.push_back(law.quantile(uniform01(rng)));
  return Collection::from_values(draws);
}

}  // namespace thermolens
