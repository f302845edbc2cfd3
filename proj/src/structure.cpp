#include "thermolens/structure.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>

#include "thermolens/error.hpp"
#include "thermolens/numeric.hpp"
#include "thermolens/parallel.hpp"
#include "thermolens/thermo.hpp"

namespace thermolens {

int class_index(Value v, Value base) {
  if (base < 2) throw DomainError("class base must be >= 2");
  if (v < 1) throw DomainError("non-positive contribution value");
  int n = 1;
  Value upper = base;
  while (v > upper) {
    ++n;
    if (upper > std::numeric_limits<Value>::max() / base) break;
    upper *= base;
  }
  return n;
}

ClassDecomposition class_decompose(const Collection &c, Value base) {
  if (c.empty()) throw EmptyCollectionError();
  ClassDecomposition d;
  d.base = base;
  const int top = class_index(c.max_value(), base);
  d.classes.resize(static_cast<std::size_t>(top));
  for (int n = 1; n <= top; ++n) d.classes[static_cast<std::size_t>(n - 1)].index = n;
  for (const Bin &b : c.bins()) {
    ClassRow &row = d.classes[static_cast<std::size_t>(class_index(b.value, base) - 1)];
    row.population += b.count;
    std::int64_t mass = 0;
    if (__builtin_mul_overflow(b.value, b.count, &mass) ||
        __builtin_add_overflow(row.mass, mass, &row.mass)) {
      throw DomainError("class mass overflows 64-bit range");
    }
  }
  return d;
}

ClassScaling theoretical_class_scaling(double alpha, Value base, int n) {
  if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
  if (base < 2) throw DomainError("class base must be >= 2");
  if (n < 1) throw DomainError("class index must be >= 1");
  const auto b = static_cast<double>(base);
  return {std::pow(b, -(alpha - 1.0)), std::pow(b, -(alpha - 2.0))};
}

// ---------------------------------------------------------------------------

namespace {

struct Moments {
  double log_partition;
  double energy;
};

// Energy of p_v ∝ exp(-lambda u_v), with a log-sum-exp shift.
Moments gibbs_moments(std::span<const double> u, double lambda) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const double x : u) shift = std::max(shift, -lambda * x);
  NeumaierSum z;
  NeumaierSum zu;
  for (const double x : u) {
    const double w = std::exp(-lambda * x - shift);
    z += w;
    zu += w * x;
  }
  return {shift + std::log(z.value()), zu.value() / z.value()};
}

}  // namespace

double stationarity_residual(std::span<const double> probs, EnergyModel model, double multiplier) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= DBL_MIN)) continue;
    const double r =
        std::log(probs[i]) + 1.0 + multiplier * energy_of(static_cast<Value>(i + 1), model);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (lo > hi) return 0.0;
  return 0.5 * (hi - lo);
}

Distribution MaxEntSolution::distribution() const {
  std::vector<ProbabilityBin> bins;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) bins.push_back({static_cast<Value>(i + 1), probs[i]});
  }
  return Distribution(std::move(bins));
}

MaxEntSolution max_entropy_oracle(double target_energy, Value support_max, EnergyModel model,
                                  double tol) {
  if (support_max < 2) throw DomainError("support must contain at least two values");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  std::vector<double> u(static_cast<std::size_t>(support_max));
  for (Value v = 1; v <= support_max; ++v) u[static_cast<std::size_t>(v - 1)] = energy_of(v, model);
  if (!(target_energy > u.front() && target_energy < u.back())) {
    throw DomainError("target energy outside the attainable range");
  }

  // Energy is strictly decreasing in lambda.
  constexpr double kLambdaLimit = 1e12;
  double lo = -1.0;
  double hi = 1.0;
  while (gibbs_moments(u, lo).energy <= target_energy) {
    hi = lo;
    lo *= 2.0;
    if (lo < -kLambdaLimit) throw ConvergenceError("could not bracket lambda");
  }
  while (gibbs_moments(u, hi).energy >= target_energy) {
    lo = hi;
    hi *= 2.0;
    if (hi > kLambdaLimit) throw ConvergenceError("could not bracket lambda");
  }

  int iterations = 0;
  while (hi - lo > tol) {
    if (++iterations > kBisectionMaxIter) {
      throw ConvergenceError("bisection did not converge within 200 iterations");
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at floating-point resolution
    (gibbs_moments(u, mid).energy > target_energy ? lo : hi) = mid;
  }

  MaxEntSolution sol;
  sol.model = model;
  sol.support_max = support_max;
  sol.target_energy = target_energy;
  sol.lambda = 0.5 * (lo + hi);
  sol.iterations = iterations;
  sol.log_partition = gibbs_moments(u, sol.lambda).log_partition;
  sol.probs.resize(u.size());
  NeumaierSum s;
  NeumaierSum e;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double p = std::exp(-sol.lambda * u[i] - sol.log_partition);
    sol.probs[i] = p;
    if (p < DBL_MIN) {
      ++sol.underflowed;
      continue;
    }
    s += -p * std::log(p);
    e += p * u[i];
  }
  sol.entropy = s.value();
  sol.energy = e.value();
  if (sol.energy != 0.0) {
    sol.efficiency = sol.entropy / sol.energy;
    sol.exponent_gap = *sol.efficiency - sol.lambda;
  }
  sol.stationarity_residual = stationarity_residual(sol.probs, model, sol.lambda);
  return sol;
}

PerturbationCheck perturbation_check(const MaxEntSolution &sol, int trials, std::uint64_t seed) {
  if (!sol.efficiency) throw ZeroEnergyError();
  if (sol.probs.size() < 3) throw DomainError("perturbation needs at least three support points");
  PerturbationCheck check;
  check.trials = trials;
  check.oracle_efficiency = *sol.efficiency;
  check.max_perturbed_efficiency = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sol.probs.size() - 1);
  std::uniform_real_distribution<double> scale(0.05, 0.95);
  const auto neg_plogp = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };

  for (int t = 0; t < trials; ++t) {
    std::size_t idx[3];
    do {
      idx[0] = pick(rng);
      idx[1] = pick(rng);
      idx[2] = pick(rng);
    } while (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2]);
    double u[3];
    for (int k = 0; k < 3; ++k) u[k] = energy_of(static_cast<Value>(idx[k] + 1), sol.model);
    // Orthogonal to (1,1,1) and (u0,u1,u2).
    const double d[3] = {u[2] - u[1], u[0] - u[2], u[1] - u[0]};
    double step = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (d[k] < 0.0) step = std::min(step, sol.probs[idx[k]] / -d[k]);
    }
    if ((rng() & 1U) != 0) {
      // Flip direction: the bound comes from the positive components instead.
      step = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        if (d[k] > 0.0) step = std::min(step, sol.probs[idx[k]] / d[k]);
      }
      step = -step;
    }
    step *= scale(rng);
    double ds = 0.0;
    double de = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double p = sol.probs[idx[k]];
      const double moved = p + step * d[k];
      ds += neg_plogp(moved) - neg_plogp(p);
      de += step * d[k] * u[k];
    }
    const double q = (sol.entropy + ds) / (sol.energy + de);
    check.max_perturbed_efficiency = std::max(check.max_perturbed_efficiency, q);
    if (q > check.oracle_efficiency) ++check.violations;
  }
  return check;
}

// ---------------------------------------------------------------------------

std::vector<double> alpha_grid(double min, double max, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (!(max >= min)) throw DomainError("grid maximum below minimum");
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = min + static_cast<double>(i) * step;
  return grid;
}

TruncatedPowerLaw truncated_power_law(double alpha, Value n) {
  if (n < 1) throw DomainError("truncation must be >= 1");
  NeumaierSum z;
  NeumaierSum zu;
  for (Value v = 1; v <= n; ++v) {
    const double lv = std::log(static_cast<double>(v));
    const double w = std::exp(-alpha * lv);
    z += w;
    zu += w * lv;
  }
  const double partition = z.value();
  const double energy = zu.value() / partition;
  // ln p_v = -alpha ln v - ln Z, so -sum p ln p = alpha E + ln Z.
  return {partition, alpha * energy + std::log(partition), energy};
}

TheoryCurve efficiency_vs_alpha_curve(std::span<const double> alphas, Value n_trunc,
                                      unsigned threads) {
  if (n_trunc < 10) throw DomainError("truncation must be >= 10");
  for (const double a : alphas) {
    if (!(a > kMinAlpha)) throw DomainError("zeta divergent: alpha must exceed 1 + 1e-6");
  }
  TheoryCurve curve;
  curve.truncation = n_trunc;
  curve.points.resize(alphas.size());
  const double log_n = std::log(static_cast<double>(n_trunc));
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    const TruncatedPowerLaw t = truncated_power_law(alphas[i], n_trunc);
    TheoryPoint &p = curve.points[i];
    p.alpha = alphas[i];
    p.entropy = t.entropy;
    p.efficiency = t.entropy / t.energy;
    p.entropy_reduction = log_n - t.entropy;
    p.energy = t.energy;
    p.free_energy = -std::log(t.partition) / alphas[i];
  });
  // Uniform on 1..n: E = ln(n!) / n.
  const double uniform_energy = std::lgamma(static_cast<double>(n_trunc) + 1.0) /
                                static_cast<double>(n_trunc);
  curve.uniform = UniformReference{log_n, log_n / uniform_energy, 0.0};
  return curve;
}

TheoryCurve energy_curve(std::span<const double> alphas, double tol) {
  TheoryCurve curve;
  curve.points.reserve(alphas.size());
  for (const double a : alphas) {
    TheoryPoint p;
    p.alpha = a;
    p.energy = theoretical_energy(a);
    p.free_energy = theoretical_free_energy(a, tol);
    curve.points.push_back(p);
  }
  return curve;
}

}  // namespace thermolens
