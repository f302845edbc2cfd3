#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "thermolens/collection.hpp"
#include "thermolens/powerlaw.hpp"

namespace thermolens {

// ---------------------------------------------------------------------------
// Logarithmic classes
// ---------------------------------------------------------------------------

// Class n holds values in (b^(n-1), b^n]; value 1 belongs to class 1. With
// b = 10: 1-10 is class 1, 11-100 class 2, 101-1000 class 3.
int class_index(Value v, Value base);

struct ClassRow {
  int index = 0;
  Count population = 0;     // N(n)
  std::int64_t mass = 0;    // C(n), sum of values in the class
};

// Rows run from class 1 to the largest occupied class; empty classes in
// between appear with zero population.
struct ClassDecomposition {
  Value base = 10;
  std::vector<ClassRow> classes;
};

ClassDecomposition class_decompose(const Collection &c, Value base = 10);

// Adjacent-class ratios of a power law: N(n+1)/N(n) = b^-(alpha-1) and
// C(n+1)/C(n) = b^-(alpha-2). Independent of n.
struct ClassScaling {
  double pop_ratio;
  double mass_ratio;
};

ClassScaling theoretical_class_scaling(double alpha, Value base, int n = 1);

// ---------------------------------------------------------------------------
// Constrained maximum entropy
// ---------------------------------------------------------------------------

inline constexpr double kBisectionTol = 1e-10;
inline constexpr int kBisectionMaxIter = 200;

// Maximum-entropy distribution on 1..support_max at a fixed average energy:
// p_v = exp(-lambda u(v)) / Z. For the logarithmic model this is a truncated
// power law with exponent lambda, for the linear model an exponential.
struct MaxEntSolution {
  EnergyModel model = EnergyModel::Logarithmic;
  Value support_max = 0;
  double target_energy = 0.0;
  double lambda = 0.0;
  double log_partition = 0.0;
  std::vector<double> probs;  // probs[v - 1]; may underflow to 0 far in the tail
  double entropy = 0.0;
  double energy = 0.0;
  std::optional<double> efficiency;  // S / E, empty when E == 0
  // max_v |ln p_v + 1 + lambda u(v) + kappa| minimised over kappa, taken over
  // entries that did not underflow.
  double stationarity_residual = 0.0;
  // S/E - lambda = ln Z / E; zero only at an unconstrained optimum of S/E.
  std::optional<double> exponent_gap;
  std::size_t underflowed = 0;
  int iterations = 0;

  Distribution distribution() const;
};

MaxEntSolution max_entropy_oracle(double target_energy, Value support_max,
                                  EnergyModel model = EnergyModel::Logarithmic,
                                  double tol = kBisectionTol);

// Random moves along directions that keep sum p and sum p u fixed (three
// coordinates at a time, staying positive). Records the best S/E reached.
struct PerturbationCheck {
  int trials = 0;
  double oracle_efficiency = 0.0;
  double max_perturbed_efficiency = 0.0;
  int violations = 0;  // trials whose S/E exceeded the oracle's
};

PerturbationCheck perturbation_check(const MaxEntSolution &sol, int trials, std::uint64_t seed);

// Half-range of ln p_v + 1 + multiplier * u(v) over v = 1..probs.size()
// (entries with p_v below the smallest normal double are skipped).
double stationarity_residual(std::span<const double> probs, EnergyModel model, double multiplier);

// ---------------------------------------------------------------------------
// Theoretical curves
// ---------------------------------------------------------------------------

struct TheoryPoint {
  double alpha = 0.0;
  std::optional<double> entropy;
  std::optional<double> efficiency;
  std::optional<double> entropy_reduction;
  std::optional<double> energy;
  std::optional<double> free_energy;
};

struct UniformReference {
  double entropy;
  double efficiency;
  double entropy_reduction;
};

struct TheoryCurve {
  std::optional<Value> truncation;
  std::vector<TheoryPoint> points;
  std::optional<UniformReference> uniform;
};

// min, min + step, ... up to max (inclusive within rounding).
std::vector<double> alpha_grid(double min, double max, double step);

// Entropy, energy and partition sum of v^-alpha truncated to 1..n and
// renormalised.
struct TruncatedPowerLaw {
  double partition;
  double entropy;
  double energy;
};

TruncatedPowerLaw truncated_power_law(double alpha, Value n);

// S, Q, R (plus E and A = -ln Z / alpha) of the power law truncated to
// 1..n_trunc, with R = ln n_trunc - S. Also returns the uniform-distribution
// reference on the same support.
TheoryCurve efficiency_vs_alpha_curve(std::span<const double> alphas, Value n_trunc,
                                      unsigned threads = 1);

// Closed forms E = 1/(alpha-1) and A = -ln zeta(alpha) / alpha.
TheoryCurve energy_curve(std::span<const double> alphas, double tol = kDefaultZetaTol);

}  // namespace thermolens
