#pragma once

#include <optional>

#include "thermolens/collection.hpp"
#include "thermolens/powerlaw.hpp"

namespace thermolens {

// Shannon entropy S = -sum_v p_v ln p_v (nats) of the value distribution.
double entropy(const Collection &c);

// R = ln N - S.
double entropy_reduction(const Collection &c);

// E = sum_v p_v u(v).
double average_energy(const Collection &c, EnergyModel model = EnergyModel::Logarithmic);

// Q = S / E. Throws ZeroEnergyError when E == 0.
double entropy_efficiency(const Collection &c, EnergyModel model = EnergyModel::Logarithmic);

// E = 1 / (alpha - 1) for a power law with minimum value 1.
double theoretical_energy(double alpha);

// A = -ln(zeta(alpha)) / alpha.
double theoretical_free_energy(double alpha, double tol = kDefaultZetaTol);

// Q / alpha.
double fe_reduction_ratio(double q, double alpha);

// kT with the Boltzmann constant set to 1.
double temperature(double alpha);

// Metrics of one collection. S, R, E and Q are plug-in estimates from the
// histogram; alpha is the fitted exponent and A is the closed form evaluated
// at that alpha. Fields that cannot be computed (E == 0, no log-spread) are
// left empty rather than zeroed.
struct ThermoReport {
  Count population = 0;
  EnergyModel model = EnergyModel::Logarithmic;
  double entropy = 0.0;
  double entropy_reduction = 0.0;
  double avg_energy = 0.0;
  std::optional<double> efficiency;
  std::optional<double> alpha;
  std::optional<double> free_energy;
  std::optional<double> fe_ratio;

  double log_population() const;
  std::optional<double> temperature() const;
};

ThermoReport thermo_report(const Collection &c, EnergyModel model = EnergyModel::Logarithmic);

}  // namespace thermolens
