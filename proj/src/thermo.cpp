#include "thermolens/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "thermolens/error.hpp"
#include "thermolens/numeric.hpp"

namespace thermolens {

double entropy(const Collection &c) {
  if (c.empty()) throw EmptyCollectionError();
  // -sum p ln p with p = s/N, rearranged as ln N - (sum s ln s) / N so the
  // single-value and all-distinct extremes come out exact.
  const auto n = static_cast<double>(c.population());
  NeumaierSum weighted;
  for (const Bin &b : c.bins()) {
    const auto s = static_cast<double>(b.count);
    weighted += s * std::log(s);
  }
  const double s = std::log(n) - weighted.value() / n;
  return std::clamp(s, 0.0, std::log(static_cast<double>(c.distinct())));
}

double entropy_reduction(const Collection &c) {
  const double s = entropy(c);
  return std::log(static_cast<double>(c.population())) - s;
}

double average_energy(const Collection &c, EnergyModel model) {
  if (c.empty()) throw EmptyCollectionError();
  NeumaierSum total;
  for (const Bin &b : c.bins()) {
    total += static_cast<double>(b.count) * energy_of(b.value, model);
  }
  return total.value() / static_cast<double>(c.population());
}

double entropy_efficiency(const Collection &c, EnergyModel model) {
  const double e = average_energy(c, model);
  if (e == 0.0) throw ZeroEnergyError();
  return entropy(c) / e;
}

double theoretical_energy(double alpha) {
  if (!(alpha > 1.0)) throw DomainError("divergent energy: alpha must exceed 1");
  return 1.0 / (alpha - 1.0);
}

double theoretical_free_energy(double alpha, double tol) {
  return -std::log(zeta(alpha, tol)) / alpha;
}

double fe_reduction_ratio(double q, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  return q / alpha;
}

double temperature(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  return 1.0 / alpha;
}

double ThermoReport::log_population() const {
  return std::log(static_cast<double>(population));
}

std::optional<double> ThermoReport::temperature() const {
  if (!alpha) return std::nullopt;
  return 1.0 / *alpha;
}

ThermoReport thermo_report(const Collection &c, EnergyModel model) {
  ThermoReport r;
  r.population = c.population();
  r.model = model;
  r.entropy = entropy(c);
  r.entropy_reduction = std::log(static_cast<double>(c.population())) - r.entropy;
  r.avg_energy = average_energy(c, model);
  if (r.avg_energy != 0.0) r.efficiency = r.entropy / r.avg_energy;
  try {
    r.alpha = mle_fit(c);
  } catch (const DegenerateError &) {
  }
  if (r.alpha && *r.alpha > kMinAlpha) {
    r.free_energy = theoretical_free_energy(*r.alpha);
    if (r.efficiency) r.fe_ratio = fe_reduction_ratio(*r.efficiency, *r.alpha);
  }
  return r;
}

}  // namespace thermolens
