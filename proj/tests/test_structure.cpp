#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support/oracles.hpp"
#include "thermolens/error.hpp"
#include "thermolens/structure.hpp"
#include "thermolens/thermo.hpp"

using namespace thermolens;

namespace {

Collection of(std::vector<Bin> bins) { return Collection::from_bins(std::move(bins)); }

}  // namespace

TEST(ClassIndex, BoundaryRule) {
  EXPECT_EQ(class_index(1, 10), 1);
  EXPECT_EQ(class_index(10, 10), 1);
  EXPECT_EQ(class_index(11, 10), 2);
  EXPECT_EQ(class_index(100, 10), 2);
  EXPECT_EQ(class_index(101, 10), 3);
  EXPECT_EQ(class_index(4, 2), 2);
  EXPECT_EQ(class_index(5, 2), 3);
  EXPECT_EQ(class_index(std::numeric_limits<Value>::max(), 10), 19);
  EXPECT_THROW(class_index(5, 1), DomainError);
}

TEST(ClassDecompose, Examples) {
  const auto d = class_decompose(of({{1, 1}, {5, 1}, {10, 1}, {11, 1}, {100, 1}, {101, 1}}));
  ASSERT_EQ(d.classes.size(), 3u);
  EXPECT_EQ(d.classes[0].population, 3);
  EXPECT_EQ(d.classes[1].population, 2);
  EXPECT_EQ(d.classes[2].population, 1);

  const auto single = class_decompose(of({{1, 7}}));
  ASSERT_EQ(single.classes.size(), 1u);
  EXPECT_EQ(single.classes[0].population, 7);
  EXPECT_EQ(single.classes[0].mass, 7);

  const auto edges = class_decompose(of({{1, 1}, {10, 1}, {100, 1}}));
  EXPECT_EQ(edges.classes[0].mass, 11);
  EXPECT_EQ(edges.classes[1].mass, 100);

  EXPECT_THROW(class_decompose(Collection{}), EmptyCollectionError);
}

TEST(ClassDecompose, EmptyClassesInBetween) {
  const auto d = class_decompose(of({{2, 1}, {5000, 3}}));
  ASSERT_EQ(d.classes.size(), 4u);
  EXPECT_EQ(d.classes[1].population, 0);
  EXPECT_EQ(d.classes[2].population, 0);
  EXPECT_EQ(d.classes[3].index, 4);
}

TEST(ClassDecompose, ConservesPopulationAndMass) {
  std::mt19937_64 rng(77);
  for (const Value base : {2, 3, 10, 16}) {
    for (int t = 0; t < 25; ++t) {
      const Collection c = sample(1.6, 2000, rng());
      const auto d = class_decompose(c, base);
      Count pop = 0;
      std::int64_t mass = 0;
      for (const auto &row : d.classes) {
        pop += row.population;
        mass += row.mass;
      }
      EXPECT_EQ(pop, c.population());
      EXPECT_EQ(mass, c.total_value());
    }
  }
}

TEST(ClassScaling, Examples) {
  for (const Value b : {2, 10, 100}) {
    for (const int n : {1, 2, 5}) {
      EXPECT_EQ(theoretical_class_scaling(2.0, b, n).mass_ratio, 1.0);
    }
  }
  EXPECT_NEAR(theoretical_class_scaling(2.0, 10).pop_ratio, 0.1, 1e-15);
  EXPECT_NEAR(theoretical_class_scaling(1.5, 10).mass_ratio, std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(theoretical_class_scaling(1.5, 10).mass_ratio, 3.1623, 1e-4);
}

TEST(ClassScaling, SampledPopulationSlope) {
  const Collection c = sample(2.0, 1000000, 2718);
  const auto d = class_decompose(c, 10);
  // Least-squares slope of ln N(n) over n = 1, 2, 3.
  const double y1 = std::log(static_cast<double>(d.classes[0].population));
  const double y3 = std::log(static_cast<double>(d.classes[2].population));
  const double slope = (y3 - y1) / 2.0;
  const double expected = -(2.0 - 1.0) * std::log(10.0);
  EXPECT_NEAR(slope, expected, 0.15 * std::abs(expected));
}

TEST(MaxEntropy, LogarithmicMatchesTruncatedEnergyRoot) {
  const MaxEntSolution s = max_entropy_oracle(1.0, 10000, EnergyModel::Logarithmic);
  const double root = oracle::solve_truncated_energy(1.0, 10000);
  EXPECT_NEAR(root, 1.6736873870881286, 1e-9);
  EXPECT_NEAR(s.lambda, root, 1e-3);
  EXPECT_NEAR(s.lambda, root, 1e-8);
  EXPECT_NEAR(s.energy, 1.0, 1e-8);
  EXPECT_LT(s.stationarity_residual, 1e-6);
  EXPECT_EQ(s.underflowed, 0u);
}

TEST(MaxEntropy, LogarithmicIsPurePowerLaw) {
  const MaxEntSolution s = max_entropy_oracle(1.0, 10000, EnergyModel::Logarithmic);
  const double ref = s.probs[0];
  double worst = 0.0;
  for (std::size_t i = 0; i < s.probs.size(); ++i) {
    const double ratio = s.probs[i] * std::pow(static_cast<double>(i + 1), s.lambda);
    worst = std::max(worst, std::abs(ratio / ref - 1.0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(MaxEntropy, LinearRoundTrip) {
  const Value v_max = 10000;
  // Forward: mean of the Boltzmann law p_v ~ exp(-0.5 v) on 1..V.
  long double z = 0.0L;
  long double zv = 0.0L;
  for (Value v = 1; v <= v_max; ++v) {
    const long double w = std::exp(-0.5L * static_cast<long double>(v));
    z += w;
    zv += w * static_cast<long double>(v);
  }
  const double target = static_cast<double>(zv / z);
  const MaxEntSolution s = max_entropy_oracle(target, v_max, EnergyModel::Linear);
  EXPECT_NEAR(s.lambda, 0.5, 1e-6);
  // Exponential form: ln p_v is affine in v.
  const double step = std::log(s.probs[1]) - std::log(s.probs[0]);
  for (std::size_t i = 1; i < 60; ++i) {
    EXPECT_NEAR(std::log(s.probs[i]) - std::log(s.probs[i - 1]), step, 1e-9);
  }
  EXPECT_GT(s.underflowed, 0u);
}

TEST(MaxEntropy, FeasibilityBoundaries) {
  EXPECT_THROW(max_entropy_oracle(0.0, 100, EnergyModel::Logarithmic), DomainError);
  EXPECT_THROW(max_entropy_oracle(std::log(100.0), 100, EnergyModel::Logarithmic), DomainError);
  EXPECT_THROW(max_entropy_oracle(1.0, 100, EnergyModel::Linear), DomainError);
  EXPECT_THROW(max_entropy_oracle(100.0, 100, EnergyModel::Linear), DomainError);
  // Just inside the top edge the exponent runs strongly negative.
  const MaxEntSolution s = max_entropy_oracle(std::log(100.0) - 1e-3, 100);
  EXPECT_LT(s.lambda, -100.0);
  EXPECT_NEAR(s.energy, std::log(100.0) - 1e-3, 1e-6);
}

TEST(MaxEntropy, PerturbationsNeverBeatOracle) {
  for (const auto model : {EnergyModel::Logarithmic, EnergyModel::Linear}) {
    const double target = model == EnergyModel::Logarithmic ? 1.0 : 3.0;
    const MaxEntSolution s = max_entropy_oracle(target, 10000, model);
    const PerturbationCheck check = perturbation_check(s, 100, 5);
    EXPECT_EQ(check.trials, 100);
    EXPECT_EQ(check.violations, 0);
    EXPECT_LE(check.max_perturbed_efficiency, check.oracle_efficiency);
  }
}

TEST(MaxEntropy, EfficiencyExceedsMultiplierByLogPartitionOverEnergy) {
  const MaxEntSolution s = max_entropy_oracle(1.0, 10000);
  EXPECT_NEAR(*s.efficiency, s.lambda + s.log_partition / s.energy, 1e-9);
  EXPECT_NEAR(*s.exponent_gap, s.log_partition / s.energy, 1e-9);
}

TEST(TruncatedPowerLaw, EfficiencyIdentity) {
  for (const double a : {1.5, 2.0, 2.5}) {
    const TruncatedPowerLaw t = truncated_power_law(a, 100000);
    const double q = t.entropy / t.energy;
    EXPECT_NEAR(q, a + std::log(t.partition) / t.energy, 1e-9);
    EXPECT_NEAR(t.energy, static_cast<double>(oracle::truncated_energy(a, 100000)), 1e-10);
  }
}

TEST(Curves, AlphaGrid) {
  const auto g = alpha_grid(1.2, 4.0, 0.1);
  ASSERT_EQ(g.size(), 29u);
  EXPECT_DOUBLE_EQ(g.front(), 1.2);
  EXPECT_NEAR(g.back(), 4.0, 1e-12);
  EXPECT_THROW(alpha_grid(1.2, 4.0, 0.0), DomainError);
  EXPECT_THROW(alpha_grid(2.0, 1.5, 0.1), DomainError);
}

TEST(Curves, EfficiencyCurveProperties) {
  const auto grid = alpha_grid(1.2, 2.4, 0.1);
  const TheoryCurve c = efficiency_vs_alpha_curve(grid, 1000);
  ASSERT_TRUE(c.uniform.has_value());
  EXPECT_DOUBLE_EQ(c.uniform->entropy_reduction, 0.0);
  EXPECT_NEAR(c.uniform->entropy, std::log(1000.0), 1e-12);
  EXPECT_LT(*c.points.front().entropy_reduction, *c.points.back().entropy_reduction);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_GT(*c.points[i].entropy_reduction, *c.points[i - 1].entropy_reduction);
    EXPECT_LT(*c.points[i].entropy, *c.points[i - 1].entropy);
    EXPECT_LT(*c.points[i].energy, *c.points[i - 1].energy);
  }
  EXPECT_THROW(efficiency_vs_alpha_curve(grid, 9), DomainError);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(efficiency_vs_alpha_curve(bad, 100), DomainError);
}

TEST(Curves, EfficiencyNearlyIndependentOfTruncation) {
  const std::vector<double> two{2.0};
  const double small = *efficiency_vs_alpha_curve(two, 1000).points[0].efficiency;
  const double large = *efficiency_vs_alpha_curve(two, 1000000).points[0].efficiency;
  EXPECT_LT(std::abs(small - large) / large, 0.05);
}

TEST(Curves, ThreadCountDoesNotChangeResults) {
  const auto grid = alpha_grid(1.2, 3.0, 0.05);
  const TheoryCurve one = efficiency_vs_alpha_curve(grid, 5000, 1);
  const TheoryCurve many = efficiency_vs_alpha_curve(grid, 5000, 8);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(*one.points[i].efficiency, *many.points[i].efficiency);
    EXPECT_EQ(*one.points[i].free_energy, *many.points[i].free_energy);
  }
}

TEST(Curves, EnergyCurveShape) {
  const auto grid = alpha_grid(1.2, 5.0, 0.05);
  const TheoryCurve c = energy_curve(grid);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_LT(*c.points[i].energy, *c.points[i - 1].energy);
    EXPECT_GT(*c.points[i].free_energy, *c.points[i - 1].free_energy);
  }
  const auto a = [](double x) { return theoretical_free_energy(x); };
  EXPECT_LT(std::abs(a(4.0) - a(5.0)), std::abs(a(1.5) - a(2.5)));
}
