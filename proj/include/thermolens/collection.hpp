#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace thermolens {

using Value = std::int64_t;
using Count = std::int64_t;

// Energy assigned to a contribution value v.
enum class EnergyModel {
  Logarithmic,  // u = ln v
  Linear,       // u = v
};

double energy_of(Value v, EnergyModel model);

struct Bin {
  Value value;
  Count count;

  friend bool operator==(const Bin &, const Bin &) = default;
};

// Histogram of positive contribution values: value -> number of individuals
// holding it. Bins are sorted by value, every value and count is >= 1.
// Immutable once built.
class Collection {
 public:
  Collection() = default;

  static Collection from_values(std::span<const Value> values);

  // Bins may arrive unsorted and with repeated values; they are summed.
  static Collection from_bins(std::vector<Bin> bins);

  const std::vector<Bin> &bins() const noexcept { return bins_; }
  Count population() const noexcept { return population_; }
  bool empty() const noexcept { return population_ == 0; }
  std::size_t distinct() const noexcept { return bins_.size(); }

  // Count of individuals holding v (0 when absent).
  Count count_of(Value v) const;

  // Throw EmptyCollectionError when empty.
  Value min_value() const;
  Value max_value() const;

  // Sum of v * s_v. Throws DomainError on int64 overflow.
  std::int64_t total_value() const;

  // Every count multiplied by k (k >= 1).
  Collection scaled(Count k) const;

  friend bool operator==(const Collection &, const Collection &) = default;

 private:
  std::vector<Bin> bins_;
  Count population_ = 0;
};

Collection merge(const Collection &a, const Collection &b);

struct ProbabilityBin {
  Value value;
  double p;
};

// p_v = s_v / N over the support of a collection.
class Distribution {
 public:
  explicit Distribution(std::vector<ProbabilityBin> probs) : probs_(std::move(probs)) {}

  const std::vector<ProbabilityBin> &bins() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double p(Value v) const;

 private:
  std::vector<ProbabilityBin> probs_;
};

Distribution probabilities(const Collection &c);

}  // namespace thermolens
