#include "thermolens/collection.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "thermolens/error.hpp"

namespace thermolens {

double energy_of(Value v, EnergyModel model) {
  return model == EnergyModel::Logarithmic ? std::log(static_cast<double>(v))
                                           : static_cast<double>(v);
}

Collection Collection::from_values(std::span<const Value> values) {
  std::unordered_map<Value, Count> tally;
  for (const Value v : values) {
    if (v <= 0) {
      throw DomainError("non-positive contribution value");
    }
    ++tally[v];
  }
  std::vector<Bin> bins;
  bins.reserve(tally.size());
  for (const auto &[v, n] : tally) {
    bins.push_back({v, n});
  }
  return from_bins(std::move(bins));
}

Collection Collection::from_bins(std::vector<Bin> bins) {
  std::sort(bins.begin(), bins.end(),
            [](const Bin &a, const Bin &b) { return a.value < b.value; });
  Collection c;
  c.bins_.reserve(bins.size());
  for (const Bin &b : bins) {
    if (b.value <= 0) {
      throw DomainError("non-positive contribution value");
    }
    if (b.count <= 0) {
      throw DomainError("non-positive count");
    }
    if (!c.bins_.empty() && c.bins_.back().value == b.value) {
      c.bins_.back().count += b.count;
    } else {
      c.bins_.push_back(b);
    }
    c.population_ += b.count;
  }
  return c;
}

Count Collection::count_of(Value v) const {
  const auto it = std::lower_bound(bins_.begin(), bins_.end(), v,
                                   [](const Bin &b, Value x) { return b.value < x; });
  return (it != bins_.end() && it->value == v) ? it->count : 0;
}

Value Collection::min_value() const {
  if (empty()) throw EmptyCollectionError();
  return bins_.front().value;
}

Value Collection::max_value() const {
  if (empty()) throw EmptyCollectionError();
  return bins_.back().value;
}

std::int64_t Collection::total_value() const {
  std::int64_t total = 0;
  for (const Bin &b : bins_) {
    std::int64_t mass = 0;
    if (__builtin_mul_overflow(b.value, b.count, &mass) ||
        __builtin_add_overflow(total, mass, &total)) {
      throw DomainError("value mass overflows 64-bit range");
    }
  }
  return total;
}

Collection Collection::scaled(Count k) const {
  if (k < 1) throw DomainError("scale factor must be >= 1");
  std::vector<Bin> bins = bins_;
  for (Bin &b : bins) b.count *= k;
  return from_bins(std::move(bins));
}

Collection merge(const Collection &a, const Collection &b) {
  std::vector<Bin> bins;
  bins.reserve(a.distinct() + b.distinct());
  bins.insert(bins.end(), a.bins().begin(), a.bins().end());
  bins.insert(bins.end(), b.bins().begin(), b.bins().end());
  return Collection::from_bins(std::move(bins));
}

double Distribution::p(Value v) const {
  const auto it =
      std::lower_bound(probs_.begin(), probs_.end(), v,
                       [](const ProbabilityBin &b, Value x) { return b.value < x; });
  return (it != probs_.end() && it->value == v) ? it->p : 0.0;
}

Distribution probabilities(const Collection &c) {
  if (c.empty()) throw EmptyCollectionError();
  const auto n = static_cast<double>(c.population());
  std::vector<ProbabilityBin> probs;
  probs.reserve(c.distinct());
  for (const Bin &b : c.bins()) {
    probs.push_back({b.value, static_cast<double>(b.count) / n});
  }
  return Distribution(std::move(probs));
}

}  // namespace thermolens
