#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermolens/collection.hpp"
#include "thermolens/powerlaw.hpp"
#include "thermolens/structure.hpp"
#include "thermolens/thermo.hpp"

namespace thermolens {

struct EditEvent {
  std::int64_t timestamp = 0;  // UTC seconds since epoch
  std::string editor;
  std::string page;
};

struct ReadershipRecord {
  std::string page;
  std::int64_t clicks = 0;
};

enum class ParseMode { Lenient, Strict };

template <typename Record>
struct Parsed {
  std::vector<Record> records;
  std::size_t skipped = 0;
};

// CSV with header `ts,editor,page`. Blank lines and lines starting with '#'
// are ignored. Malformed rows are counted and skipped, or raise ParseError
// in strict mode.
Parsed<EditEvent> parse_events(std::istream &in, ParseMode mode = ParseMode::Lenient);

// CSV with header `page,clicks`. A page listed twice is malformed.
Parsed<ReadershipRecord> parse_readership(std::istream &in, ParseMode mode = ParseMode::Lenient);

// UTC calendar month.
struct Month {
  int year = 1970;
  int month = 1;  // 1..12

  static Month from_timestamp(std::int64_t ts);
  std::string to_string() const;  // YYYY-MM

  friend auto operator<=>(const Month &, const Month &) = default;
};

// Per month, the histogram of per-editor edit counts within that month.
std::map<Month, Collection> monthly_collections(std::span<const EditEvent> events);

// Per page, the histogram of per-editor edit counts on that page.
std::map<std::string, Collection> page_collections(std::span<const EditEvent> events);

// Edit times of one page, sorted ascending. The cumulative edit count after
// the i-th event is i + 1.
struct PageTimeline {
  std::string page_id;
  std::vector<std::int64_t> timestamps;

  std::int64_t creation_ts() const { return timestamps.front(); }
  Count total_edits() const { return static_cast<Count>(timestamps.size()); }
  // Edits at or before ts.
  Count cumulative_at(std::int64_t ts) const;
};

std::map<std::string, PageTimeline> page_timelines(std::span<const EditEvent> events);

// Latest timestamp in the corpus (throws DomainError when empty).
std::int64_t last_timestamp(std::span<const EditEvent> events);

struct SaturationParams {
  Count min_edits = 4500;
  double tail_frac = 0.10;
  double growth_frac = 0.05;
};

// A page is saturated when it has at least min_edits edits and fewer than
// growth_frac of them fall in the final tail_frac of [creation, horizon_end].
bool saturation_filter(const PageTimeline &t, std::int64_t horizon_end,
                       const SaturationParams &params = {});

// Pearson product-moment correlation. Throws DomainError on a length
// mismatch or fewer than two points, DegenerateError on zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------

struct EvolutionRow {
  Month month;
  ThermoReport report;
  std::optional<PowerLawFit> fit;
  ClassDecomposition classes;
};

struct EvolutionOptions {
  EnergyModel model = EnergyModel::Logarithmic;
  double ks_threshold = kDefaultKsThreshold;
  Value class_base = 10;
  unsigned threads = 1;
};

// One row per month, each computed from that month's collection only.
// Degenerate months carry empty fields instead of failing the series.
std::vector<EvolutionRow> evolution_report(const std::map<Month, Collection> &monthly,
                                           const EvolutionOptions &options = {});

// ---------------------------------------------------------------------------

struct PageMetrics {
  std::string page;
  Count editors = 0;
  double entropy = 0.0;
  double entropy_reduction = 0.0;
  std::optional<double> efficiency;
  double total_energy = 0.0;       // sum_v s_v ln v
  std::int64_t total_edits = 0;    // sum_v s_v v
  std::optional<double> alpha;
  std::optional<double> ks_stat;
  bool is_power_law = false;
  std::optional<bool> saturated;
};

PageMetrics page_metrics(const std::string &page, const Collection &c,
                         double ks_threshold = kDefaultKsThreshold);

std::vector<PageMetrics> page_metrics(const std::map<std::string, Collection> &pages,
                                      double ks_threshold = kDefaultKsThreshold,
                                      unsigned threads = 1);

struct MetricCorrelations {
  std::optional<double> entropy;
  std::optional<double> entropy_reduction;
  std::optional<double> efficiency;
  std::optional<double> total_energy;
  std::optional<double> total_edits;
  std::optional<double> editors;  // only meaningful against readership
};

struct GroupReport {
  std::size_t size = 0;
  MetricCorrelations vs_readership;
  MetricCorrelations vs_editors;
  std::optional<double> readership_median;
  std::optional<double> readership_mean;
  std::optional<double> edits_median;
  std::optional<double> edits_mean;
};

struct CorrelationReport {
  GroupReport power_law;
  GroupReport non_power_law;
  GroupReport all;
  std::size_t analyzed = 0;
  std::size_t dropped_pages = 0;         // pages without a readership record
  std::size_t unmatched_readership = 0;  // readership rows naming no analysed page
};

// Inner join of page metrics with readership, then group-wise correlations.
// Pages that could not be fitted count as non-power-law.
CorrelationReport correlate(std::span<const PageMetrics> pages,
                            std::span<const ReadershipRecord> readership);

CorrelationReport correlate_pages(const std::map<std::string, Collection> &pages,
                                  std::span<const ReadershipRecord> readership,
                                  double ks_threshold = kDefaultKsThreshold, unsigned threads = 1);

}  // namespace thermolens
