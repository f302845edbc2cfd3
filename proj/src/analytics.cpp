#include "thermolens/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "thermolens/error.hpp"
#include "thermolens/numeric.hpp"
#include "thermolens/parallel.hpp"

namespace thermolens {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Drives a line-oriented CSV read: header check, comment skipping, and the
// lenient/strict policy for rows the callback rejects.
template <typename Record, typename RowFn>
Parsed<Record> parse_csv(std::istream &in, std::string_view header, ParseMode mode, RowFn row_fn) {
  if (!in) throw IoError("unreadable input stream");
  Parsed<Record> out;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != header) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                         std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    const char *problem = row_fn(std::string_view(line), out.records);
    if (problem != nullptr) {
      if (mode == ParseMode::Strict) {
        throw ParseError("line " + std::to_string(line_no) + ": " + problem);
      }
      ++out.skipped;
    }
  }
  if (in.bad()) throw IoError("read failure");
  if (!seen_header) throw ParseError("missing header '" + std::string(header) + "'");
  return out;
}

}  // namespace

Parsed<EditEvent> parse_events(std::istream &in, ParseMode mode) {
  return parse_csv<EditEvent>(
      in, "ts,editor,page", mode,
      [](std::string_view line, std::vector<EditEvent> &out) -> const char * {
        const auto fields = split(line);
        if (fields.size() != 3) return "expected 3 fields";
        const auto ts = parse_int(fields[0]);
        if (!ts || *ts < 0) return "timestamp must be a non-negative integer";
        if (fields[1].empty() || fields[2].empty()) return "empty identifier";
        out.push_back({*ts, std::string(fields[1]), std::string(fields[2])});
        return nullptr;
      });
}

Parsed<ReadershipRecord> parse_readership(std::istream &in, ParseMode mode) {
  std::unordered_set<std::string> seen;
  return parse_csv<ReadershipRecord>(
      in, "page,clicks", mode,
      [&seen](std::string_view line, std::vector<ReadershipRecord> &out) -> const char * {
        const auto fields = split(line);
        if (fields.size() != 2) return "expected 2 fields";
        if (fields[0].empty()) return "empty page identifier";
        const auto clicks = parse_int(fields[1]);
        if (!clicks || *clicks < 0) return "clicks must be a non-negative integer";
        if (!seen.emplace(fields[0]).second) return "duplicate page";
        out.push_back({std::string(fields[0]), *clicks});
        return nullptr;
      });
}

Month Month::from_timestamp(std::int64_t ts) {
  using namespace std::chrono;
  const auto days_since_epoch = static_cast<int>(ts >= 0 ? ts / 86400 : (ts - 86399) / 86400);
  const year_month_day ymd{sys_days{days{days_since_epoch}}};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

std::string Month::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

namespace {

template <typename Key, typename KeyFn>
std::map<Key, Collection> editor_histograms(std::span<const EditEvent> events, KeyFn key_of) {
  std::map<Key, std::unordered_map<std::string_view, Count>> tallies;
  for (const EditEvent &e : events) ++tallies[key_of(e)][e.editor];
  std::map<Key, Collection> out;
  std::vector<Value> counts;
  for (const auto &[key, per_editor] : tallies) {
    counts.clear();
    for (const auto &[editor, n] : per_editor) counts.push_back(n);
    out.emplace(key, Collection::from_values(counts));
  }
  return out;
}

}  // namespace

std::map<Month, Collection> monthly_collections(std::span<const EditEvent> events) {
  return editor_histograms<Month>(events,
                                  [](const EditEvent &e) { return Month::from_timestamp(e.timestamp); });
}

std::map<std::string, Collection> page_collections(std::span<const EditEvent> events) {
  return editor_histograms<std::string>(events, [](const EditEvent &e) { return e.page; });
}

Count PageTimeline::cumulative_at(std::int64_t ts) const {
  return static_cast<Count>(std::upper_bound(timestamps.begin(), timestamps.end(), ts) -
                            timestamps.begin());
}

std::map<std::string, PageTimeline> page_timelines(std::span<const EditEvent> events) {
  std::map<std::string, PageTimeline> out;
  for (const EditEvent &e : events) {
    PageTimeline &t = out[e.page];
    if (t.page_id.empty()) t.page_id = e.page;
    t.timestamps.push_back(e.timestamp);
  }
  for (auto &[page, t] : out) std::sort(t.timestamps.begin(), t.timestamps.end());
  return out;
}

std::int64_t last_timestamp(std::span<const EditEvent> events) {
  if (events.empty()) throw DomainError("no events");
  return std::max_element(events.begin(), events.end(),
                          [](const EditEvent &a, const EditEvent &b) {
                            return a.timestamp < b.timestamp;
                          })
      ->timestamp;
}

bool saturation_filter(const PageTimeline &t, std::int64_t horizon_end,
                       const SaturationParams &params) {
  if (t.timestamps.empty()) throw DomainError("empty page timeline");
  if (!(params.tail_frac > 0.0 && params.tail_frac <= 1.0)) {
    throw DomainError("tail_frac must lie in (0, 1]");
  }
  if (!(params.growth_frac >= 0.0)) throw DomainError("growth_frac must be non-negative");
  const std::int64_t creation = t.creation_ts();
  if (horizon_end < creation) throw DomainError("horizon precedes page creation");

  const Count total = t.total_edits();
  if (total < params.min_edits) return false;
  const double lifetime = static_cast<double>(horizon_end - creation);
  const double tail_start = static_cast<double>(creation) + (1.0 - params.tail_frac) * lifetime;
  const auto first_in_tail =
      std::upper_bound(t.timestamps.begin(), t.timestamps.end(), tail_start,
                       [](double x, std::int64_t ts) { return x < static_cast<double>(ts); });
  const auto tail_edits = static_cast<double>(t.timestamps.end() - first_in_tail);
  return tail_edits < params.growth_frac * static_cast<double>(total);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("pearson: length mismatch");
  if (xs.size() < 2) throw DomainError("pearson: need at least two points");
  // Streaming co-moment update on data shifted by the first point, which
  // keeps the running deviations small when the values share a large offset.
  const double shift_x = xs[0];
  const double shift_y = ys[0];
  double mean_x = 0.0;
  double mean_y = 0.0;
  double m2x = 0.0;
  double m2y = 0.0;
  double cxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double x = xs[i] - shift_x;
    const double y = ys[i] - shift_y;
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    mean_x += dx / n;
    mean_y += dy / n;
    m2x += dx * (x - mean_x);
    m2y += dy * (y - mean_y);
    cxy += dx * (y - mean_y);
  }
  if (m2x == 0.0 || m2y == 0.0) throw DegenerateError("pearson: zero variance");
  return std::clamp(cxy / std::sqrt(m2x * m2y), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

std::vector<EvolutionRow> evolution_report(const std::map<Month, Collection> &monthly,
                                           const EvolutionOptions &options) {
  std::vector<const std::pair<const Month, Collection> *> entries;
  entries.reserve(monthly.size());
  for (const auto &entry : monthly) entries.push_back(&entry);

  std::vector<EvolutionRow> rows(entries.size());
  parallel_for(entries.size(), options.threads, [&](std::size_t i) {
    const auto &[month, c] = *entries[i];
    EvolutionRow &row = rows[i];
    row.month = month;
    row.report = thermo_report(c, options.model);
    try {
      row.fit = classify(c, options.ks_threshold);
    } catch (const DegenerateError &) {
    }
    row.classes = class_decompose(c, options.class_base);
  });
  return rows;
}

// ---------------------------------------------------------------------------

PageMetrics page_metrics(const std::string &page, const Collection &c, double ks_threshold) {
  const ThermoReport r = thermo_report(c);
  PageMetrics m;
  m.page = page;
  m.editors = c.population();
  m.entropy = r.entropy;
  m.entropy_reduction = r.entropy_reduction;
  m.efficiency = r.efficiency;
  NeumaierSum energy;
  for (const Bin &b : c.bins()) {
    energy += static_cast<double>(b.count) * std::log(static_cast<double>(b.value));
  }
  m.total_energy = energy.value();
  m.total_edits = c.total_value();
  try {
    const PowerLawFit fit = classify(c, ks_threshold);
    m.alpha = fit.alpha;
    m.ks_stat = fit.ks_stat;
    m.is_power_law = fit.is_power_law;
  } catch (const DegenerateError &) {
  }
  return m;
}

std::vector<PageMetrics> page_metrics(const std::map<std::string, Collection> &pages,
                                      double ks_threshold, unsigned threads) {
  std::vector<const std::pair<const std::string, Collection> *> entries;
  entries.reserve(pages.size());
  for (const auto &entry : pages) entries.push_back(&entry);
  std::vector<PageMetrics> out(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    out[i] = page_metrics(entries[i]->first, entries[i]->second, ks_threshold);
  });
  return out;
}

namespace {

struct JoinedPage {
  const PageMetrics *metrics;
  double clicks;
};

std::optional<double> correlation_of(const std::vector<JoinedPage> &pages,
                                     auto metric_of, auto target_of) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const JoinedPage &p : pages) {
    const std::optional<double> x = metric_of(*p.metrics);
    if (!x) continue;
    xs.push_back(*x);
    ys.push_back(target_of(p));
  }
  if (xs.size() < 2) return std::nullopt;
  try {
    return pearson(xs, ys);
  } catch (const DegenerateError &) {
    return std::nullopt;
  }
}

template <typename Target>
MetricCorrelations correlations_against(const std::vector<JoinedPage> &pages, Target target,
                                        bool include_editors) {
  using Opt = std::optional<double>;
  MetricCorrelations out;
  out.entropy = correlation_of(pages, [](const PageMetrics &m) -> Opt { return m.entropy; }, target);
  out.entropy_reduction = correlation_of(
      pages, [](const PageMetrics &m) -> Opt { return m.entropy_reduction; }, target);
  out.efficiency =
      correlation_of(pages, [](const PageMetrics &m) -> Opt { return m.efficiency; }, target);
  out.total_energy =
      correlation_of(pages, [](const PageMetrics &m) -> Opt { return m.total_energy; }, target);
  out.total_edits = correlation_of(
      pages, [](const PageMetrics &m) -> Opt { return static_cast<double>(m.total_edits); },
      target);
  if (include_editors) {
    out.editors = correlation_of(
        pages, [](const PageMetrics &m) -> Opt { return static_cast<double>(m.editors); }, target);
  }
  return out;
}

std::optional<double> median(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

std::optional<double> mean(const std::vector<double> &xs) {
  if (xs.empty()) return std::nullopt;
  NeumaierSum s;
  for (const double x : xs) s += x;
  return s.value() / static_cast<double>(xs.size());
}

GroupReport group_report(const std::vector<JoinedPage> &pages) {
  GroupReport g;
  g.size = pages.size();
  g.vs_readership = correlations_against(
      pages, [](const JoinedPage &p) { return p.clicks; }, true);
  g.vs_editors = correlations_against(
      pages, [](const JoinedPage &p) { return static_cast<double>(p.metrics->editors); }, false);
  std::vector<double> clicks;
  std::vector<double> edits;
  for (const JoinedPage &p : pages) {
    clicks.push_back(p.clicks);
    edits.push_back(static_cast<double>(p.metrics->total_edits));
  }
  g.readership_median = median(clicks);
  g.readership_mean = mean(clicks);
  g.edits_median = median(edits);
  g.edits_mean = mean(edits);
  return g;
}

}  // namespace

CorrelationReport correlate(std::span<const PageMetrics> pages,
                            std::span<const ReadershipRecord> readership) {
  std::unordered_map<std::string_view, std::int64_t> clicks_by_page;
  for (const ReadershipRecord &r : readership) clicks_by_page.emplace(r.page, r.clicks);

  CorrelationReport report;
  std::vector<JoinedPage> all;
  std::vector<JoinedPage> power_law;
  std::vector<JoinedPage> non_power_law;
  std::unordered_set<std::string_view> analysed;
  for (const PageMetrics &m : pages) {
    const auto it = clicks_by_page.find(m.page);
    if (it == clicks_by_page.end()) {
      ++report.dropped_pages;
      continue;
    }
    analysed.insert(m.page);
    const JoinedPage joined{&m, static_cast<double>(it->second)};
    all.push_back(joined);
    (m.is_power_law ? power_law : non_power_law).push_back(joined);
  }
  for (const ReadershipRecord &r : readership) {
    if (!analysed.contains(r.page)) ++report.unmatched_readership;
  }
  report.analyzed = all.size();
  report.all = group_report(all);
  report.power_law = group_report(power_law);
  report.non_power_law = group_report(non_power_law);
  return report;
}

CorrelationReport correlate_pages(const std::map<std::string, Collection> &pages,
                                  std::span<const ReadershipRecord> readership,
                                  double ks_threshold, unsigned threads) {
  const std::vector<PageMetrics> metrics = page_metrics(pages, ks_threshold, threads);
  return correlate(metrics, readership);
}

}  // namespace thermolens
