#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "thermolens/analytics.hpp"
#include "thermolens/error.hpp"

using namespace thermolens;

namespace {

Collection of(std::vector<Bin> bins) { return Collection::from_bins(std::move(bins)); }

constexpr std::int64_t kJan2020 = 1577836800;  // 2020-01-01T00:00:00Z
constexpr std::int64_t kFeb2020 = 1580515200;  // 2020-02-01T00:00:00Z

Parsed<EditEvent> parse(const std::string &text, ParseMode mode = ParseMode::Lenient) {
  std::istringstream in(text);
  return parse_events(in, mode);
}

PageTimeline timeline(std::vector<std::int64_t> ts) {
  std::sort(ts.begin(), ts.end());
  return {"p", std::move(ts)};
}

}  // namespace

TEST(ParseEvents, HeaderOnlyAndWellFormed) {
  EXPECT_TRUE(parse("ts,editor,page\n").records.empty());
  const auto p = parse("ts,editor,page\n1,a,x\n2,b,x\n# note\n\n3,a,y\n");
  ASSERT_EQ(p.records.size(), 3u);
  EXPECT_EQ(p.skipped, 0u);
  EXPECT_EQ(p.records[2].page, "y");
  EXPECT_EQ(p.records[1].timestamp, 2);
}

TEST(ParseEvents, OneMalformedAmongHundred) {
  std::string text = "ts,editor,page\n";
  for (int i = 0; i < 100; ++i) {
    text += i == 57 ? "notanumber,a,x\n" : std::to_string(1000 + i) + ",e" + std::to_string(i) + ",x\n";
  }
  const auto p = parse(text);
  EXPECT_EQ(p.records.size(), 99u);
  EXPECT_EQ(p.skipped, 1u);
  EXPECT_THROW(parse(text, ParseMode::Strict), ParseError);
}

TEST(ParseEvents, MalformedShapes) {
  const auto p = parse("ts,editor,page\n1,a\n2,,x\n3,a,x,extra\n4,a,\n5,a,x\n");
  EXPECT_EQ(p.records.size(), 1u);
  EXPECT_EQ(p.skipped, 4u);
  EXPECT_THROW(parse("time,who,what\n1,a,x\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(ParseReadership, DuplicatesAreMalformed) {
  std::istringstream in("page,clicks\nx,10\ny,20\nx,30\nz,-1\n");
  const auto p = parse_readership(in);
  ASSERT_EQ(p.records.size(), 2u);
  EXPECT_EQ(p.skipped, 2u);
}

TEST(Month, FromTimestamp) {
  EXPECT_EQ(Month::from_timestamp(kJan2020).to_string(), "2020-01");
  EXPECT_EQ(Month::from_timestamp(kFeb2020 - 1).to_string(), "2020-01");
  EXPECT_EQ(Month::from_timestamp(kFeb2020).to_string(), "2020-02");
  EXPECT_EQ(Month::from_timestamp(0).to_string(), "1970-01");
  EXPECT_EQ(Month::from_timestamp(-1).to_string(), "1969-12");
  EXPECT_EQ(oracle::month_start(2020, 2), kFeb2020);
}

TEST(MonthlyCollections, Examples) {
  std::vector<EditEvent> one;
  for (int i = 0; i < 5; ++i) one.push_back({kJan2020 + i, "a", "p"});
  const auto m1 = monthly_collections(one);
  ASSERT_EQ(m1.size(), 1u);
  EXPECT_EQ(m1.begin()->second, of({{5, 1}}));

  std::vector<EditEvent> open;
  for (int i = 0; i < 3; ++i) open.push_back({kJan2020 + i, "a", "p"});
  for (int i = 0; i < 2; ++i) open.push_back({kFeb2020 + i, "a", "p"});
  const auto m2 = monthly_collections(open);
  ASSERT_EQ(m2.size(), 2u);
  EXPECT_EQ(m2.at(Month{2020, 1}), of({{3, 1}}));
  EXPECT_EQ(m2.at(Month{2020, 2}), of({{2, 1}}));

  std::vector<EditEvent> two{{kJan2020, "a", "p"}};
  for (int i = 0; i < 10; ++i) two.push_back({kJan2020 + 10 + i, "b", "q"});
  EXPECT_EQ(monthly_collections(two).at(Month{2020, 1}), of({{1, 1}, {10, 1}}));
}

TEST(PageCollections, Examples) {
  std::vector<EditEvent> one;
  for (int i = 0; i < 4; ++i) one.push_back({kJan2020 + i, "a", "p"});
  EXPECT_EQ(page_collections(one).at("p"), of({{4, 1}}));

  const std::vector<EditEvent> both{{1, "a", "p"}, {2, "a", "q"}, {3, "a", "q"}};
  const auto pages = page_collections(both);
  EXPECT_EQ(pages.at("p"), of({{1, 1}}));
  EXPECT_EQ(pages.at("q"), of({{2, 1}}));

  const std::vector<EditEvent> three{{1, "a", "p"}, {2, "b", "p"}, {3, "b", "p"},
                                     {4, "c", "p"}, {5, "c", "p"}, {6, "c", "p"}};
  EXPECT_EQ(page_collections(three).at("p"), of({{1, 1}, {2, 1}, {3, 1}}));
}

TEST(Collections, ConservationAndWindowPurity) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::int64_t> when(kJan2020, kJan2020 + 200LL * 86400);
  std::uniform_int_distribution<int> who(0, 300);
  std::uniform_int_distribution<int> where(0, 40);
  std::vector<EditEvent> events;
  for (int i = 0; i < 20000; ++i) {
    events.push_back({when(rng), "e" + std::to_string(who(rng)), "p" + std::to_string(where(rng))});
  }
  const auto monthly = monthly_collections(events);
  const auto pages = page_collections(events);
  std::int64_t month_total = 0;
  std::int64_t page_total = 0;
  for (const auto &[m, c] : monthly) month_total += c.total_value();
  for (const auto &[p, c] : pages) page_total += c.total_value();
  EXPECT_EQ(month_total, 20000);
  EXPECT_EQ(page_total, 20000);

  // Each month's collection depends only on that month's events.
  const Month target = monthly.begin()->first;
  std::vector<EditEvent> only;
  for (const auto &e : events) {
    if (Month::from_timestamp(e.timestamp) == target) only.push_back(e);
  }
  EXPECT_EQ(monthly_collections(only).at(target), monthly.at(target));

  // Event order is irrelevant.
  std::shuffle(events.begin(), events.end(), rng);
  EXPECT_EQ(monthly_collections(events), monthly);
}

TEST(Saturation, Examples) {
  const std::int64_t creation = 0;
  const std::int64_t horizon = 1000000;
  std::vector<std::int64_t> early;
  for (int i = 0; i < 5000; ++i) early.push_back(creation + i * 100);  // all within first half
  EXPECT_TRUE(saturation_filter(timeline(early), horizon));

  std::vector<std::int64_t> growing;
  for (int i = 0; i < 4500; ++i) growing.push_back(creation + i * 100);
  for (int i = 0; i < 500; ++i) growing.push_back(horizon - 1 - i * 10);  // 10% in final 10%
  EXPECT_FALSE(saturation_filter(timeline(growing), horizon));

  std::vector<std::int64_t> small(early.begin(), early.begin() + 4499);
  EXPECT_FALSE(saturation_filter(timeline(small), horizon));

  EXPECT_THROW(saturation_filter(timeline({5, 6}), 4), DomainError);
}

TEST(Saturation, MonotoneInGrowthFraction) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> when(0, 999999);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::int64_t> ts(5000);
    for (auto &x : ts) x = when(rng);
    const PageTimeline tl = timeline(ts);
    bool previous = false;
    for (double g = 0.0; g <= 0.3; g += 0.01) {
      const bool now = saturation_filter(tl, 1000000, {4500, 0.1, g});
      EXPECT_TRUE(!previous || now);  // once saturated, stays saturated as g grows
      previous = now;
    }
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_DOUBLE_EQ(pearson(x, x), 1.0);
  const std::vector<double> neg{-1, -2, -3};
  EXPECT_DOUBLE_EQ(pearson(x, neg), -1.0);
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{1, 3, 2, 4};
  EXPECT_NEAR(pearson(a, b), 0.8, 1e-15);
  const std::vector<double> flat{2, 2, 2};
  EXPECT_THROW(pearson(x, flat), DegenerateError);
  EXPECT_THROW(pearson(a, x), DomainError);
  const std::vector<double> one{1};
  EXPECT_THROW(pearson(one, one), DomainError);
}

TEST(Pearson, MatchesTwoPassReference) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xs(500);
    std::vector<double> ys(500);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = 1e6 + noise(rng);
      ys[i] = 0.3 * xs[i] + noise(rng);
    }
    EXPECT_NEAR(pearson(xs, ys), oracle::pearson(xs, ys), 1e-12);
  }
}

TEST(Evolution, SingleMonth) {
  const std::map<Month, Collection> monthly{{Month{2020, 1}, of({{1, 2}, {2, 2}})}};
  const auto rows = evolution_report(monthly);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].report.entropy, std::log(2.0), 1e-12);
  EXPECT_NEAR(*rows[0].report.efficiency, 2.0, 1e-12);
  EXPECT_NEAR(*rows[0].report.alpha, 3.885390, 1e-6);
  EXPECT_TRUE(rows[0].fit.has_value());
}

TEST(Evolution, DegenerateMonthKeepsRow) {
  const std::map<Month, Collection> monthly{{Month{2020, 1}, of({{1, 40}})},
                                            {Month{2020, 2}, of({{1, 3}, {4, 1}})}};
  const auto rows = evolution_report(monthly);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].report.entropy, 0.0);
  EXPECT_FALSE(rows[0].report.efficiency.has_value());
  EXPECT_FALSE(rows[0].fit.has_value());
  EXPECT_TRUE(rows[1].report.efficiency.has_value());
}

TEST(Evolution, ThreadCountDoesNotChangeRows) {
  std::map<Month, Collection> monthly;
  for (int m = 1; m <= 12; ++m) monthly[Month{2021, m}] = sample(1.5 + 0.05 * m, 3000, m);
  const auto a = evolution_report(monthly, {EnergyModel::Logarithmic, 0.1, 10, 1});
  const auto b = evolution_report(monthly, {EnergyModel::Logarithmic, 0.1, 10, 8});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].report.entropy, b[i].report.entropy);
    EXPECT_EQ(*a[i].report.alpha, *b[i].report.alpha);
    EXPECT_EQ(a[i].fit->ks_stat, b[i].fit->ks_stat);
  }
}

TEST(Correlate, IdenticalPagesGiveNoCorrelation) {
  const std::map<std::string, Collection> pages{{"a", of({{1, 3}, {2, 1}})},
                                                {"b", of({{1, 3}, {2, 1}})}};
  const std::vector<ReadershipRecord> readership{{"a", 10}, {"b", 20}};
  const CorrelationReport r = correlate_pages(pages, readership);
  EXPECT_EQ(r.analyzed, 2u);
  EXPECT_FALSE(r.all.vs_readership.efficiency.has_value());
  EXPECT_FALSE(r.all.vs_readership.entropy.has_value());
  EXPECT_FALSE(r.all.vs_editors.entropy.has_value());
}

TEST(Correlate, HandComputedThreePages) {
  // a = {1:2, 2:2}: S = ln 2, E = ln2/2, Q = 2, total_energy = 2 ln 2, edits 6
  // b = {1:1, 2:1, 4:1, 8:1}: S = ln 4, Q = ln4 / (1.5 ln2) = 4/3, edits 15
  // c = {1:1, 3:1}: S = ln 2, Q = ln2 / (ln3 / 2), edits 4
  const std::map<std::string, Collection> pages{{"a", of({{1, 2}, {2, 2}})},
                                                {"b", of({{1, 1}, {2, 1}, {4, 1}, {8, 1}})},
                                                {"c", of({{1, 1}, {3, 1}})}};
  const std::vector<ReadershipRecord> readership{{"a", 100}, {"b", 300}, {"c", 200}, {"zz", 5}};
  const CorrelationReport r = correlate_pages(pages, readership, 1.0);
  EXPECT_EQ(r.analyzed, 3u);
  EXPECT_EQ(r.unmatched_readership, 1u);
  EXPECT_EQ(r.dropped_pages, 0u);
  EXPECT_EQ(r.power_law.size, 3u);  // threshold 1 accepts every fit
  EXPECT_EQ(r.non_power_law.size, 0u);

  const double ln2 = std::log(2.0);
  const std::vector<double> q{2.0, 4.0 / 3.0, ln2 / (std::log(3.0) / 2.0)};
  const std::vector<double> clicks{100, 300, 200};
  const std::vector<double> edits{6, 15, 4};
  EXPECT_NEAR(*r.all.vs_readership.efficiency, oracle::pearson(q, clicks), 1e-12);
  EXPECT_NEAR(*r.all.vs_readership.total_edits, oracle::pearson(edits, clicks), 1e-12);
  EXPECT_DOUBLE_EQ(*r.all.readership_median, 200.0);
  EXPECT_DOUBLE_EQ(*r.all.readership_mean, 200.0);
  EXPECT_DOUBLE_EQ(*r.all.edits_median, 6.0);
  EXPECT_FALSE(r.non_power_law.readership_median.has_value());
}

TEST(Correlate, DroppedPagesAndDegenerateGroup) {
  const std::map<std::string, Collection> pages{{"a", of({{1, 5}})}, {"b", of({{1, 2}, {5, 1}})}};
  const std::vector<ReadershipRecord> readership{{"a", 1}};
  const CorrelationReport r = correlate_pages(pages, readership);
  EXPECT_EQ(r.analyzed, 1u);
  EXPECT_EQ(r.dropped_pages, 1u);
  EXPECT_EQ(r.non_power_law.size, 1u);  // unfittable page counts as non-power-law
}

TEST(Correlate, PlantedSignal) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> alpha(1.4, 3.0);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::map<std::string, Collection> pages;
  for (int i = 0; i < 200; ++i) pages["p" + std::to_string(i)] = sample(alpha(rng), 400, rng());
  std::vector<ReadershipRecord> readership;
  for (const auto &[name, c] : pages) {
    const double q = entropy_efficiency(c);
    readership.push_back({name, std::llround(1000.0 * std::exp(q / 2.0 + noise(rng)))});
  }
  const CorrelationReport r = correlate_pages(pages, readership, 0.1, 4);
  EXPECT_EQ(r.analyzed, 200u);
  EXPECT_GT(*r.all.vs_readership.efficiency, 0.6);
  EXPECT_EQ(r.power_law.size + r.non_power_law.size, 200u);
}
