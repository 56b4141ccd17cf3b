#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rail/pathsim.hpp"

using namespace rail;

namespace {

path_spec constant_path(double loss, double delay_ms) {
  path_spec p;
  p.id = "p";
  p.loss.rate = loss;
  p.delay.mean_ms = delay_ms;
  return p;
}

delay_model dm(delay_kind kind, double mean, double sd, double corr = 0.0) {
  delay_model m;
  m.kind = kind;
  m.mean_ms = mean;
  m.stddev_ms = sd;
  m.correlation = corr;
  return m;
}

std::vector<double> draw_delays(const delay_model& m, std::uint64_t seed, std::size_t n) {
  delay_process proc(m, seed);
  std::vector<double> out(n);
  for (auto& d : out) d = proc.next_ms();
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

TEST(SampleOutcome, ZeroLossConstantDelay) {
  const auto spec = constant_path(0.0, 100.0);
  path_state st(spec, 1, 0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_outcome(st, {}), outcome::delivered(100.0));
}

TEST(SampleOutcome, CertainLoss) {
  auto spec = constant_path(1.0, 100.0);
  spec.delay.kind = delay_kind::paretonormal;
  spec.delay.stddev_ms = 10.0;
  path_state st(spec, 1, 0);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_outcome(st, {}).is_lost());
}

TEST(SampleOutcome, BernoulliLossWithin3Sigma) {
  constexpr std::size_t n = 100000;
  const auto spec = constant_path(0.1, 10.0);
  path_state st(spec, 20240601, 0);
  std::size_t lost = 0;
  for (std::size_t i = 0; i < n; ++i) lost += sample_outcome(st, {}).is_lost();
  const double p = 0.1, sigma = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(lost) / n, p, 3 * sigma);
}

TEST(LossProcess, UnbiasedAcrossSeeds) {
  constexpr int seeds = 400;
  constexpr std::size_t n = 100000;
  const double p = 0.1, sigma = std::sqrt(p * (1 - p) / n);
  double total = 0.0;
  int beyond = 0;
  for (int s = 0; s < seeds; ++s) {
    loss_process lp({p, 0.0}, derive_seed(1000 + s, 1, 0));
    std::size_t lost = 0;
    for (std::size_t i = 0; i < n; ++i) lost += lp.next_lost();
    const double f = static_cast<double>(lost) / n;
    total += f;
    beyond += std::abs(f - p) > 3 * sigma;
  }
  EXPECT_NEAR(total / seeds, p, 3 * sigma / std::sqrt(seeds));
  // About 0.27% of runs land outside 3 sigma.
  EXPECT_LE(beyond, 6);
}

TEST(LossProcess, CorrelationKeepsRateAndLengthensRuns) {
  constexpr std::size_t n = 200000;
  auto run = [&](double c, double& rate, double& mean_run) {
    loss_process lp({0.2, c}, 77);
    std::size_t lost = 0, runs = 0;
    bool prev = false;
    for (std::size_t i = 0; i < n; ++i) {
      const bool l = lp.next_lost();
      lost += l;
      runs += l && !prev;
      prev = l;
    }
    rate = static_cast<double>(lost) / n;
    mean_run = static_cast<double>(lost) / static_cast<double>(runs);
  };
  double r0, m0, r1, m1;
  run(0.0, r0, m0);
  run(0.6, r1, m1);
  // Sticky chain: variance inflates by (1+c)/(1-c).
  const double sigma = std::sqrt(0.2 * 0.8 / n * (1.6 / 0.4));
  EXPECT_NEAR(r1, 0.2, 4 * sigma);
  EXPECT_NEAR(r0, 0.2, 4 * std::sqrt(0.2 * 0.8 / n));
  // A lost packet stays lost with probability c + (1-c)p, so the mean run is
  // 1/(1 - c - (1-c)p): 1.25 at c=0, 3.125 at c=0.6.
  EXPECT_NEAR(m0, 1.25, 0.03);
  EXPECT_NEAR(m1, 3.125, 0.1);
}

TEST(DelayProcess, NormalMoments) {
  const auto m = dm(delay_kind::normal, 100.0, 15.0);
  const auto d = draw_delays(m, 5, 100000);
  EXPECT_NEAR(mean_of(d), 100.0, 0.25);
  EXPECT_NEAR(stddev_of(d), 15.0, 0.25);
}

TEST(DelayProcess, ParetonormalMeanWithin5Percent) {
  const auto m = dm(delay_kind::paretonormal, 100.0, 20.0);
  const auto d = draw_delays(m, 9, 100000);
  EXPECT_NEAR(mean_of(d), 100.0, 5.0);
  // Heavier right tail than the normal part alone.
  const auto mx = *std::max_element(d.begin(), d.end());
  EXPECT_GT(mx, 100.0 + 6 * 20.0);
}

TEST(DelayProcess, NeverNegative) {
  const auto m = dm(delay_kind::normal, 5.0, 20.0);
  for (double x : draw_delays(m, 3, 20000)) EXPECT_GE(x, 0.0);
}

TEST(DelayProcess, Ar1LagOneCorrelation) {
  const auto m = dm(delay_kind::normal, 100.0, 10.0, 0.7);
  const auto d = draw_delays(m, 13, 100000);
  const double mu = mean_of(d);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) num += (d[i] - mu) * (d[i + 1] - mu);
  for (double x : d) den += (x - mu) * (x - mu);
  EXPECT_NEAR(num / den, 0.7, 0.02);
  EXPECT_NEAR(stddev_of(d), 10.0, 0.3);
}

TEST(PathState, SameSeedSameStreamDifferentIndexDiffers) {
  path_spec spec = constant_path(0.2, 50.0);
  spec.delay.kind = delay_kind::normal;
  spec.delay.stddev_ms = 10.0;
  path_state a(spec, 42, 0), b(spec, 42, 0), c(spec, 42, 1);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto x = a.next({});
    EXPECT_EQ(x, b.next({}));
    differs = differs || !(x == c.next({}));
  }
  EXPECT_TRUE(differs);
}

TEST(PathState, SharedSegmentLossCouples) {
  path_spec spec = constant_path(0.0, 10.0);
  spec.shared = "s";
  path_state st(spec, 1, 0);
  EXPECT_TRUE(st.next({{"s", true}}).is_lost());
  EXPECT_FALSE(st.next({{"s", false}}).is_lost());
  EXPECT_THROW(st.next({}), config_error);
}

TEST(LoadTrace, LostMarkerAndOrder) {
  const auto t = load_trace("1,52.3\n2,0\n3,54.1");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.entries()[0], (trace_entry{1, 52.3}));
  EXPECT_EQ(t.entries()[1], (trace_entry{2, std::nullopt}));
  EXPECT_EQ(t.entries()[2], (trace_entry{3, 54.1}));
  EXPECT_EQ(load_trace("1,0").entries().front(), (trace_entry{1, std::nullopt}));
}

TEST(LoadTrace, CommentsAndBlankLines) {
  const auto t = load_trace("# seq,delay\n\n 5 , 10.5 \n7,11 # trailing\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.entries()[0].seq, 5u);
  EXPECT_EQ(*t.entries()[1].delay_ms, 11.0);
}

TEST(LoadTrace, ErrorsCarryLineNumbers) {
  auto line_of = [](std::string_view text) {
    try {
      load_trace(text);
    } catch (const parse_error& e) {
      return std::pair<std::size_t, std::string>{e.line(), e.what()};
    }
    return std::pair<std::size_t, std::string>{0, ""};
  };
  auto [l1, m1] = line_of("2,10\n1,11");
  EXPECT_EQ(l1, 2u);
  EXPECT_NE(m1.find("non-monotone seq at line 2"), std::string::npos);
  EXPECT_EQ(line_of("1,10\n2;11").first, 2u);
  EXPECT_EQ(line_of("1,-3").first, 1u);
  EXPECT_EQ(line_of("x,3").first, 1u);
  EXPECT_EQ(line_of("1,abc").first, 1u);
  EXPECT_THROW(load_trace("# nothing\n"), parse_error);
}

TEST(TraceOutcome, Lookup) {
  const auto t = load_trace("1,52.3\n2,0\n3,54.1");
  EXPECT_TRUE(trace_outcome(t, 2).is_lost());
  EXPECT_EQ(trace_outcome(t, 3), outcome::delivered(54.1));
  EXPECT_THROW(trace_outcome(t, 99), lookup_error);
}

TEST(PathState, TraceReplayWrapsAndCounts) {
  path_spec spec;
  spec.id = "t";
  spec.delay.kind = delay_kind::trace;
  spec.delay.trace = std::make_shared<const delay_trace>(load_trace("0,10\n1,0\n2,30"));
  path_state st(spec, 1, 0);
  std::vector<std::optional<double>> got;
  for (int i = 0; i < 7; ++i) got.push_back(st.next({}).delay());
  const std::vector<std::optional<double>> want{10.0, std::nullopt, 30.0, 10.0,
                                                std::nullopt, 30.0, 10.0};
  EXPECT_EQ(got, want);
  EXPECT_EQ(st.trace_wraps(), 2u);
}

TEST(Validation, CollectsEveryViolation) {
  path_spec p;
  p.loss = {1.5, -0.1};
  p.delay = dm(delay_kind::paretonormal, -1.0, -2.0, 1.0);
  p.delay.shape.alpha = 1.0;
  std::vector<std::string> v;
  p.loss.check("paths.0", v);
  p.delay.check("paths.0", v);
  EXPECT_EQ(v.size(), 6u);
  for (const auto& s : v) EXPECT_EQ(s.rfind("paths.0: ", 0), 0u);
}

TEST(DelayKind, ParseRoundTrip) {
  for (auto k : {delay_kind::constant, delay_kind::normal, delay_kind::paretonormal,
                 delay_kind::trace})
    EXPECT_EQ(parse_delay_kind(to_string(k)), k);
  EXPECT_FALSE(parse_delay_kind("uniform"));
}
