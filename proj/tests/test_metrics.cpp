#include <gtest/gtest.h>

#include "rail/metrics.hpp"
#include "rail/rng.hpp"

using namespace rail;

TEST(EmpiricalCdf, DirectCount) {
  const std::vector<double> d{10, 20, 30};
  EXPECT_DOUBLE_EQ(empirical_cdf(d)(20), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(empirical_cdf(d)(5), 0.0);
  const std::vector<double> c{7, 7, 7};
  EXPECT_DOUBLE_EQ(empirical_cdf(c)(7), 1.0);
  EXPECT_DOUBLE_EQ(empirical_cdf(c)(100), 1.0);
  EXPECT_THROW(empirical_cdf({}), config_error);
}

TEST(EmpiricalCdf, UniformMonteCarlo) {
  random_stream rng(11);
  std::vector<double> u(100000);
  for (auto& x : u) x = 100.0 * rng.uniform();
  EXPECT_NEAR(empirical_cdf(u)(50), 0.5, 0.01);
}

TEST(EmpiricalCdf, Quantile) {
  const delay_cdf f({5, 1, 4, 2, 3});
  EXPECT_EQ(f.quantile(0.0), 1);
  EXPECT_EQ(f.quantile(0.5), 3);
  EXPECT_EQ(f.quantile(0.95), 5);
  EXPECT_EQ(f.quantile(1.0), 5);
}

TEST(RailCdf, Composition) {
  EXPECT_DOUBLE_EQ(rail_cdf(0.5, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(rail_cdf(1.0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(rail_cdf(0.0, 0.0), 0.0);
}

TEST(Bursts, RunDefinition) {
  const std::vector<bool> a{true, true, false, true};
  EXPECT_EQ(measure_bursts(a), (burst_stats{2, 1, 2.0, 2}));
  const std::vector<bool> none(5, false);
  EXPECT_EQ(measure_bursts(none), burst_stats{});
  const std::vector<bool> all(4, true);
  EXPECT_EQ(measure_bursts(all), (burst_stats{4, 1, 4.0, 4}));
  const std::vector<bool> mixed{true, true, true, false, false, true, true, false, true};
  EXPECT_EQ(measure_bursts(mixed), (burst_stats{5, 2, 2.5, 3}));
}

TEST(Bursts, FromDelays) {
  const std::vector<std::optional<double>> d{std::nullopt, std::nullopt, 3.0, std::nullopt};
  EXPECT_EQ(measure_loss_bursts(d), (burst_stats{2, 1, 2.0, 2}));
}

TEST(Reordering, MaxSeenRule) {
  const std::vector<seq_t> a{3, 5, 4};
  const auto ra = measure_reordering(a);
  EXPECT_EQ(ra.out_of_order_count, 1u);
  EXPECT_EQ(ra.gaps, (std::map<seq_t, std::size_t>{{1, 1}}));
  const std::vector<seq_t> b{1, 2, 3};
  EXPECT_EQ(measure_reordering(b).out_of_order_count, 0u);
  const std::vector<seq_t> c{2, 1, 4, 3};
  const auto rc = measure_reordering(c);
  EXPECT_EQ(rc.out_of_order_count, 2u);
  EXPECT_EQ(rc.gaps, (std::map<seq_t, std::size_t>{{1, 2}}));
  const std::vector<seq_t> d{0, 9, 1, 2};
  EXPECT_EQ(measure_reordering(d).gaps, (std::map<seq_t, std::size_t>{{7, 1}, {8, 1}}));
}

TEST(Downtime, TableRows) {
  EXPECT_NEAR(downtime_combine(0.10, 0.10), 0.01, 1e-15);
  EXPECT_NEAR(downtime_combine(0.02, 0.02), 0.0004, 1e-16);
  EXPECT_EQ(downtime_combine(0.0, 0.7), 0.0);
  EXPECT_THROW(downtime_combine(1.5, 0.1), config_error);
}

TEST(Moments, Population) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  const auto m = sample_moments(x);
  EXPECT_EQ(m.n, 8u);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_DOUBLE_EQ(m.stddev, 2.0);
}

TEST(RailCdf, DominatesEachPathOnSameSamples) {
  random_stream rng(21);
  std::vector<double> d1, d2, dr;
  for (int i = 0; i < 5000; ++i) {
    const double a = 50 + 20 * rng.standard_normal(), b = 80 + 40 * rng.standard_normal();
    d1.push_back(a);
    d2.push_back(b);
    dr.push_back(std::min(a, b));
  }
  const delay_cdf f1(d1), f2(d2), fr(dr);
  for (double t = -50; t <= 250; t += 0.5) {
    EXPECT_LE(fr.survival(t), std::min(f1.survival(t), f2.survival(t)));
  }
}
