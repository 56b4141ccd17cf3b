#pragma once

// Canned desk-scale experiments and the property checks run against them.
// Every check produces a CSV table so reruns can be compared byte for byte.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rail/engine.hpp"
#include "rail/metrics.hpp"
#include "rail/quality.hpp"
#include "rail/report.hpp"
#include "rail/rng.hpp"

namespace rail {

struct criterion_result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  std::string table_name;
  std::string csv;
};

struct criterion {
  int id;
  std::string name;
  std::function<criterion_result()> run;
};

namespace suite {

inline path_spec make_path(std::string id, double loss, delay_kind kind, double mean_ms,
                           double stddev_ms = 0.0) {
  path_spec p;
  p.id = std::move(id);
  p.loss.rate = loss;
  p.delay.kind = kind;
  p.delay.mean_ms = mean_ms;
  p.delay.stddev_ms = stddev_ms;
  return p;
}

inline scenario two_paths(std::string label, std::uint64_t seed, path_spec a, path_spec b,
                          std::size_t count) {
  scenario sc;
  sc.label = std::move(label);
  sc.seed = seed;
  sc.paths = {std::move(a), std::move(b)};
  sc.traffic.count = count;
  return sc;
}

// Lost packets become +inf so a CDF over all sent packets stays defined.
inline std::vector<double> with_losses_as_inf(std::span<const std::optional<double>> d) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& x : d) out.push_back(x ? *x : std::numeric_limits<double>::infinity());
  return out;
}

inline criterion_result finish(int id, std::string name, bool ok, std::string detail,
                               std::string table_name, const csv_table& t) {
  return {id, std::move(name), ok, std::move(detail), std::move(table_name), t.str()};
}

inline criterion_result downtime_table() {
  csv_table t({"bad_fraction_single", "bad_fraction_rail", "expected"});
  const std::pair<double, double> rows[] = {
      {0.10, 0.01}, {0.02, 0.0004}, {0.005, 0.000025}, {0.001, 0.000001}};
  bool ok = true;
  for (auto [single, expected] : rows) {
    const double got = downtime_combine(single, single);
    ok = ok && std::abs(got - expected) <= 1e-12 * expected;
    t.add(single, got, expected);
  }
  return finish(1, "downtime table", ok, ok ? "4/4 rows exact" : "row mismatch", "downtime", t);
}

inline criterion_result loss_squaring() {
  constexpr std::size_t n = 100000;
  csv_table t({"p", "path_a_loss", "path_b_loss", "rail_loss", "sigma_single", "sigma_rail",
               "within_3sigma"});
  std::size_t bad = 0;
  for (int i = 1; i <= 20; ++i) {
    const double p = 0.01 * i;
    auto sc = two_paths("loss-" + std::to_string(i), 900 + i,
                        make_path("a", p, delay_kind::constant, 30.0),
                        make_path("b", p, delay_kind::constant, 40.0), n);
    const auto r = simulate(sc);
    const double la = loss_fraction(path_delays(r, 0));
    const double lb = loss_fraction(path_delays(r, 1));
    const double lr = loss_fraction(forwarded_delays(r));
    const double s1 = std::sqrt(p * (1 - p) / n);
    const double p2 = p * p;
    const double s2 = std::sqrt(p2 * (1 - p2) / n);
    const bool ok = std::abs(la - p) <= 3 * s1 && std::abs(lb - p) <= 3 * s1 &&
                    std::abs(lr - p2) <= 3 * s2;
    bad += !ok;
    t.add(p, la, lb, lr, s1, s2, ok);
  }
  return finish(2, "loss squaring", bad == 0,
                std::to_string(20 - bad) + "/20 loss rates within 3 sigma", "loss_sweep", t);
}

inline criterion_result cdf_dominance() {
  csv_table t({"scenario", "kind_a", "mean_a", "sd_a", "loss_a", "kind_b", "mean_b", "sd_b",
               "loss_b", "points", "violations"});
  random_stream pick(derive_seed(3, 0, 0));
  std::size_t violations = 0;
  for (int s = 0; s < 50; ++s) {
    auto draw_path = [&](std::string id) {
      const auto kind = pick.uniform() < 0.5 ? delay_kind::normal : delay_kind::paretonormal;
      const double mean = 20.0 + 130.0 * pick.uniform();
      const double sd = 1.0 + 39.0 * pick.uniform();
      const double loss = 0.1 * pick.uniform();
      return make_path(std::move(id), loss, kind, mean, sd);
    };
    auto a = draw_path("a");
    auto b = draw_path("b");
    auto sc = two_paths("cdf-" + std::to_string(s), 3000 + s, a, b, 2000);
    const auto r = simulate(sc);
    const delay_cdf f1(with_losses_as_inf(path_delays(r, 0)));
    const delay_cdf f2(with_losses_as_inf(path_delays(r, 1)));
    const delay_cdf fr(with_losses_as_inf(rail_network_delays(r)));
    std::vector<double> points;
    for (const auto* f : {&f1, &f2, &fr})
      for (double x : f->sorted_samples())
        if (std::isfinite(x)) points.push_back(x);
    std::size_t v = 0;
    for (double x : points) v += fr.survival(x) > std::min(f1.survival(x), f2.survival(x));
    violations += v;
    t.add(s, std::string(to_string(a.delay.kind)), a.delay.mean_ms, a.delay.stddev_ms, a.loss.rate,
          std::string(to_string(b.delay.kind)), b.delay.mean_ms, b.delay.stddev_ms, b.loss.rate,
          points.size(), v);
  }
  return finish(3, "delay CDF dominance", violations == 0,
                std::to_string(violations) + " violations over 50 scenarios", "cdf_dominance", t);
}

inline bool is_sorted_seq(const std::vector<seq_t>& v) { return std::is_sorted(v.begin(), v.end()); }

inline criterion_result in_order_paths() {
  csv_table t({"run", "sd_a", "sd_b", "paths_in_order", "forwarded_sorted"});
  random_stream pick(derive_seed(4, 0, 0));
  std::size_t violations = 0, applicable = 0;
  for (int run = 0; run < 100; ++run) {
    const double sd_a = 0.5 + 5.5 * pick.uniform();
    const double sd_b = 0.5 + 5.5 * pick.uniform();
    auto sc = two_paths("order-" + std::to_string(run), 4000 + run,
                        make_path("a", 0.0, delay_kind::normal, 40.0, sd_a),
                        make_path("b", 0.0, delay_kind::normal, 55.0, sd_b), 500);
    const auto r = simulate(sc);
    const bool in_order =
        is_sorted_seq(path_arrival_order(r, 0)) && is_sorted_seq(path_arrival_order(r, 1));
    const bool sorted = is_sorted_seq(r.forwarded_order);
    applicable += in_order;
    violations += in_order && !sorted;
    t.add(run, sd_a, sd_b, in_order, sorted);
  }
  const bool ok = violations == 0 && applicable > 0;
  return finish(4, "in-order paths give in-order output", ok,
                std::to_string(applicable) + "/100 runs with in-order paths, " +
                    std::to_string(violations) + " violations",
                "in_order", t);
}

// Fast path 10 ms with packet `lost_seq` dropped, slow path 50 ms, 20 ms spacing.
inline scenario fast_path_loss_scenario(bool reorder_removal) {
  constexpr std::size_t count = 10;
  constexpr seq_t lost_seq = 4;
  std::vector<trace_entry> entries;
  for (seq_t s = 0; s < count; ++s)
    entries.push_back({s, s == lost_seq ? std::nullopt : std::optional<double>(10.0)});
  auto fast = make_path("fast", 0.0, delay_kind::trace, 0.0);
  fast.delay.trace = std::make_shared<const delay_trace>(std::move(entries));
  auto sc = two_paths("fast-path-loss", 5, fast, make_path("slow", 0.0, delay_kind::constant, 50.0),
                      count);
  sc.traffic.interval_ms = 20.0;
  sc.reorder_removal = reorder_removal;
  sc.padding.target_one_way_ms = 100.0;
  return sc;
}

inline criterion_result late_not_lost() {
  constexpr seq_t lost_seq = 4;
  csv_table t({"reorder_removal", "forwarded_order", "out_of_order", "gap1", "packet_n_delivered"});
  auto order_text = [](const std::vector<seq_t>& v) {
    std::string s;
    for (seq_t x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
    return s;
  };
  const auto plain = simulate(fast_path_loss_scenario(false));
  const auto fixed = simulate(fast_path_loss_scenario(true));
  const auto rp = measure_reordering(plain.forwarded_order);
  const auto rf = measure_reordering(fixed.forwarded_order);
  auto gap1 = [](const reorder_stats& r) { return r.gaps.contains(1) ? r.gaps.at(1) : 0; };
  const bool n_plain = plain.records[lost_seq].delivered();
  const bool n_fixed = fixed.records[lost_seq].delivered();
  t.add(false, order_text(plain.forwarded_order), rp.out_of_order_count, gap1(rp), n_plain);
  t.add(true, order_text(fixed.forwarded_order), rf.out_of_order_count, gap1(rf), n_fixed);
  const bool ok = rp.out_of_order_count == 1 && rp.gaps.size() == 1 && gap1(rp) == 1 &&
                  rf.out_of_order_count == 0 && n_fixed && fixed.counters.declared_lost == 0;
  return finish(5, "fast-path loss becomes late, not lost", ok,
                "out-of-order " + std::to_string(rp.out_of_order_count) + " -> " +
                    std::to_string(rf.out_of_order_count),
                "fast_path_loss", t);
}

inline criterion_result burst_dominance() {
  csv_table t({"rate", "correlation", "single_lost_in_burst", "single_num_bursts",
               "single_avg_burst", "single_max_burst", "rail_lost_in_burst", "rail_num_bursts",
               "rail_avg_burst", "rail_max_burst", "dominated"});
  std::size_t bad = 0, cell = 0;
  for (int ri = 1; ri <= 5; ++ri) {
    for (int ci = 0; ci <= 4; ++ci, ++cell) {
      const double rate = 0.1 * ri, corr = 0.2 * ci;
      auto a = make_path("a", rate, delay_kind::constant, 50.0);
      auto b = make_path("b", rate, delay_kind::constant, 60.0);
      a.loss.correlation = b.loss.correlation = corr;
      const auto r = simulate(two_paths("bursts", 6000 + cell, a, b, 1000));
      const auto single = measure_loss_bursts(path_delays(r, 0));
      const auto rail = measure_loss_bursts(forwarded_delays(r));
      const bool ok = rail.lost_in_burst <= single.lost_in_burst &&
                      rail.num_bursts <= single.num_bursts && rail.avg_burst <= single.avg_burst &&
                      rail.max_burst <= single.max_burst;
      bad += !ok;
      t.add(rate, corr, single.lost_in_burst, single.num_bursts, single.avg_burst,
            single.max_burst, rail.lost_in_burst, rail.num_bursts, rail.avg_burst, rail.max_burst,
            ok);
    }
  }
  return finish(6, "burst dominance", bad == 0, std::to_string(25 - bad) + "/25 cells dominated",
                "burst_grid", t);
}

inline std::vector<double> tcp_loss_grid() {
  std::vector<double> v;
  for (int i = 0; i < 20; ++i) v.push_back(std::pow(10.0, -4.0 + 3.0 * i / 19.0));
  return v;
}

inline std::vector<double> tcp_ratio_grid() {
  std::vector<double> v;
  for (int i = 0; i < 10; ++i) v.push_back(1.0 + i);
  return v;
}

inline criterion_result tcp_two_paths() {
  constexpr double rtt1 = 10.0;
  csv_table t({"p", "rtt_ratio", "throughput_rail", "throughput_fast", "throughput_slow",
               "ratio_fast", "ratio_slow"});
  bool beats = true;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double p : tcp_loss_grid()) {
    for (double ratio : tcp_ratio_grid()) {
      const tcp_path_set set({{p, rtt1}, {p, rtt1 * ratio}});
      const auto f = tcp_two_path_gain(set);
      const double tr = tcp_throughput_rail(set).throughput;
      beats = beats && f.beats_fast && f.beats_slow;
      // Whole grid lies in the practical region: p <= 10%, RTT gap <= 100 ms.
      if (p <= 0.1 + 1e-12 && rtt1 * (ratio - 1.0) <= 100.0) {
        lo = std::min(lo, f.ratio_fast);
        hi = std::max(hi, f.ratio_fast);
      }
      t.add(p, ratio, tr, tcp_throughput_single(p, rtt1), tcp_throughput_single(p, rtt1 * ratio),
            f.ratio_fast, f.ratio_slow);
    }
  }
  const double spot = tcp_two_path_gain(tcp_path_set({{0.01, rtt1}, {0.01, rtt1 * 10}})).ratio_fast;
  const bool spot_ok = std::abs(spot - 101.0 / 11.0) <= 1e-6;
  const bool range_ok = lo >= 4.0 && hi <= 10.0;
  std::string detail = std::string("beats both paths: ") + (beats ? "yes" : "no") +
                       "; spot ratio " + format_number(spot) + "; practical-region ratio range [" +
                       format_number(lo) + ", " + format_number(hi) + "] vs [4, 10]";
  return finish(7, "TCP over two paths", beats && spot_ok && range_ok, detail, "tcp_surface", t);
}

inline criterion_result tcp_n_paths() {
  constexpr double rtt = 100.0;
  csv_table t({"p", "n", "throughput", "increment"});
  bool increasing = true, shrinking = true, eq2_ok = true;
  for (double p : {0.001, 0.01, 0.05}) {
    std::vector<double> tp;
    for (int n = 1; n <= 5; ++n) {
      std::vector<tcp_path> paths(n, {p, rtt});
      tp.push_back(tcp_throughput_rail(tcp_path_set(paths)).throughput);
      const double inc = n == 1 ? 0.0 : tp[n - 1] - tp[n - 2];
      t.add(p, n, tp.back(), inc);
    }
    for (std::size_t i = 1; i < tp.size(); ++i) increasing = increasing && tp[i] > tp[i - 1];
    for (std::size_t i = 2; i < tp.size(); ++i)
      shrinking = shrinking && (tp[i] - tp[i - 1]) < (tp[i - 1] - tp[i - 2]);
    // Two-path closed form: E[RTT] = (RTT1 (1-p1) + RTT2 p1 (1-p2)) / (1 - p1 p2).
    const double e_rtt = (rtt * (1 - p) + rtt * p * (1 - p)) / (1 - p * p);
    const double eq2 = tcp_constant / ((e_rtt / 1000.0) * std::sqrt(p * p));
    eq2_ok = eq2_ok && std::abs(tp[1] - eq2) <= 1e-12 * eq2;
  }
  std::string detail = std::string("increasing: ") + (increasing ? "yes" : "no") +
                       "; increments decreasing: " + (shrinking ? "yes" : "no") +
                       "; two-path closed form: " + (eq2_ok ? "match" : "mismatch");
  return finish(8, "TCP over n paths", increasing && shrinking && eq2_ok, detail, "tcp_n_paths",
                t);
}

inline constexpr double suite_end_system_ms = 25.0;

inline criterion_result mos_dominance() {
  csv_table t({"scenario", "deadline_ms", "mos_rail", "mos_a", "mos_b"});
  random_stream pick(derive_seed(9, 0, 0));
  const auto deadlines = deadline_range(50.0, 400.0, 10.0);
  std::size_t violations = 0;
  for (int s = 0; s < 20; ++s) {
    auto draw_path = [&](std::string id) {
      const auto kind = pick.uniform() < 0.5 ? delay_kind::normal : delay_kind::paretonormal;
      return make_path(std::move(id), 0.1 * pick.uniform(), kind, 20.0 + 180.0 * pick.uniform(),
                       5.0 + 45.0 * pick.uniform());
    };
    auto a = draw_path("a");
    auto b = draw_path("b");
    const auto r = simulate(two_paths("mos-" + std::to_string(s), 9000 + s, a, b, 2000));
    const auto cr = mos_curve(rail_network_delays(r), deadlines, suite_end_system_ms);
    const auto ca = mos_curve(path_delays(r, 0), deadlines, suite_end_system_ms);
    const auto cb = mos_curve(path_delays(r, 1), deadlines, suite_end_system_ms);
    for (std::size_t i = 0; i < deadlines.size(); ++i) {
      violations += cr[i].score.mos < std::max(ca[i].score.mos, cb[i].score.mos) - 1e-9;
      t.add(s, deadlines[i], cr[i].score.mos, ca[i].score.mos, cb[i].score.mos);
    }
  }
  std::size_t monotone_breaks = 0;
  for (int d = 0; d <= 400; d += 25) {
    double prev = 5.0;
    for (int l = 0; l <= 100; ++l) {
      const double m = mos(l / 100.0, d).mos;
      monotone_breaks += m > prev;
      prev = m;
    }
  }
  return finish(9, "MOS dominance", violations == 0 && monotone_breaks == 0,
                std::to_string(violations) + " dominance violations, " +
                    std::to_string(monotone_breaks) + " monotonicity breaks",
                "mos_dominance", t);
}

inline scenario padding_scenario() {
  auto sc = two_paths("padding", 10, make_path("a", 0.01, delay_kind::normal, 100.0, 20.0),
                      make_path("b", 0.01, delay_kind::normal, 50.0, 20.0), 6000);
  return sc;
}

inline criterion_result padding_jitter() {
  auto sc = padding_scenario();
  const auto plain = simulate(sc);
  const auto rail = delivered_only(rail_network_delays(plain));
  const double target = delay_cdf(rail).quantile(0.95);
  sc.padding.enabled = true;
  sc.padding.target_one_way_ms = target;
  const auto padded = simulate(sc);
  const auto d0 = delivered_only(forwarded_delays(plain));
  const auto d1 = delivered_only(forwarded_delays(padded));
  const auto m0 = sample_moments(d0), m1 = sample_moments(d1);
  csv_table t({"padding", "target_ms", "delivered", "mean_ms", "stddev_ms"});
  t.add(false, 0.0, d0.size(), m0.mean, m0.stddev);
  t.add(true, target, d1.size(), m1.mean, m1.stddev);
  const bool ok = m1.stddev < m0.stddev && d0.size() == d1.size();
  return finish(10, "padding reduces jitter", ok,
                "stddev " + format_fixed(m0.stddev, 3) + " -> " + format_fixed(m1.stddev, 3) +
                    " ms at D=" + format_fixed(target, 3) + " ms",
                "padding_demo", t);
}

inline std::vector<criterion> criteria() {
  return {{1, "downtime table", downtime_table},
          {2, "loss squaring", loss_squaring},
          {3, "delay CDF dominance", cdf_dominance},
          {4, "in-order paths give in-order output", in_order_paths},
          {5, "fast-path loss becomes late, not lost", late_not_lost},
          {6, "burst dominance", burst_dominance},
          {7, "TCP over two paths", tcp_two_paths},
          {8, "TCP over n paths", tcp_n_paths},
          {9, "MOS dominance", mos_dominance},
          {10, "padding reduces jitter", padding_jitter}};
}

// Reruns every other criterion and compares its CSV byte for byte.
inline criterion_result determinism(const std::vector<criterion_result>& first) {
  csv_table t({"criterion", "bytes", "identical"});
  bool ok = !first.empty();
  for (const auto& c : criteria()) {
    auto it = std::find_if(first.begin(), first.end(),
                           [&](const criterion_result& r) { return r.id == c.id; });
    if (it == first.end()) continue;
    const bool same = c.run().csv == it->csv;
    ok = ok && same;
    t.add(c.id, it->csv.size(), same);
  }
  return finish(11, "determinism", ok, ok ? "all tables identical on rerun" : "tables differ",
                "determinism", t);
}

// --- descriptive tables ---------------------------------------------------

// Both paths paretonormal at mean 100 ms, sigma swept.
inline csv_table jitter_sweep() {
  csv_table t({"sigma_ms", "single_mean_ms", "single_stddev_ms", "single_p95_ms", "rail_mean_ms",
               "rail_stddev_ms", "rail_p95_ms"});
  for (int i = 1; i <= 10; ++i) {
    const double sd = 10.0 * i;
    const auto r = simulate(two_paths("jitter", 1100 + i,
                                      make_path("a", 0.0, delay_kind::paretonormal, 100.0, sd),
                                      make_path("b", 0.0, delay_kind::paretonormal, 100.0, sd),
                                      6000));
    const auto s = delivered_only(path_delays(r, 0));
    const auto rd = delivered_only(rail_network_delays(r));
    const auto ms = sample_moments(s), mr = sample_moments(rd);
    t.add(sd, ms.mean, ms.stddev, delay_cdf(s).quantile(0.95), mr.mean, mr.stddev,
          delay_cdf(rd).quantile(0.95));
  }
  return t;
}

// MOS over a loss x one-way delay grid, for contour plots.
inline csv_table mos_grid(double max_loss = 0.2, double loss_step = 0.01, double max_delay_ms = 400,
                          double delay_step_ms = 10, const e_model_params& params = {}) {
  if (!(loss_step > 0.0) || !(delay_step_ms > 0.0)) throw config_error("grid steps must be > 0");
  csv_table t({"loss", "one_way_ms", "r_factor", "mos"});
  const auto nl = static_cast<int>(std::floor(max_loss / loss_step + 1e-9));
  const auto nd = static_cast<int>(std::floor(max_delay_ms / delay_step_ms + 1e-9));
  for (int i = 0; i <= nl; ++i)
    for (int j = 0; j <= nd; ++j) {
      const auto q = mos(i * loss_step, j * delay_step_ms, params);
      t.add(i * loss_step, j * delay_step_ms, q.r_factor, q.mos);
    }
  return t;
}

}  // namespace suite

struct suite_run {
  std::vector<criterion_result> results;
  report_bundle bundle;
  bool all_passed() const {
    return std::all_of(results.begin(), results.end(),
                       [](const criterion_result& r) { return r.passed; });
  }
};

inline suite_run run_paper_suite(bool check_determinism = true) {
  suite_run out;
  for (const auto& c : suite::criteria()) out.results.push_back(c.run());
  if (check_determinism) out.results.push_back(suite::determinism(out.results));

  csv_table verdicts({"criterion", "name", "passed", "detail"});
  nlohmann::json props = nlohmann::json::array();
  for (const auto& r : out.results) {
    if (r.id != 11) out.bundle.tables.emplace_back(r.table_name, r.csv);
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    verdicts.add(r.id, r.name, r.passed, detail);
    props.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  out.bundle.add_table("jitter_sweep", suite::jitter_sweep());
  out.bundle.add_table("mos_contour", suite::mos_grid());
  out.bundle.add_table("verdicts", verdicts);
  out.bundle.summary = {{"properties", props}, {"all_passed", out.all_passed()}};
  out.bundle.manifest = {{"command", "paper-suite"}, {"seeds", "built-in"}};
  return out;
}

}  // namespace rail
