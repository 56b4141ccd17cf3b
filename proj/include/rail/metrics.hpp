#pragma once

// Network-level statistics over simulation output: empirical delay CDFs,
// loss bursts, reordering and downtime.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <ranges>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rail/engine.hpp"
#include "rail/error.hpp"

namespace rail {

// Empirical step CDF, F(t) = fraction of samples <= t.
class delay_cdf {
public:
  explicit delay_cdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw config_error("empirical CDF needs at least one sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double t) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  double survival(double t) const { return 1.0 - (*this)(t); }

  const std::vector<double>& sorted_samples() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

  // Nearest-rank quantile, q in [0,1].
  double quantile(double q) const {
    if (q <= 0.0) return sorted_.front();
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted_.size())));
    return sorted_[std::min(rank, sorted_.size()) - 1];
  }

private:
  std::vector<double> sorted_;
};

inline delay_cdf empirical_cdf(std::span<const double> delays) {
  return delay_cdf(std::vector<double>(delays.begin(), delays.end()));
}

// CDF of the minimum of two independent delays.
inline double rail_cdf(double f1, double f2) { return 1.0 - (1.0 - f1) * (1.0 - f2); }

inline double rail_cdf(const delay_cdf& f1, const delay_cdf& f2, double t) {
  return rail_cdf(f1(t), f2(t));
}

struct burst_stats {
  std::size_t lost_in_burst = 0;  // losses inside runs of length >= 2
  std::size_t num_bursts = 0;     // runs of length >= 2
  double avg_burst = 0.0;         // mean length of those runs
  std::size_t max_burst = 0;      // longest loss run of any length

  bool operator==(const burst_stats&) const = default;
};

// A burst is a maximal run of at least two consecutive losses.
template <std::ranges::input_range R>
  requires std::convertible_to<std::ranges::range_value_t<R>, bool>
burst_stats measure_bursts(const R& lost) {
  burst_stats b;
  std::size_t run = 0;
  auto close_run = [&] {
    b.max_burst = std::max(b.max_burst, run);
    if (run >= 2) {
      ++b.num_bursts;
      b.lost_in_burst += run;
    }
    run = 0;
  };
  for (const bool l : lost) {
    if (l)
      ++run;
    else
      close_run();
  }
  close_run();
  if (b.num_bursts > 0)
    b.avg_burst = static_cast<double>(b.lost_in_burst) / static_cast<double>(b.num_bursts);
  return b;
}

struct reorder_stats {
  std::size_t out_of_order_count = 0;
  std::map<seq_t, std::size_t> gaps;  // gap -> occurrences

  bool operator==(const reorder_stats&) const = default;
};

// A packet is out of order when a larger seq was forwarded before it; its
// gap is that largest seq minus its own.
inline reorder_stats measure_reordering(std::span<const seq_t> forwarded_order) {
  reorder_stats r;
  std::optional<seq_t> max_seen;
  for (seq_t s : forwarded_order) {
    if (max_seen && s < *max_seen) {
      ++r.out_of_order_count;
      ++r.gaps[*max_seen - s];
    }
    if (!max_seen || s > *max_seen) max_seen = s;
  }
  return r;
}

// Fraction of time both links are down, assuming independent failures.
inline double downtime_combine(double bad_fraction_1, double bad_fraction_2) {
  require_probability(bad_fraction_1, "bad_fraction_1");
  require_probability(bad_fraction_2, "bad_fraction_2");
  return bad_fraction_1 * bad_fraction_2;
}

struct moments {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

inline moments sample_moments(std::span<const double> xs) {
  moments m;
  m.n = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return m;
}

// --- extraction from simulation output -----------------------------------

// Per-packet one-way delay after the receiving edge (padding and holds
// included); nullopt for packets never forwarded.
inline std::vector<std::optional<double>> forwarded_delays(const sim_result& r) {
  std::vector<std::optional<double>> out;
  out.reserve(r.records.size());
  for (const auto& rec : r.records) out.push_back(rec.one_way_ms());
  return out;
}

// Per-packet network delay of the first copy (min over paths).
inline std::vector<std::optional<double>> rail_network_delays(const sim_result& r) {
  std::vector<std::optional<double>> out;
  out.reserve(r.records.size());
  for (const auto& rec : r.records)
    out.push_back(rec.rail_delay ? std::optional<double>(rec.rail_delay->ms()) : std::nullopt);
  return out;
}

// Per-packet delay seen on one path alone, on the same nanosecond grid as
// the forwarded delays.
inline std::vector<std::optional<double>> path_delays(const sim_result& r, std::size_t path) {
  std::vector<std::optional<double>> out;
  out.reserve(r.records.size());
  for (const auto& rec : r.records) {
    const auto& a = rec.arrivals.at(path);
    out.push_back(a ? std::optional<double>((*a - rec.send_time).ms()) : std::nullopt);
  }
  return out;
}

inline std::vector<bool> loss_flags(std::span<const std::optional<double>> delays) {
  std::vector<bool> out;
  out.reserve(delays.size());
  for (const auto& d : delays) out.push_back(!d.has_value());
  return out;
}

inline std::vector<double> delivered_only(std::span<const std::optional<double>> delays) {
  std::vector<double> out;
  out.reserve(delays.size());
  for (const auto& d : delays)
    if (d) out.push_back(*d);
  return out;
}

inline double loss_fraction(std::span<const std::optional<double>> delays) {
  if (delays.empty()) return 0.0;
  std::size_t lost = 0;
  for (const auto& d : delays) lost += !d.has_value();
  return static_cast<double>(lost) / static_cast<double>(delays.size());
}

inline burst_stats measure_loss_bursts(std::span<const std::optional<double>> delays) {
  return measure_bursts(loss_flags(delays));
}

}  // namespace rail
