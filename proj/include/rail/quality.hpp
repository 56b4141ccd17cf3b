#pragma once

// Application-level models: loss combination over redundant paths, E-model
// voice quality with a fixed playout deadline, and long-lived TCP
// throughput over a set of redundant paths.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rail/error.hpp"

namespace rail {

// --- loss combination -----------------------------------------------------

// Loss over independent redundant paths: every copy must be lost.
inline double rail_loss_independent(std::span<const double> rates) {
  if (rates.empty()) throw config_error("rail_loss_independent: empty rate list");
  double p = 1.0;
  for (double r : rates) {
    require_probability(r, "loss rate");
    p *= r;
  }
  return p;
}

// Paths that share one lossy segment: delivery needs the shared segment
// and at least one of the independent segments.
inline double rail_loss_shared(double p_shared, std::span<const double> own_rates) {
  require_probability(p_shared, "p_shared");
  const double all_own_lost = rail_loss_independent(own_rates);
  return 1.0 - (1.0 - p_shared) * (1.0 - all_own_lost);
}

// Network loss plus the share of delivered packets that miss the deadline.
inline double effective_loss(double network_loss, std::span<const std::optional<double>> delays,
                             double deadline_ms) {
  require_probability(network_loss, "network_loss");
  if (deadline_ms < 0.0) throw config_error("effective_loss: negative deadline");
  if (network_loss >= 1.0) return 1.0;
  std::size_t delivered = 0, late = 0;
  for (const auto& d : delays) {
    if (!d) continue;
    ++delivered;
    late += *d > deadline_ms;
  }
  if (delivered == 0) throw config_error("effective_loss: no delivered samples");
  const double p_late = static_cast<double>(late) / static_cast<double>(delivered);
  return network_loss + (1.0 - network_loss) * p_late;
}

// --- E-model --------------------------------------------------------------

// Simplified ITU-T G.107 parameters; defaults are G.711 with packet loss
// concealment.
struct e_model_params {
  double r_base = 93.2;
  double codec_ie = 0.0;
  double codec_bpl = 4.3;
  double delay_knee_ms = 177.3;
  double delay_slope_low = 0.024;
  double delay_slope_high = 0.11;

  void validate() const {
    if (!(r_base >= 0.0 && r_base <= 100.0)) throw config_error("r_base must lie in [0,100]");
    if (codec_ie < 0.0 || codec_bpl < 0.0 || delay_knee_ms < 0.0 || delay_slope_low < 0.0 ||
        delay_slope_high < 0.0)
      throw config_error("E-model parameters must be nonnegative");
  }
};

struct quality_score {
  double r_factor = 0.0;
  double mos = 1.0;
};

// The G.107 cubic dips slightly below 1 for R under about 6.5; it is
// floored at 1 so that MOS stays monotone in R.
inline double r_to_mos(double r) {
  if (r <= 0.0) return 1.0;
  if (r >= 100.0) return 4.5;
  const double m = 1.0 + 0.035 * r + 7e-6 * r * (r - 60.0) * (100.0 - r);
  return std::clamp(m, 1.0, 4.5);
}

inline double loss_impairment(double loss, const e_model_params& p) {
  const double pct = 100.0 * loss;
  if (pct + p.codec_bpl <= 0.0) return p.codec_ie;
  return p.codec_ie + (95.0 - p.codec_ie) * pct / (pct + p.codec_bpl);
}

inline double delay_impairment(double one_way_ms, const e_model_params& p) {
  return p.delay_slope_low * one_way_ms +
         p.delay_slope_high * std::max(0.0, one_way_ms - p.delay_knee_ms);
}

inline quality_score mos(double loss, double one_way_delay_ms, const e_model_params& params = {}) {
  require_probability(loss, "loss");
  if (!(one_way_delay_ms >= 0.0)) throw config_error("mos: delay must be >= 0");
  params.validate();
  quality_score q;
  q.r_factor = std::clamp(params.r_base - loss_impairment(loss, params) -
                              delay_impairment(one_way_delay_ms, params),
                          0.0, 100.0);
  q.mos = r_to_mos(q.r_factor);
  return q;
}

struct mos_point {
  double deadline_ms = 0.0;
  double one_way_ms = 0.0;  // end-system delay + deadline
  double effective_loss = 0.0;
  double mean_delay_ms = 0.0;  // end-system delay + mean on-time network delay
  quality_score score;
};

inline std::vector<double> deadline_range(double from_ms, double to_ms, double step_ms) {
  if (!(step_ms > 0.0) || to_ms < from_ms) throw config_error("bad deadline range");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((to_ms - from_ms) / step_ms + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(from_ms + step_ms * static_cast<double>(i));
  return out;
}

// MOS as a function of a fixed playout deadline, for a per-packet delay
// sequence (nullopt = lost in the network). The interactivity term uses
// the mean delay of packets that make their deadline.
inline std::vector<mos_point> mos_curve(std::span<const std::optional<double>> delays,
                                        std::span<const double> deadlines,
                                        double end_system_delay_ms,
                                        const e_model_params& params = {}) {
  if (deadlines.empty()) throw config_error("mos_curve: empty deadline range");
  if (delays.empty()) throw config_error("mos_curve: no packets");
  if (end_system_delay_ms < 0.0) throw config_error("mos_curve: negative end-system delay");

  std::size_t lost = 0;
  for (const auto& d : delays) lost += !d;
  const double network_loss = static_cast<double>(lost) / static_cast<double>(delays.size());

  std::vector<mos_point> curve;
  curve.reserve(deadlines.size());
  for (double deadline : deadlines) {
    mos_point pt;
    pt.deadline_ms = deadline;
    pt.one_way_ms = end_system_delay_ms + deadline;
    pt.effective_loss = effective_loss(network_loss, delays, deadline);
    double sum = 0.0;
    std::size_t on_time = 0;
    for (const auto& d : delays) {
      if (d && *d <= deadline) {
        sum += std::min(deadline, *d);
        ++on_time;
      }
    }
    const double network_part = on_time ? sum / static_cast<double>(on_time) : deadline;
    pt.mean_delay_ms = end_system_delay_ms + network_part;
    pt.score = mos(pt.effective_loss, pt.mean_delay_ms, params);
    curve.push_back(pt);
  }
  return curve;
}

// Deadline with the highest MOS; the smallest one wins a tie.
inline double optimal_playout(std::span<const mos_point> curve) {
  if (curve.empty()) throw config_error("optimal_playout: empty curve");
  const mos_point* best = &curve.front();
  for (const auto& pt : curve) {
    if (pt.score.mos > best->score.mos ||
        (pt.score.mos == best->score.mos && pt.deadline_ms < best->deadline_ms))
      best = &pt;
  }
  return best->deadline_ms;
}

// --- TCP ------------------------------------------------------------------

inline constexpr double tcp_constant = 1.22;

// Inverse-square-root rule of thumb, packets per second.
inline double tcp_throughput_single(double p, double rtt_ms) {
  if (!(p > 0.0 && p < 1.0)) throw model_domain_error("TCP model needs 0 < p < 1");
  if (!(rtt_ms > 0.0)) throw model_domain_error("TCP model needs rtt > 0");
  return tcp_constant / ((rtt_ms / 1000.0) * std::sqrt(p));
}

struct tcp_path {
  double loss_rate = 0.0;
  double rtt_ms = 0.0;
};

// Paths kept sorted by ascending RTT; the first successful copy in that
// order determines the RTT seen by the sender.
class tcp_path_set {
public:
  explicit tcp_path_set(std::vector<tcp_path> paths) : paths_(std::move(paths)) {
    if (paths_.empty()) throw model_domain_error("TCP path set needs at least one path");
    for (const auto& p : paths_) {
      if (!(p.loss_rate > 0.0 && p.loss_rate < 1.0))
        throw model_domain_error("TCP model needs 0 < p < 1 on every path");
      if (!(p.rtt_ms > 0.0)) throw model_domain_error("TCP model needs rtt > 0 on every path");
    }
    std::stable_sort(paths_.begin(), paths_.end(),
                     [](const tcp_path& a, const tcp_path& b) { return a.rtt_ms < b.rtt_ms; });
  }

  const std::vector<tcp_path>& paths() const { return paths_; }
  std::size_t size() const { return paths_.size(); }
  const tcp_path& operator[](std::size_t i) const { return paths_[i]; }

private:
  std::vector<tcp_path> paths_;
};

struct tcp_prediction {
  double expected_rtt_ms = 0.0;
  double throughput = 0.0;  // packets per second
};

inline tcp_prediction tcp_throughput_rail(const tcp_path_set& set) {
  double all_lost = 1.0;
  for (const auto& p : set.paths()) all_lost *= p.loss_rate;

  // Weight of path i: copies on all faster paths lost, copy i delivered.
  double weighted = 0.0;
  double earlier_lost = 1.0;
  for (const auto& p : set.paths()) {
    weighted += p.rtt_ms * earlier_lost * (1.0 - p.loss_rate);
    earlier_lost *= p.loss_rate;
  }
  tcp_prediction t;
  t.expected_rtt_ms = weighted / (1.0 - all_lost);
  t.throughput = tcp_constant / ((t.expected_rtt_ms / 1000.0) * std::sqrt(all_lost));
  return t;
}

struct two_path_gain {
  bool beats_fast = false;  // T > T_1
  bool beats_slow = false;  // T > T_2
  double ratio_fast = 0.0;  // T / T_1
  double ratio_slow = 0.0;  // T / T_2
};

inline two_path_gain tcp_two_path_gain(const tcp_path_set& set) {
  if (set.size() != 2) throw config_error("tcp_two_path_gain needs exactly two paths");
  const double t = tcp_throughput_rail(set).throughput;
  const double t1 = tcp_throughput_single(set[0].loss_rate, set[0].rtt_ms);
  const double t2 = tcp_throughput_single(set[1].loss_rate, set[1].rtt_ms);
  return {t > t1, t > t2, t / t1, t / t2};
}

}  // namespace rail
