#pragma once

// Per-path packet outcome generation: loss processes, delay models and
// recorded one-way delay traces.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rail/error.hpp"
#include "rail/rng.hpp"
#include "rail/time.hpp"

namespace rail {

struct loss_model {
  double rate = 0.0;
  // Probability of repeating the previous outcome; 0 gives i.i.d. loss.
  double correlation = 0.0;

  void check(const std::string& where, std::vector<std::string>& violations) const {
    if (!(rate >= 0.0 && rate <= 1.0))
      violations.push_back(where + ": loss rate must lie in [0,1]");
    if (!(correlation >= 0.0 && correlation < 1.0))
      violations.push_back(where + ": loss correlation must lie in [0,1)");
  }
};

enum class delay_kind { constant, normal, paretonormal, trace };

inline std::string_view to_string(delay_kind k) {
  switch (k) {
    case delay_kind::constant: return "constant";
    case delay_kind::normal: return "normal";
    case delay_kind::paretonormal: return "paretonormal";
    case delay_kind::trace: return "trace";
  }
  return "?";
}

inline std::optional<delay_kind> parse_delay_kind(std::string_view s) {
  if (s == "constant") return delay_kind::constant;
  if (s == "normal") return delay_kind::normal;
  if (s == "paretonormal") return delay_kind::paretonormal;
  if (s == "trace") return delay_kind::trace;
  return std::nullopt;
}

// Mixture used for "paretonormal": with probability `pareto_weight` the
// deviation is stddev * (X - E[X]) for X ~ Pareto(alpha, scale), otherwise
// stddev * N(0,1). Both branches have zero mean, so the mixture keeps `mean`.
struct paretonormal_shape {
  double pareto_weight = 0.25;
  double alpha = 2.0;
  double scale = 1.0;

  double pareto_mean() const { return alpha * scale / (alpha - 1.0); }
};

class outcome {
public:
  static outcome lost() { return outcome(); }
  static outcome delivered(double delay_ms) { return outcome(delay_ms); }

  bool is_lost() const { return !delay_.has_value(); }
  double delay_ms() const { return delay_.value(); }
  const std::optional<double>& delay() const { return delay_; }

  bool operator==(const outcome&) const = default;

private:
  outcome() = default;
  explicit outcome(double d) : delay_(d) {}
  std::optional<double> delay_;
};

struct trace_entry {
  seq_t seq = 0;
  std::optional<double> delay_ms;  // nullopt = lost

  bool operator==(const trace_entry&) const = default;
};

// Recorded one-way delays, one entry per probe. Delay 0 in the text form
// marks a lost probe.
class delay_trace {
public:
  explicit delay_trace(std::vector<trace_entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw config_error("trace must hold at least one entry");
    for (std::size_t i = 1; i < entries_.size(); ++i)
      if (entries_[i].seq <= entries_[i - 1].seq)
        throw config_error("trace seq must be strictly increasing");
  }

  const std::vector<trace_entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const trace_entry* find(seq_t seq) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), seq,
                               [](const trace_entry& e, seq_t s) { return e.seq < s; });
    if (it == entries_.end() || it->seq != seq) return nullptr;
    return &*it;
  }

private:
  std::vector<trace_entry> entries_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

inline delay_trace load_trace(std::istream& in) {
  std::vector<trace_entry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = detail::trim(body);
    if (body.empty()) continue;

    const auto comma = body.find(',');
    if (comma == std::string_view::npos) throw parse_error("expected `seq,delay_ms`", lineno);
    std::int64_t seq = 0;
    double delay = 0.0;
    if (!detail::parse_number(body.substr(0, comma), seq) || seq < 0)
      throw parse_error("bad seq", lineno);
    if (!detail::parse_number(body.substr(comma + 1), delay) || !std::isfinite(delay))
      throw parse_error("bad delay", lineno);
    if (delay < 0.0) throw parse_error("negative delay", lineno);
    if (!entries.empty() && static_cast<seq_t>(seq) <= entries.back().seq)
      throw parse_error("non-monotone seq", lineno);

    trace_entry e;
    e.seq = static_cast<seq_t>(seq);
    if (delay > 0.0) e.delay_ms = delay;
    entries.push_back(e);
  }
  if (entries.empty()) throw parse_error("empty trace");
  return delay_trace(std::move(entries));
}

inline delay_trace load_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_trace(in);
}

inline outcome trace_outcome(const delay_trace& trace, seq_t seq) {
  const trace_entry* e = trace.find(seq);
  if (!e) throw lookup_error("seq " + std::to_string(seq) + " not in trace");
  return e->delay_ms ? outcome::delivered(*e->delay_ms) : outcome::lost();
}

struct delay_model {
  delay_kind kind = delay_kind::constant;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  // AR(1) coefficient applied to the deviation from the mean.
  double correlation = 0.0;
  paretonormal_shape shape;
  std::shared_ptr<const delay_trace> trace;
  std::string trace_path;  // as written in the scenario, for reports

  void check(const std::string& where, std::vector<std::string>& violations) const {
    if (!(mean_ms >= 0.0)) violations.push_back(where + ": delay mean must be >= 0");
    if (!(stddev_ms >= 0.0)) violations.push_back(where + ": delay stddev must be >= 0");
    if (!(correlation >= 0.0 && correlation < 1.0))
      violations.push_back(where + ": delay correlation must lie in [0,1)");
    if (kind == delay_kind::paretonormal) {
      if (!(shape.pareto_weight >= 0.0 && shape.pareto_weight <= 1.0))
        violations.push_back(where + ": pareto weight must lie in [0,1]");
      if (!(shape.alpha > 1.0)) violations.push_back(where + ": pareto alpha must exceed 1");
      if (!(shape.scale > 0.0)) violations.push_back(where + ": pareto scale must be > 0");
    }
    if (kind == delay_kind::trace && !trace)
      violations.push_back(where + ": delay kind `trace` needs a trace file");
  }
};

struct shared_segment_spec {
  std::string id;
  loss_model loss;
};

struct path_spec {
  std::string id;
  loss_model loss;
  delay_model delay;
  std::optional<std::string> shared;  // id of a shared_segment_spec
};

// Sticky loss: with probability `correlation` the previous
// outcome repeats, otherwise a fresh Bernoulli(rate) draw. The stationary
// loss rate of this chain is exactly `rate`.
class loss_process {
public:
  loss_process() = default;
  loss_process(loss_model m, std::uint64_t seed) : model_(m), rng_(seed) {}

  bool next_lost() {
    // Two draws per packet regardless of branch keeps streams aligned.
    const double u_repeat = rng_.uniform();
    const double u_fresh = rng_.uniform();
    bool lost = u_fresh < model_.rate;
    if (previous_ && u_repeat < model_.correlation) lost = *previous_;
    previous_ = lost;
    return lost;
  }

private:
  loss_model model_;
  random_stream rng_;
  std::optional<bool> previous_;
};

class delay_process {
public:
  delay_process() = default;
  delay_process(const delay_model& m, std::uint64_t seed) : model_(&m), rng_(seed) {}

  // Next one-way delay in ms, clamped to >= 0. Not used for trace paths.
  double next_ms() {
    const delay_model& m = *model_;
    if (m.kind == delay_kind::constant) return m.mean_ms;

    // Three uniforms per packet for every stochastic kind.
    const double u_mix = rng_.uniform();
    const double z = rng_.standard_normal();
    double deviation = m.stddev_ms * z;
    if (m.kind == delay_kind::paretonormal) {
      const double x = rng_.pareto(m.shape.alpha, m.shape.scale);
      if (u_mix < m.shape.pareto_weight) deviation = m.stddev_ms * (x - m.shape.pareto_mean());
    }

    if (first_) {
      state_ = deviation;
      first_ = false;
    } else {
      const double c = m.correlation;
      state_ = c * state_ + std::sqrt(1.0 - c * c) * deviation;
    }
    return std::max(0.0, m.mean_ms + state_);
  }

private:
  const delay_model* model_ = nullptr;
  random_stream rng_;
  double state_ = 0.0;
  bool first_ = true;
};

// Shared-segment results for one packet: segment id -> lost.
using shared_outcomes = std::map<std::string, bool, std::less<>>;

// Mutable per-run state of one emulated path. Holds a pointer to its
// spec, which must outlive the state.
class path_state {
public:
  enum stream : std::uint64_t { loss_stream = 1, delay_stream = 2 };

  path_state(const path_spec& spec, std::uint64_t scenario_seed, std::size_t index)
      : spec_(&spec),
        loss_(spec.loss, derive_seed(scenario_seed, loss_stream, index)),
        delay_(spec.delay, derive_seed(scenario_seed, delay_stream, index)) {}

  const path_spec& spec() const { return *spec_; }
  std::size_t trace_wraps() const { return trace_wraps_; }

  outcome next(const shared_outcomes& shared) {
    bool lost = false;
    if (spec_->shared) {
      auto it = shared.find(*spec_->shared);
      if (it == shared.end())
        throw config_error("path " + spec_->id + ": no outcome for shared segment " +
                           *spec_->shared);
      lost = it->second;
    }
    lost = loss_.next_lost() || lost;

    std::optional<double> delay;
    if (spec_->delay.kind == delay_kind::trace) {
      const auto& entries = spec_->delay.trace->entries();
      if (trace_pos_ == entries.size()) {
        trace_pos_ = 0;
        ++trace_wraps_;
      }
      delay = entries[trace_pos_++].delay_ms;
    } else {
      delay = delay_.next_ms();
    }
    if (lost || !delay) return outcome::lost();
    return outcome::delivered(*delay);
  }

private:
  const path_spec* spec_;
  loss_process loss_;
  delay_process delay_;
  std::size_t trace_pos_ = 0;
  std::size_t trace_wraps_ = 0;
};

inline outcome sample_outcome(path_state& state, const shared_outcomes& shared) {
  return state.next(shared);
}

}  // namespace rail
