#pragma once

// Deterministic discrete-event run of one probe stream over a set of
// emulated paths, with dedup, padding and reorder removal at the far edge.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "rail/error.hpp"
#include "rail/pathsim.hpp"
#include "rail/railedge.hpp"
#include "rail/time.hpp"

namespace rail {

struct traffic_spec {
  std::uint32_t packet_size = 200;  // bytes
  double interval_ms = 20.0;
  std::size_t count = 6000;

  nanos interval() const { return nanos::from_ms(interval_ms); }
};

struct scenario {
  std::string label;
  std::uint64_t seed = 1;
  std::uint64_t sender_id = 1;
  std::vector<path_spec> paths;
  std::vector<shared_segment_spec> shared_segments;
  traffic_spec traffic;
  padding_config padding;
  bool reorder_removal = false;
  std::size_t dedup_window = dedup_state::default_window;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (paths.empty()) v.push_back("scenario needs at least one path");
    std::set<std::string, std::less<>> ids;
    std::set<std::string, std::less<>> shared_ids;
    for (std::size_t i = 0; i < shared_segments.size(); ++i) {
      const auto& s = shared_segments[i];
      const std::string where = "shared." + std::to_string(i);
      if (s.id.empty()) v.push_back(where + ": empty id");
      if (!shared_ids.insert(s.id).second) v.push_back(where + ": duplicate id `" + s.id + "`");
      s.loss.check(where, v);
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& p = paths[i];
      const std::string where = "paths." + std::to_string(i);
      if (p.id.empty()) v.push_back(where + ": empty id");
      if (!ids.insert(p.id).second) v.push_back(where + ": duplicate id `" + p.id + "`");
      p.loss.check(where, v);
      p.delay.check(where, v);
      if (p.shared && !shared_ids.contains(*p.shared))
        v.push_back(where + ": unknown shared segment `" + *p.shared + "`");
    }
    if (!(traffic.interval_ms > 0.0)) v.push_back("traffic: interval_ms must be > 0");
    if (traffic.count < 1) v.push_back("traffic: count must be >= 1");
    if (padding.enabled && !(padding.target_one_way_ms >= 0.0))
      v.push_back("padding: target_ms must be >= 0");
    if (reorder_removal && !(padding.target_one_way_ms > 0.0))
      v.push_back("padding: reorder_removal needs target_ms > 0 as its hold timeout");
    if (dedup_window < 1) v.push_back("dedup: window must be >= 1");
    return v;
  }

  void validate() const {
    if (auto v = violations(); !v.empty()) throw validation_error(std::move(v));
  }
};

struct forward_record {
  seq_t seq = 0;
  nanos send_time;
  std::vector<std::optional<nanos>> arrivals;  // per path, nullopt = lost
  std::optional<nanos> rail_delay;             // first copy's one-way delay
  std::optional<std::size_t> first_path;
  std::optional<nanos> forward_time;
  nanos padding_applied;
  nanos reorder_hold;

  bool delivered() const { return forward_time.has_value(); }
  std::optional<double> one_way_ms() const {
    if (!forward_time) return std::nullopt;
    return (*forward_time - send_time).ms();
  }
};

struct sim_counters {
  std::size_t copies_total = 0;
  std::size_t copies_forwarded = 0;
  std::size_t copies_suppressed = 0;
  std::size_t copies_lost = 0;
  std::size_t window_duplicates = 0;  // copies forwarded again after dedup eviction
  std::size_t declared_lost = 0;      // gaps skipped by the reorder hold timeout
  std::size_t trace_wraps = 0;
};

struct sim_result {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<std::string> path_ids;
  std::vector<forward_record> records;
  std::vector<std::vector<outcome>> per_path_outcomes;
  std::vector<seq_t> forwarded_order;
  sim_counters counters;
};

namespace detail {

struct event {
  enum kind : std::uint8_t { arrival, release, timeout };

  nanos time;
  seq_t seq;
  std::size_t order;  // path index for arrivals, after all paths otherwise
  kind what;

  auto key() const { return std::tie(time, seq, order); }
  bool operator>(const event& o) const { return key() > o.key(); }
};

}  // namespace detail

inline sim_result simulate(const scenario& sc) {
  sc.validate();

  const std::size_t n_paths = sc.paths.size();
  const nanos dt = sc.traffic.interval();
  const nanos target = nanos::from_ms(sc.padding.target_one_way_ms);

  sim_result res;
  res.label = sc.label;
  res.seed = sc.seed;
  for (const auto& p : sc.paths) res.path_ids.push_back(p.id);
  res.records.resize(sc.traffic.count);
  res.per_path_outcomes.assign(n_paths, {});
  for (auto& v : res.per_path_outcomes) v.reserve(sc.traffic.count);

  std::vector<path_state> states;
  states.reserve(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) states.emplace_back(sc.paths[i], sc.seed, i);

  constexpr std::uint64_t shared_stream = 3;
  std::vector<loss_process> shared_procs;
  for (std::size_t i = 0; i < sc.shared_segments.size(); ++i)
    shared_procs.emplace_back(sc.shared_segments[i].loss, derive_seed(sc.seed, shared_stream, i));

  std::priority_queue<detail::event, std::vector<detail::event>, std::greater<>> queue;

  shared_outcomes shared;
  for (std::size_t i = 0; i < sc.traffic.count; ++i) {
    auto& rec = res.records[i];
    rec.seq = i;
    rec.send_time = dt * static_cast<std::int64_t>(i);
    rec.arrivals.assign(n_paths, std::nullopt);

    for (std::size_t s = 0; s < shared_procs.size(); ++s)
      shared[sc.shared_segments[s].id] = shared_procs[s].next_lost();

    const auto copies = replicate(rec.seq, sc.sender_id, res.path_ids);
    for (std::size_t p = 0; p < n_paths; ++p) {
      outcome o = sample_outcome(states[p], shared);
      ++res.counters.copies_total;
      if (o.is_lost()) {
        ++res.counters.copies_lost;
      } else {
        const nanos at = rec.send_time + nanos::from_ms(o.delay_ms());
        rec.arrivals[p] = at;
        queue.push({at, copies[p].second.seq, p, detail::event::arrival});
      }
      res.per_path_outcomes[p].push_back(std::move(o));
    }
  }
  for (const auto& st : states) res.counters.trace_wraps += st.trace_wraps();

  dedup_state dedup(sc.dedup_window);
  reorder_buffer reorder;
  std::vector<nanos> ready_at(sc.traffic.count);

  auto emit = [&](seq_t seq, nanos now) {
    res.forwarded_order.push_back(seq);
    auto& rec = res.records[seq];
    if (!rec.forward_time) {
      rec.forward_time = now;
      rec.reorder_hold = now - ready_at[seq];
    }
  };
  auto ready = [&](seq_t seq, nanos now) {
    if (!sc.reorder_removal) {
      emit(seq, now);
      return;
    }
    auto r = reorder.on_ready(seq);
    for (seq_t s : r.released) emit(s, now);
    if (r.held) queue.push({now + target, seq, n_paths + 1, detail::event::timeout});
  };

  while (!queue.empty()) {
    const detail::event ev = queue.top();
    queue.pop();
    auto& rec = res.records[ev.seq];
    switch (ev.what) {
      case detail::event::arrival: {
        if (dedup.on_wan_arrival({sc.sender_id, ev.seq}, ev.time) == dedup_decision::suppress) {
          ++res.counters.copies_suppressed;
          break;
        }
        ++res.counters.copies_forwarded;
        if (rec.rail_delay) {
          ++res.counters.window_duplicates;
          ready(ev.seq, ev.time);
          break;
        }
        rec.rail_delay = ev.time - rec.send_time;
        rec.first_path = ev.order;
        const nanos release =
            padding_release(ev.time, *rec.rail_delay, target, sc.padding.enabled);
        rec.padding_applied = release - ev.time;
        ready_at[ev.seq] = release;
        if (release == ev.time)
          ready(ev.seq, ev.time);
        else
          queue.push({release, ev.seq, n_paths, detail::event::release});
        break;
      }
      case detail::event::release:
        ready(ev.seq, ev.time);
        break;
      case detail::event::timeout:
        for (seq_t s : reorder.on_timeout(ev.seq)) emit(s, ev.time);
        break;
    }
  }
  res.counters.declared_lost = reorder.declared_lost();
  return res;
}

// Numeric scenario fields addressable by name, shared by the scenario
// parser and the sweep driver. `paths.*.x` applies to every path.
inline void set_parameter(scenario& sc, std::string_view name, double value) {
  auto fail = [&] { throw lookup_error("unknown parameter `" + std::string(name) + "`"); };
  auto split = [](std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto dot = s.find('.', start);
      parts.push_back(s.substr(start, dot - start));
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return parts;
  };
  const auto parts = split(name);

  auto set_path_field = [&](path_spec& p, std::string_view f) {
    if (f == "loss_rate") p.loss.rate = value;
    else if (f == "loss_correlation") p.loss.correlation = value;
    else if (f == "delay_mean_ms") p.delay.mean_ms = value;
    else if (f == "delay_stddev_ms") p.delay.stddev_ms = value;
    else if (f == "delay_correlation") p.delay.correlation = value;
    else if (f == "pareto_weight") p.delay.shape.pareto_weight = value;
    else if (f == "pareto_alpha") p.delay.shape.alpha = value;
    else if (f == "pareto_scale") p.delay.shape.scale = value;
    else fail();
  };
  auto index_of = [&](std::string_view s, std::size_t size) {
    std::size_t idx = 0;
    if (!detail::parse_number(s, idx) || idx >= size) fail();
    return idx;
  };

  if (parts.size() == 3 && parts[0] == "paths") {
    if (parts[1] == "*") {
      if (sc.paths.empty()) fail();
      for (auto& p : sc.paths) set_path_field(p, parts[2]);
    } else {
      set_path_field(sc.paths[index_of(parts[1], sc.paths.size())], parts[2]);
    }
  } else if (parts.size() == 3 && parts[0] == "shared") {
    auto& s = sc.shared_segments[index_of(parts[1], sc.shared_segments.size())];
    if (parts[2] == "loss_rate") s.loss.rate = value;
    else if (parts[2] == "loss_correlation") s.loss.correlation = value;
    else fail();
  } else if (parts.size() == 2 && parts[0] == "traffic") {
    if (parts[1] == "interval_ms") sc.traffic.interval_ms = value;
    else if (parts[1] == "count") sc.traffic.count = static_cast<std::size_t>(value);
    else if (parts[1] == "packet_size") sc.traffic.packet_size = static_cast<std::uint32_t>(value);
    else fail();
  } else if (parts.size() == 2 && parts[0] == "padding") {
    if (parts[1] == "target_ms") sc.padding.target_one_way_ms = value;
    else if (parts[1] == "enabled") sc.padding.enabled = value != 0.0;
    else if (parts[1] == "reorder_removal") sc.reorder_removal = value != 0.0;
    else fail();
  } else if (parts.size() == 2 && parts[0] == "dedup" && parts[1] == "window") {
    sc.dedup_window = static_cast<std::size_t>(value);
  } else {
    fail();
  }
}

// One independent run per value; point i uses seed base.seed + i.
// Points may run on `jobs` threads; results come back in value order.
inline std::vector<std::pair<double, sim_result>> run_sweep(const scenario& base,
                                                            std::string_view parameter,
                                                            const std::vector<double>& values,
                                                            unsigned jobs = 1) {
  {
    scenario probe = base;
    set_parameter(probe, parameter, values.empty() ? 0.0 : values.front());
  }
  std::vector<scenario> points;
  points.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    scenario s = base;
    set_parameter(s, parameter, values[i]);
    s.seed = base.seed + i;
    s.validate();
    points.push_back(std::move(s));
  }

  std::vector<std::pair<double, sim_result>> out(values.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      try {
        out[i] = {values[i], simulate(points[i])};
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace rail
