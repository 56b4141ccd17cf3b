#pragma once

// Edge datapath: encapsulation, fan-out over every WAN path, duplicate
// suppression at the receiving edge, delay padding and the optional
// reorder-removal hold.

#include <cstdint>
#include <deque>
#include <set>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rail/error.hpp"
#include "rail/time.hpp"

namespace rail {

struct rail_header {
  std::uint64_t sender_id = 0;
  seq_t seq = 0;

  bool operator==(const rail_header&) const = default;
};

// Wire layout: sender_id (8 bytes BE) | seq (8 bytes BE) | length (2 bytes BE) | payload.
inline constexpr std::size_t header_wire_size = 18;

struct encapsulated_packet {
  rail_header header;
  std::vector<std::uint8_t> payload;

  bool operator==(const encapsulated_packet&) const = default;
};

namespace detail {

inline void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | in[at + i];
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const rail_header& h, std::span<const std::uint8_t> payload) {
  if (payload.size() > 0xFFFF) throw config_error("payload exceeds 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(header_wire_size + payload.size());
  detail::put_be(out, h.sender_id, 8);
  detail::put_be(out, h.seq, 8);
  detail::put_be(out, payload.size(), 2);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline encapsulated_packet decode(std::span<const std::uint8_t> wire) {
  if (wire.size() < header_wire_size) throw parse_error("truncated RAIL header");
  encapsulated_packet p;
  p.header.sender_id = detail::get_be(wire, 0, 8);
  p.header.seq = detail::get_be(wire, 8, 8);
  const auto len = static_cast<std::size_t>(detail::get_be(wire, 16, 2));
  if (wire.size() != header_wire_size + len)
    throw parse_error("payload length " + std::to_string(len) + " does not match " +
                      std::to_string(wire.size() - header_wire_size) + " trailing bytes");
  p.payload.assign(wire.begin() + header_wire_size, wire.end());
  return p;
}

// One copy per active path, all carrying the same (sender, seq).
inline std::vector<std::pair<std::string, rail_header>> replicate(
    seq_t seq, std::uint64_t sender_id, const std::vector<std::string>& active_paths) {
  if (active_paths.empty()) throw config_error("replicate: no active paths");
  std::vector<std::pair<std::string, rail_header>> copies;
  copies.reserve(active_paths.size());
  for (const auto& id : active_paths) copies.emplace_back(id, rail_header{sender_id, seq});
  return copies;
}

enum class dedup_decision { forward, suppress };

// Remembers the last `window` forwarded (sender, seq) keys in FIFO order.
// A copy arriving after its key was evicted is forwarded again.
class dedup_state {
public:
  static constexpr std::size_t default_window = 4096;

  explicit dedup_state(std::size_t window = default_window) : window_(window) {
    if (window_ < 1) throw config_error("dedup window must be >= 1");
  }

  dedup_decision on_wan_arrival(const rail_header& h, nanos /*arrival_time*/ = nanos{}) {
    const key k{h.sender_id, h.seq};
    if (seen_.contains(k)) return dedup_decision::suppress;
    seen_.insert(k);
    order_.push_back(k);
    if (order_.size() > window_) {
      seen_.erase(order_.front());
      order_.pop_front();
      ++evictions_;
    }
    if (!highest_forwarded_ || h.seq > *highest_forwarded_) highest_forwarded_ = h.seq;
    return dedup_decision::forward;
  }

  std::size_t window() const { return window_; }
  std::size_t remembered() const { return order_.size(); }
  std::size_t evictions() const { return evictions_; }
  std::optional<seq_t> highest_forwarded() const { return highest_forwarded_; }

private:
  struct key {
    std::uint64_t sender;
    seq_t seq;
    bool operator==(const key&) const = default;
  };
  struct key_hash {
    std::size_t operator()(const key& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.seq * 0x9E3779B97F4A7C15ULL ^ k.sender);
    }
  };

  std::size_t window_;
  std::unordered_set<key, key_hash> seen_;
  std::deque<key> order_;
  std::optional<seq_t> highest_forwarded_;
  std::size_t evictions_ = 0;
};

struct padding_config {
  bool enabled = false;
  double target_one_way_ms = 0.0;  // the target delay D
};

// Release time for a packet whose first copy arrived at `arrival` after
// `rail_delay` in the network. Early packets wait until the one-way delay
// reaches the target; late packets go out immediately and are never dropped.
inline nanos padding_release(nanos arrival, nanos rail_delay, nanos target, bool enabled) {
  if (arrival < nanos{} || rail_delay < nanos{})
    throw config_error("padding_release: negative time");
  if (!enabled) return arrival;
  if (target < nanos{}) throw config_error("padding_release: negative target");
  if (rail_delay < target) return arrival + (target - rail_delay);
  return arrival;
}

inline double padding_release(double arrival_ms, double rail_delay_ms, const padding_config& cfg) {
  if (arrival_ms < 0.0 || rail_delay_ms < 0.0)
    throw config_error("padding_release: negative time");
  if (!cfg.enabled) return arrival_ms;
  if (cfg.target_one_way_ms < 0.0) throw config_error("padding_release: negative target");
  if (rail_delay_ms < cfg.target_one_way_ms)
    return arrival_ms + (cfg.target_one_way_ms - rail_delay_ms);
  return arrival_ms;
}

// Hold-for-reorder: a packet is held until every smaller seq has been
// released or declared lost. The caller arms a timer `timeout` after a
// packet is held; when it fires, all gaps below that packet are declared
// lost. Packets that show up after being declared lost are released at once.
class reorder_buffer {
public:
  struct ready_result {
    std::vector<seq_t> released;
    bool held = false;
  };

  explicit reorder_buffer(seq_t first_expected = 0) : next_expected_(first_expected) {}

  ready_result on_ready(seq_t seq) {
    ready_result r;
    if (seq < next_expected_) {
      r.released.push_back(seq);
      return r;
    }
    held_.insert(seq);
    flush(r.released);
    r.held = held_.contains(seq);
    return r;
  }

  std::vector<seq_t> on_timeout(seq_t seq) {
    std::vector<seq_t> out;
    if (!held_.contains(seq)) return out;
    while (!held_.empty() && *held_.begin() <= seq) {
      out.push_back(*held_.begin());
      held_.erase(held_.begin());
    }
    declared_lost_ += (seq + 1 - next_expected_) - out.size();
    next_expected_ = seq + 1;
    flush(out);
    return out;
  }

  seq_t next_expected() const { return next_expected_; }
  std::size_t held() const { return held_.size(); }
  std::size_t declared_lost() const { return declared_lost_; }

private:
  void flush(std::vector<seq_t>& out) {
    while (!held_.empty() && *held_.begin() == next_expected_) {
      out.push_back(next_expected_);
      held_.erase(held_.begin());
      ++next_expected_;
    }
  }

  seq_t next_expected_;
  std::set<seq_t> held_;
  std::size_t declared_lost_ = 0;
};

}  // namespace rail
