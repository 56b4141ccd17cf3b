#pragma once

// Report bundles: per-packet CSV, headline summaries as JSON and a manifest
// that pins everything needed to re-run.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rail/engine.hpp"
#include "rail/error.hpp"
#include "rail/format.hpp"
#include "rail/metrics.hpp"
#include "rail/scenario_io.hpp"

namespace rail {

inline constexpr const char* tool_version = "1.0.0";

// Minimal CSV builder; the header row fixes the schema.
class csv_table {
public:
  explicit csv_table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    row(columns_);
  }

  template <typename... Cells>
  void add(const Cells&... cells) {
    std::vector<std::string> r{cell(cells)...};
    if (r.size() != columns_.size()) throw config_error("csv row width does not match header");
    row(r);
  }

  void add_row(const std::vector<std::string>& r) {
    if (r.size() != columns_.size()) throw config_error("csv row width does not match header");
    row(r);
  }

  const std::string& str() const { return text_; }
  const std::vector<std::string>& columns() const { return columns_; }

  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  template <std::integral I>
  static std::string cell(I v) { return std::to_string(v); }

private:
  void row(const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) text_ += ',';
      text_ += r[i];
    }
    text_ += '\n';
  }

  std::vector<std::string> columns_;
  std::string text_;
};

inline std::string ms_cell(std::optional<nanos> t) { return t ? format_fixed(t->ms(), 6) : ""; }

// seq, send_ms, one arrival column per path ("lost" when that copy was
// lost), rail_delay_ms, first_path, forward_ms, one_way_ms, padding_ms, hold_ms.
inline csv_table records_table(const sim_result& r) {
  std::vector<std::string> cols{"seq", "send_ms"};
  for (const auto& id : r.path_ids) cols.push_back("arrival_ms_" + id);
  for (const char* c : {"rail_delay_ms", "first_path", "forward_ms", "one_way_ms", "padding_ms",
                        "hold_ms"})
    cols.emplace_back(c);
  csv_table t(cols);
  for (const auto& rec : r.records) {
    std::vector<std::string> row{std::to_string(rec.seq), ms_cell(rec.send_time)};
    for (const auto& a : rec.arrivals) row.push_back(a ? ms_cell(a) : "lost");
    row.push_back(rec.rail_delay ? ms_cell(rec.rail_delay) : "lost");
    row.push_back(rec.first_path ? r.path_ids[*rec.first_path] : "");
    row.push_back(ms_cell(rec.forward_time));
    row.push_back(rec.forward_time ? ms_cell(*rec.forward_time - rec.send_time) : "");
    row.push_back(rec.forward_time ? ms_cell(rec.padding_applied) : "");
    row.push_back(rec.forward_time ? ms_cell(rec.reorder_hold) : "");
    t.add_row(row);
  }
  return t;
}

// Order in which one path alone would deliver its copies.
inline std::vector<seq_t> path_arrival_order(const sim_result& r, std::size_t path) {
  std::vector<std::pair<nanos, seq_t>> arr;
  for (const auto& rec : r.records)
    if (rec.arrivals.at(path)) arr.emplace_back(*rec.arrivals[path], rec.seq);
  std::sort(arr.begin(), arr.end());
  std::vector<seq_t> out;
  out.reserve(arr.size());
  for (const auto& a : arr) out.push_back(a.second);
  return out;
}

inline nlohmann::json to_json(const burst_stats& b) {
  return {{"lost_in_burst", b.lost_in_burst},
          {"num_bursts", b.num_bursts},
          {"avg_burst", b.avg_burst},
          {"max_burst", b.max_burst}};
}

inline nlohmann::json to_json(const reorder_stats& r) {
  nlohmann::json gaps = nlohmann::json::object();
  for (const auto& [gap, n] : r.gaps) gaps[std::to_string(gap)] = n;
  return {{"out_of_order", r.out_of_order_count}, {"gaps", gaps}};
}

// Loss, delay moments and percentiles, bursts and reordering for one
// per-packet delay sequence.
inline nlohmann::json stream_summary(std::span<const std::optional<double>> delays,
                                     std::span<const seq_t> delivery_order) {
  nlohmann::json j;
  const auto delivered = delivered_only(delays);
  j["packets"] = delays.size();
  j["delivered"] = delivered.size();
  j["loss_rate"] = loss_fraction(delays);
  const auto m = sample_moments(delivered);
  j["delay_mean_ms"] = m.mean;
  j["delay_stddev_ms"] = m.stddev;
  if (!delivered.empty()) {
    const delay_cdf cdf(delivered);
    j["delay_p50_ms"] = cdf.quantile(0.50);
    j["delay_p95_ms"] = cdf.quantile(0.95);
    j["delay_p99_ms"] = cdf.quantile(0.99);
  }
  j["bursts"] = to_json(measure_loss_bursts(delays));
  j["reordering"] = to_json(measure_reordering(delivery_order));
  return j;
}

inline nlohmann::json sim_summary(const sim_result& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["seed"] = r.seed;
  const auto rail = forwarded_delays(r);
  j["rail"] = stream_summary(rail, r.forwarded_order);
  nlohmann::json paths = nlohmann::json::array();
  for (std::size_t p = 0; p < r.path_ids.size(); ++p) {
    const auto d = path_delays(r, p);
    auto s = stream_summary(d, path_arrival_order(r, p));
    s["id"] = r.path_ids[p];
    paths.push_back(std::move(s));
  }
  j["paths"] = std::move(paths);
  const auto& c = r.counters;
  j["counters"] = {{"copies_total", c.copies_total},
                   {"copies_forwarded", c.copies_forwarded},
                   {"copies_suppressed", c.copies_suppressed},
                   {"copies_lost", c.copies_lost},
                   {"window_duplicates", c.window_duplicates},
                   {"declared_lost", c.declared_lost},
                   {"trace_wraps", c.trace_wraps}};
  nlohmann::json warnings = nlohmann::json::array();
  if (c.trace_wraps > 0)
    warnings.push_back("trace replay wrapped around " + std::to_string(c.trace_wraps) +
                       " time(s); later packets reuse earlier trace entries");
  if (c.window_duplicates > 0)
    warnings.push_back(std::to_string(c.window_duplicates) +
                       " duplicate(s) forwarded after dedup window eviction");
  j["warnings"] = std::move(warnings);
  return j;
}

struct report_bundle {
  nlohmann::json manifest;
  std::vector<std::pair<std::string, std::string>> tables;  // file stem -> CSV text
  nlohmann::json summary;

  void add_table(const std::string& name, const csv_table& t) { tables.emplace_back(name, t.str()); }

  // Writes <name>.csv for every table plus summary.json and manifest.json.
  void write(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    auto put = [&](const std::string& file, const std::string& text) {
      std::ofstream out(dir / file, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
      out << text;
    };
    nlohmann::json m = manifest;
    m["tool_version"] = tool_version;
    nlohmann::json names = nlohmann::json::array();
    for (const auto& [name, text] : tables) {
      put(name + ".csv", text);
      names.push_back(name + ".csv");
    }
    m["tables"] = names;
    put("summary.json", summary.dump(2) + "\n");
    put("manifest.json", m.dump(2) + "\n");
  }
};

inline std::string hex64(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex;
  o.width(16);
  o.fill('0');
  o << v;
  return o.str();
}

inline nlohmann::json scenario_manifest(const scenario& sc, const std::string& command) {
  return {{"command", command},
          {"seed", sc.seed},
          {"scenario_hash", hex64(scenario_hash(sc))},
          {"scenario", serialize_scenario(sc)}};
}

}  // namespace rail
