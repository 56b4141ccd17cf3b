#pragma once

// Scenario files: `key = value` lines grouped under [traffic], [padding],
// [dedup], [shared.N] and [paths.N] sections, `#` comments. See
// docs/scenario-format.md for the schema.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "rail/engine.hpp"
#include "rail/error.hpp"
#include "rail/format.hpp"
#include "rail/pathsim.hpp"

namespace rail {

namespace detail {

inline bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return out = true, true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return out = false, true;
  return false;
}

inline std::string strip_quotes(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

}  // namespace detail

// Parses scenario text. Relative trace paths resolve against `base_dir`.
// Semantic checks run afterwards; violations are reported with the line of
// the section that holds the offending field.
inline scenario parse_scenario(std::string_view text,
                               const std::filesystem::path& base_dir = {},
                               const std::string& source = "<scenario>") {
  scenario sc;
  std::map<std::size_t, path_spec> paths;
  std::map<std::size_t, shared_segment_spec> shared;
  std::map<std::string, std::size_t> section_line;

  std::string section;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;

  auto fail = [&](const std::string& msg) -> void { throw parse_error(source + ": " + msg, lineno); };

  auto index_of = [&](std::string_view sec, std::string_view prefix) -> std::optional<std::size_t> {
    if (!sec.starts_with(prefix)) return std::nullopt;
    std::size_t idx = 0;
    if (!detail::parse_number(sec.substr(prefix.size()), idx))
      fail("bad section index in [" + std::string(sec) + "]");
    return idx;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "traffic" && section != "padding" && section != "dedup" &&
          !section.starts_with("paths.") && !section.starts_with("shared."))
        fail("unknown section [" + section + "]");
      if (section_line.contains(section)) fail("duplicate section [" + section + "]");
      section_line[section] = lineno;
      if (auto i = index_of(section, "paths.")) paths[*i];
      if (auto i = index_of(section, "shared.")) shared[*i];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected `key = value`");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value = detail::strip_quotes(detail::trim(line.substr(eq + 1)));

    auto number = [&]() {
      double v = 0.0;
      if (!detail::parse_number(value, v)) fail("`" + key + "` expects a number, got `" + value + "`");
      return v;
    };
    auto integer = [&]() {
      std::uint64_t v = 0;
      if (!detail::parse_number(value, v)) fail("`" + key + "` expects an unsigned integer");
      return v;
    };
    auto boolean = [&]() {
      bool b = false;
      if (!detail::parse_bool(value, b)) fail("`" + key + "` expects true/false");
      return b;
    };

    if (section.empty()) {
      if (key == "label") sc.label = value;
      else if (key == "seed") sc.seed = integer();
      else if (key == "sender_id") sc.sender_id = integer();
      else fail("unknown top-level key `" + key + "`");
    } else if (section == "traffic") {
      if (key == "packet_size") sc.traffic.packet_size = static_cast<std::uint32_t>(integer());
      else if (key == "interval_ms") sc.traffic.interval_ms = number();
      else if (key == "count") sc.traffic.count = integer();
      else fail("unknown key `" + key + "` in [traffic]");
    } else if (section == "padding") {
      if (key == "enabled") sc.padding.enabled = boolean();
      else if (key == "target_ms") sc.padding.target_one_way_ms = number();
      else if (key == "reorder_removal") sc.reorder_removal = boolean();
      else fail("unknown key `" + key + "` in [padding]");
    } else if (section == "dedup") {
      if (key == "window") sc.dedup_window = integer();
      else fail("unknown key `" + key + "` in [dedup]");
    } else if (auto si = index_of(section, "shared.")) {
      auto& s = shared[*si];
      if (key == "id") s.id = value;
      else if (key == "loss_rate") s.loss.rate = number();
      else if (key == "loss_correlation") s.loss.correlation = number();
      else fail("unknown key `" + key + "` in [" + section + "]");
    } else if (auto pi = index_of(section, "paths.")) {
      auto& p = paths[*pi];
      if (key == "id") p.id = value;
      else if (key == "shared") p.shared = value;
      else if (key == "delay") {
        auto kind = parse_delay_kind(value);
        if (!kind) fail("unknown delay kind `" + value + "`");
        p.delay.kind = *kind;
      } else if (key == "trace") {
        std::filesystem::path tp(value);
        if (tp.is_relative() && !base_dir.empty()) tp = base_dir / tp;
        std::ifstream tf(tp);
        if (!tf) fail("trace not found: " + tp.string());
        try {
          p.delay.trace = std::make_shared<const delay_trace>(load_trace(tf));
        } catch (const parse_error& e) {
          fail(std::string("in trace ") + tp.string() + ": " + e.what());
        }
        p.delay.trace_path = value;
      } else {
        scenario tmp;
        tmp.paths.push_back(p);
        try {
          set_parameter(tmp, "paths.0." + key, 0.0);
        } catch (const lookup_error&) {
          fail("unknown key `" + key + "` in [" + section + "]");
        }
        tmp.paths.front() = p;
        set_parameter(tmp, "paths.0." + key, number());
        p = tmp.paths.front();
      }
    }
  }

  auto collect = [&](auto& from, auto& into, const char* name) {
    std::size_t expect = 0;
    for (auto& [idx, item] : from) {
      if (idx != expect) {
        lineno = section_line[std::string(name) + "." + std::to_string(idx)];
        fail(std::string("[") + name + ".N] sections must be numbered 0,1,2,... without gaps");
      }
      into.push_back(std::move(item));
      ++expect;
    }
  };
  collect(shared, sc.shared_segments, "shared");
  collect(paths, sc.paths, "paths");

  auto violations = sc.violations();
  if (!violations.empty()) {
    for (auto& v : violations) {
      const auto colon = v.find(':');
      const std::string sec = colon == std::string::npos ? "" : v.substr(0, colon);
      auto it = section_line.find(sec);
      v = source + (it != section_line.end() ? ":" + std::to_string(it->second) : "") + ": " + v;
    }
    throw validation_error(std::move(violations));
  }
  return sc;
}

inline scenario load_scenario_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("scenario not found: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), file.parent_path(), file.string());
}

// Canonical text form; parse_scenario(serialize_scenario(s)) reproduces s.
inline std::string serialize_scenario(const scenario& sc) {
  std::ostringstream o;
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "label = " << sc.label << "\n";
  o << "seed = " << sc.seed << "\n";
  o << "sender_id = " << sc.sender_id << "\n\n";
  o << "[traffic]\npacket_size = " << sc.traffic.packet_size
    << "\ninterval_ms = " << format_number(sc.traffic.interval_ms)
    << "\ncount = " << sc.traffic.count << "\n\n";
  o << "[padding]\nenabled = " << b(sc.padding.enabled)
    << "\ntarget_ms = " << format_number(sc.padding.target_one_way_ms)
    << "\nreorder_removal = " << b(sc.reorder_removal) << "\n\n";
  o << "[dedup]\nwindow = " << sc.dedup_window << "\n";
  for (std::size_t i = 0; i < sc.shared_segments.size(); ++i) {
    const auto& s = sc.shared_segments[i];
    o << "\n[shared." << i << "]\nid = " << s.id << "\nloss_rate = " << format_number(s.loss.rate)
      << "\nloss_correlation = " << format_number(s.loss.correlation) << "\n";
  }
  for (std::size_t i = 0; i < sc.paths.size(); ++i) {
    const auto& p = sc.paths[i];
    o << "\n[paths." << i << "]\nid = " << p.id
      << "\nloss_rate = " << format_number(p.loss.rate)
      << "\nloss_correlation = " << format_number(p.loss.correlation)
      << "\ndelay = " << to_string(p.delay.kind)
      << "\ndelay_mean_ms = " << format_number(p.delay.mean_ms)
      << "\ndelay_stddev_ms = " << format_number(p.delay.stddev_ms)
      << "\ndelay_correlation = " << format_number(p.delay.correlation) << "\n";
    if (p.delay.kind == delay_kind::paretonormal)
      o << "pareto_weight = " << format_number(p.delay.shape.pareto_weight)
        << "\npareto_alpha = " << format_number(p.delay.shape.alpha)
        << "\npareto_scale = " << format_number(p.delay.shape.scale) << "\n";
    if (!p.delay.trace_path.empty()) o << "trace = " << p.delay.trace_path << "\n";
    if (p.shared) o << "shared = " << *p.shared << "\n";
  }
  return o.str();
}

// FNV-1a over the canonical form, recorded in run manifests.
inline std::uint64_t scenario_hash(const scenario& sc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_scenario(sc)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rail
