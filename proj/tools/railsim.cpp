// railsim: scenario runner and report generator.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 acceptance failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rail/rail.hpp"

namespace fs = std::filesystem;
using namespace rail;

namespace {

constexpr const char* out_env = "RAIL_OUT_DIR";

fs::path out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(out_env); env && *env) return env;
  return "rail-out";
}

scenario load(const std::string& file, const std::optional<std::uint64_t>& seed) {
  scenario sc = load_scenario_file(file);
  if (seed) sc.seed = *seed;
  return sc;
}

std::vector<double> parse_list(const std::string& text, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    double v = 0.0;
    if (!detail::parse_number(detail::trim(item), v))
      throw config_error("not a number: `" + item + "`");
    out.push_back(v);
  }
  if (out.empty()) throw config_error("empty value list");
  return out;
}

// "p1,rtt1;p2,rtt2"
std::vector<tcp_path> parse_tcp_paths(const std::string& text) {
  std::vector<tcp_path> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (detail::trim(item).empty()) continue;
    const auto v = parse_list(item);
    if (v.size() != 2) throw config_error("expected `loss,rtt_ms`, got `" + item + "`");
    out.push_back({v[0], v[1]});
  }
  return out;
}

csv_table metrics_table(const nlohmann::json& summary) {
  csv_table t({"stream", "metric", "value"});
  auto add_stream = [&](const std::string& name, const nlohmann::json& s) {
    for (const char* k : {"packets", "delivered", "loss_rate", "delay_mean_ms", "delay_stddev_ms",
                          "delay_p50_ms", "delay_p95_ms", "delay_p99_ms"})
      if (s.contains(k)) t.add(name, std::string(k), s[k].get<double>());
    for (const auto& [k, v] : s["bursts"].items()) t.add(name, "burst_" + k, v.get<double>());
    t.add(name, std::string("out_of_order"), s["reordering"]["out_of_order"].get<double>());
  };
  add_stream("rail", summary["rail"]);
  for (const auto& p : summary["paths"]) add_stream(p["id"].get<std::string>(), p);
  return t;
}

void print_mos_points(const std::string& stream, const std::vector<mos_point>& curve,
                      csv_table& t) {
  for (const auto& pt : curve)
    t.add(stream, pt.deadline_ms, pt.one_way_ms, pt.effective_loss, pt.mean_delay_ms,
          pt.score.r_factor, pt.score.mos);
}

void emit(const std::string& format, const csv_table& t, const nlohmann::json& j) {
  if (format == "json")
    std::cout << j.dump(2) << "\n";
  else
    std::cout << t.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redundant-path (RAIL) network simulator and report generator.\n"
               "Output directory defaults to $" + std::string(out_env) + ", else ./rail-out."};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  std::string format = "json";
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  // simulate
  std::string scenario_file, out_flag;
  std::optional<std::uint64_t> seed;
  auto* sim = app.add_subcommand("simulate", "Run one scenario; write per-packet CSV and JSON metrics");
  sim->add_option("--scenario", scenario_file, "Scenario file")->required();
  sim->add_option("--out", out_flag, "Output directory");
  sim->add_option("--seed", seed, "Override the scenario seed");
  add_format(sim);

  // sweep
  std::string param, values_text;
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario for each value of one parameter");
  sweep->add_option("--scenario", scenario_file, "Base scenario file")->required();
  sweep->add_option("--param", param, "Parameter name, e.g. paths.*.loss_rate")->required();
  sweep->add_option("--values", values_text, "Comma-separated values")->required();
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_flag, "Output directory");
  sweep->add_option("--seed", seed, "Base seed; point i uses seed + i");
  add_format(sweep);

  // mos
  double loss = 0.0, delay = 0.0;
  bool grid = false;
  double max_loss = 0.2, loss_step = 0.01, max_delay = 400.0, delay_step = 10.0;
  auto* mos_cmd = app.add_subcommand("mos", "E-model score for a loss rate and one-way delay");
  mos_cmd->add_option("--loss", loss, "Loss rate in [0,1]");
  mos_cmd->add_option("--delay", delay, "One-way delay in ms");
  mos_cmd->add_flag("--grid", grid, "Emit a loss x delay contour grid instead");
  mos_cmd->add_option("--max-loss", max_loss, "Grid: largest loss rate");
  mos_cmd->add_option("--loss-step", loss_step, "Grid: loss step");
  mos_cmd->add_option("--max-delay", max_delay, "Grid: largest delay in ms");
  mos_cmd->add_option("--delay-step", delay_step, "Grid: delay step in ms");
  mos_cmd->add_option("--out", out_flag, "Write the grid to this directory instead of stdout");
  add_format(mos_cmd);

  // mos-curve
  double end_system = 0.0, from = 50.0, to = 400.0, step = 10.0;
  auto* curve_cmd = app.add_subcommand("mos-curve", "MOS versus playout deadline for a scenario");
  curve_cmd->add_option("--scenario", scenario_file, "Scenario file")->required();
  curve_cmd->add_option("--end-system", end_system, "End-system delay in ms")->required();
  curve_cmd->add_option("--from", from, "First deadline in ms");
  curve_cmd->add_option("--to", to, "Last deadline in ms");
  curve_cmd->add_option("--step", step, "Deadline step in ms");
  curve_cmd->add_option("--out", out_flag, "Output directory");
  curve_cmd->add_option("--seed", seed, "Override the scenario seed");
  add_format(curve_cmd);

  // tcp-model
  std::string tcp_text;
  auto* tcp_cmd = app.add_subcommand("tcp-model", "TCP throughput over a set of redundant paths");
  tcp_cmd->add_option("--paths", tcp_text, "Paths as `loss,rtt_ms;loss,rtt_ms;...`")->required();
  add_format(tcp_cmd);

  // paper-suite
  auto* suite_cmd = app.add_subcommand("paper-suite", "Run the canned experiment suite and property checks");
  suite_cmd->add_option("--out", out_flag, "Output directory");

  // trace-analyze
  std::string trace_file;
  double interval = 20.0;
  auto* trace_cmd = app.add_subcommand("trace-analyze", "Loss, delay and reordering of a delay trace");
  trace_cmd->add_option("--trace", trace_file, "Trace file (`seq,delay_ms`, 0 = lost)")->required();
  trace_cmd->add_option("--interval-ms", interval, "Probe spacing used to order arrivals");
  add_format(trace_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      const scenario sc = load(scenario_file, seed);
      const auto r = simulate(sc);
      report_bundle b;
      b.manifest = scenario_manifest(sc, "simulate");
      b.manifest["scenario_file"] = scenario_file;
      b.add_table("records", records_table(r));
      b.summary = sim_summary(r);
      if (format == "csv") b.add_table("metrics", metrics_table(b.summary));
      const auto dir = out_dir(out_flag);
      b.write(dir);
      for (const auto& w : b.summary["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
      std::cout << "wrote " << dir.string() << "\n";
    } else if (*sweep) {
      const scenario sc = load(scenario_file, seed);
      const auto results = run_sweep(sc, param, parse_list(values_text), jobs);
      csv_table t({"value", "seed", "rail_loss", "rail_mean_ms", "rail_stddev_ms", "rail_out_of_order",
                   "rail_lost_in_burst", "rail_max_burst", "best_single_loss"});
      nlohmann::json points = nlohmann::json::array();
      for (const auto& [value, r] : results) {
        const auto s = sim_summary(r);
        double best = 1.0;
        for (const auto& p : s["paths"]) best = std::min(best, p["loss_rate"].get<double>());
        const auto& rail = s["rail"];
        t.add(value, r.seed, rail["loss_rate"].get<double>(), rail["delay_mean_ms"].get<double>(),
              rail["delay_stddev_ms"].get<double>(),
              rail["reordering"]["out_of_order"].get<std::size_t>(),
              rail["bursts"]["lost_in_burst"].get<std::size_t>(),
              rail["bursts"]["max_burst"].get<std::size_t>(), best);
        points.push_back({{"value", value}, {"summary", s}});
      }
      report_bundle b;
      b.manifest = scenario_manifest(sc, "sweep");
      b.manifest["parameter"] = param;
      b.manifest["values"] = values_text;
      b.add_table("sweep", t);
      b.summary = {{"parameter", param}, {"points", points}};
      const auto dir = out_dir(out_flag);
      b.write(dir);
      std::cout << "wrote " << dir.string() << "\n";
    } else if (*mos_cmd) {
      if (grid) {
        const auto t = suite::mos_grid(max_loss, loss_step, max_delay, delay_step);
        if (!out_flag.empty()) {
          report_bundle b;
          b.manifest = {{"command", "mos --grid"}};
          b.add_table("mos_contour", t);
          b.summary = {{"max_loss", max_loss}, {"loss_step", loss_step},
                       {"max_delay_ms", max_delay}, {"delay_step_ms", delay_step}};
          b.write(out_flag);
          std::cout << "wrote " << out_flag << "\n";
        } else {
          std::cout << t.str();
        }
      } else {
        const auto q = mos(loss, delay);
        csv_table t({"loss", "one_way_ms", "r_factor", "mos"});
        t.add(loss, delay, q.r_factor, q.mos);
        emit(format, t, {{"loss", loss}, {"one_way_ms", delay}, {"r_factor", q.r_factor}, {"mos", q.mos}});
      }
    } else if (*curve_cmd) {
      const scenario sc = load(scenario_file, seed);
      const auto r = simulate(sc);
      const auto deadlines = deadline_range(from, to, step);
      csv_table t({"stream", "deadline_ms", "one_way_ms", "effective_loss", "mean_delay_ms",
                   "r_factor", "mos"});
      nlohmann::json optimum;
      const auto rail_curve = mos_curve(rail_network_delays(r), deadlines, end_system);
      print_mos_points("rail", rail_curve, t);
      optimum["rail"] = optimal_playout(rail_curve);
      for (std::size_t p = 0; p < r.path_ids.size(); ++p) {
        const auto c = mos_curve(path_delays(r, p), deadlines, end_system);
        print_mos_points(r.path_ids[p], c, t);
        optimum[r.path_ids[p]] = optimal_playout(c);
      }
      report_bundle b;
      b.manifest = scenario_manifest(sc, "mos-curve");
      b.manifest["end_system_ms"] = end_system;
      b.add_table("mos_curve", t);
      b.summary = {{"optimal_deadline_ms", optimum}};
      const auto dir = out_dir(out_flag);
      b.write(dir);
      std::cout << "wrote " << dir.string() << "\n";
    } else if (*tcp_cmd) {
      const tcp_path_set set(parse_tcp_paths(tcp_text));
      const auto pred = tcp_throughput_rail(set);
      csv_table t({"path", "loss", "rtt_ms", "throughput"});
      nlohmann::json j;
      nlohmann::json singles = nlohmann::json::array();
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double tp = tcp_throughput_single(set[i].loss_rate, set[i].rtt_ms);
        t.add(std::to_string(i + 1), set[i].loss_rate, set[i].rtt_ms, tp);
        singles.push_back({{"loss", set[i].loss_rate}, {"rtt_ms", set[i].rtt_ms}, {"throughput", tp}});
      }
      double all_lost = 1.0;
      for (const auto& p : set.paths()) all_lost *= p.loss_rate;
      t.add(std::string("rail"), all_lost, pred.expected_rtt_ms, pred.throughput);
      j["paths"] = singles;
      j["rail"] = {{"loss", all_lost}, {"expected_rtt_ms", pred.expected_rtt_ms},
                   {"throughput", pred.throughput}};
      if (set.size() == 2) {
        const auto f = tcp_two_path_gain(set);
        j["ratio_fast"] = f.ratio_fast;
        j["ratio_slow"] = f.ratio_slow;
      }
      emit(format, t, j);
    } else if (*suite_cmd) {
      const auto run = run_paper_suite();
      const auto dir = out_dir(out_flag);
      run.bundle.write(dir);
      for (const auto& r : run.results)
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << ": " << r.detail << "\n";
      std::cout << "wrote " << dir.string() << "\n";
      if (!run.all_passed()) {
        std::cerr << "failing properties:";
        for (const auto& r : run.results)
          if (!r.passed) std::cerr << " [" << r.name << "]";
        std::cerr << "\n";
        return 2;
      }
    } else if (*trace_cmd) {
      std::ifstream in(trace_file);
      if (!in) throw config_error("trace not found: " + trace_file);
      const auto trace = load_trace(in);
      std::vector<std::optional<double>> delays;
      std::vector<std::pair<double, seq_t>> arrivals;
      for (const auto& e : trace.entries()) {
        delays.push_back(e.delay_ms);
        if (e.delay_ms) arrivals.emplace_back(static_cast<double>(e.seq) * interval + *e.delay_ms, e.seq);
      }
      std::sort(arrivals.begin(), arrivals.end());
      std::vector<seq_t> order;
      for (const auto& a : arrivals) order.push_back(a.second);
      auto s = stream_summary(delays, order);
      s["trace"] = trace_file;
      csv_table t({"metric", "value"});
      for (const char* k : {"packets", "delivered", "loss_rate", "delay_mean_ms", "delay_stddev_ms",
                            "delay_p50_ms", "delay_p95_ms", "delay_p99_ms"})
        if (s.contains(k)) t.add(std::string(k), s[k].get<double>());
      for (const auto& [k, v] : s["bursts"].items()) t.add("burst_" + k, v.get<double>());
      t.add(std::string("out_of_order"), s["reordering"]["out_of_order"].get<double>());
      emit(format, t, s);
    }
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
