#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rail/scenario_io.hpp"

using namespace rail;

namespace {

const char* sample = R"(# two paths
label = demo
seed = 12

[traffic]
interval_ms = 10
count = 50

[padding]
enabled = yes
target_ms = 120

[shared.0]
id = last-mile
loss_rate = 0.01

[paths.0]
id = a
delay = paretonormal
delay_mean_ms = 40
delay_stddev_ms = 8
pareto_weight = 0.3
loss_rate = 0.02
shared = last-mile

[paths.1]
id = b
delay = constant
delay_mean_ms = 70
)";

std::string error_of(std::string_view text) {
  try {
    parse_scenario(text, {}, "s.ini");
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseScenario, Sample) {
  const auto sc = parse_scenario(sample);
  EXPECT_EQ(sc.label, "demo");
  EXPECT_EQ(sc.seed, 12u);
  EXPECT_EQ(sc.traffic.interval_ms, 10.0);
  EXPECT_EQ(sc.traffic.count, 50u);
  EXPECT_TRUE(sc.padding.enabled);
  EXPECT_EQ(sc.padding.target_one_way_ms, 120.0);
  ASSERT_EQ(sc.shared_segments.size(), 1u);
  ASSERT_EQ(sc.paths.size(), 2u);
  EXPECT_EQ(sc.paths[0].delay.kind, delay_kind::paretonormal);
  EXPECT_EQ(sc.paths[0].delay.shape.pareto_weight, 0.3);
  EXPECT_EQ(sc.paths[0].shared, "last-mile");
  EXPECT_EQ(sc.paths[1].delay.mean_ms, 70.0);
}

TEST(ParseScenario, SerializeRoundTrip) {
  const auto sc = parse_scenario(sample);
  const auto text = serialize_scenario(sc);
  const auto back = parse_scenario(text);
  EXPECT_EQ(serialize_scenario(back), text);
  EXPECT_EQ(scenario_hash(back), scenario_hash(sc));
  auto other = sc;
  other.seed = 13;
  EXPECT_NE(scenario_hash(other), scenario_hash(sc));
}

TEST(ParseScenario, SyntaxErrorsHaveLineNumbers) {
  EXPECT_NE(error_of("seed = 1\n[paths.0]\nid = a\nwat\n").find("at line 4"), std::string::npos);
  EXPECT_NE(error_of("[bogus]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[paths.0]\ncolour = 3\n").find("at line 2"), std::string::npos);
  EXPECT_NE(error_of("[paths.0]\nloss_rate = lots\n").find("expects a number"), std::string::npos);
  EXPECT_NE(error_of("[paths.0]\ndelay = uniform\n").find("unknown delay kind"),
            std::string::npos);
  EXPECT_NE(error_of("[paths.0]\nid=a\n[paths.0]\n").find("duplicate section"), std::string::npos);
  EXPECT_NE(error_of("[paths.0]\nid=a\n[paths.2]\nid=b\n").find("without gaps"),
            std::string::npos);
}

TEST(ParseScenario, ValidationReportsEveryViolationWithLine) {
  const auto msg = error_of("[paths.0]\nid = a\nloss_rate = 2\n\n[paths.1]\nid = a\ndelay_mean_ms = -4\n");
  EXPECT_NE(msg.find("s.ini:1: paths.0: loss rate"), std::string::npos);
  EXPECT_NE(msg.find("s.ini:5: paths.1: duplicate id"), std::string::npos);
  EXPECT_NE(msg.find("s.ini:5: paths.1: delay mean"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\n").find("at least one path"), std::string::npos);
}

TEST(ParseScenario, TraceResolvesAgainstBaseDir) {
  const auto dir = std::filesystem::temp_directory_path() / "rail_scenario_io_test";
  std::filesystem::create_directories(dir / "traces");
  std::ofstream(dir / "traces" / "t.csv") << "0,10\n1,0\n2,12\n";
  std::ofstream(dir / "s.ini") << "[paths.0]\nid = t\ndelay = trace\ntrace = traces/t.csv\n";
  const auto sc = load_scenario_file(dir / "s.ini");
  ASSERT_TRUE(sc.paths[0].delay.trace);
  EXPECT_EQ(sc.paths[0].delay.trace->size(), 3u);
  EXPECT_EQ(sc.paths[0].delay.trace_path, "traces/t.csv");

  std::ofstream(dir / "bad.ini") << "[paths.0]\nid = t\ndelay = trace\ntrace = missing.csv\n";
  EXPECT_THROW(load_scenario_file(dir / "bad.ini"), parse_error);
  std::filesystem::remove_all(dir);
}

TEST(LoadScenarioFile, Missing) {
  try {
    load_scenario_file("/definitely/not/here.ini");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("scenario not found"), std::string::npos);
  }
}
