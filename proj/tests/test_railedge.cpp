#include <gtest/gtest.h>

#include "rail/railedge.hpp"
#include "rail/rng.hpp"

using namespace rail;

TEST(Encode, WireLayoutIsBigEndian) {
  const std::vector<std::uint8_t> payload{0xAA, 0xBB, 0xCC};
  const auto wire = encode({0x0102030405060708ULL, 0x1112131415161718ULL}, payload);
  const std::vector<std::uint8_t> want{1, 2, 3, 4, 5, 6, 7, 8, 0x11, 0x12, 0x13, 0x14,
                                       0x15, 0x16, 0x17, 0x18, 0x00, 0x03, 0xAA, 0xBB, 0xCC};
  EXPECT_EQ(wire, want);
}

TEST(Encode, RoundTripProperty) {
  random_stream rng(derive_seed(1, 9, 0));
  for (int i = 0; i < 300; ++i) {
    const rail_header h{rng.next_u64(), rng.next_u64()};
    std::vector<std::uint8_t> payload(rng.next_u64() % 1500);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng.next_u64());
    const auto p = decode(encode(h, payload));
    EXPECT_EQ(p.header.sender_id, h.sender_id);
    EXPECT_EQ(p.header.seq, h.seq);
    EXPECT_EQ(p.payload, payload);
  }
}

TEST(Decode, RejectsTruncatedAndMismatchedLength) {
  const std::vector<std::uint8_t> payload(10, 7);
  auto wire = encode({1, 2}, payload);
  EXPECT_THROW(decode(std::span(wire).first(17)), parse_error);
  wire.pop_back();
  EXPECT_THROW(decode(wire), parse_error);
  wire.push_back(0);
  wire.push_back(0);
  EXPECT_THROW(decode(wire), parse_error);
}

TEST(Encode, RejectsOversizedPayload) {
  const std::vector<std::uint8_t> big(65536);
  EXPECT_THROW(encode({1, 1}, big), config_error);
  const std::vector<std::uint8_t> max(65535);
  EXPECT_EQ(encode({1, 1}, max).size(), header_wire_size + 65535);
}

TEST(Replicate, OneCopyPerPath) {
  const auto two = replicate(7, 3, {"A", "B"});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].first, "A");
  EXPECT_EQ(two[1].first, "B");
  for (const auto& c : two) {
    EXPECT_EQ(c.second.seq, 7u);
    EXPECT_EQ(c.second.sender_id, 3u);
  }
  EXPECT_EQ(replicate(7, 3, {"A"}).size(), 1u);
  EXPECT_THROW(replicate(7, 3, {}), config_error);
}

namespace {
std::string decide(dedup_state& d, std::initializer_list<seq_t> seqs) {
  std::string out;
  for (seq_t s : seqs) out += d.on_wan_arrival({1, s}) == dedup_decision::forward ? 'F' : 'S';
  return out;
}
}  // namespace

TEST(Dedup, SetSemantics) {
  dedup_state a;
  EXPECT_EQ(decide(a, {1, 1}), "FS");
  dedup_state b;
  EXPECT_EQ(decide(b, {3, 5, 3, 4, 5}), "FFSFS");
  dedup_state c;
  EXPECT_EQ(decide(c, {1}), "F");
  EXPECT_EQ(b.highest_forwarded(), 5u);
}

TEST(Dedup, SendersAreIndependent) {
  dedup_state d;
  EXPECT_EQ(d.on_wan_arrival({1, 9}), dedup_decision::forward);
  EXPECT_EQ(d.on_wan_arrival({2, 9}), dedup_decision::forward);
  EXPECT_EQ(d.on_wan_arrival({2, 9}), dedup_decision::suppress);
}

TEST(Dedup, WindowEvictsOldestFirst) {
  dedup_state d(2);
  EXPECT_EQ(decide(d, {1, 2, 3}), "FFF");
  EXPECT_EQ(d.remembered(), 2u);
  EXPECT_EQ(d.evictions(), 1u);
  EXPECT_EQ(decide(d, {3, 1}), "SF");
  EXPECT_THROW(dedup_state(0), config_error);
}

TEST(Padding, Cases) {
  const padding_config on{true, 150.0};
  EXPECT_DOUBLE_EQ(padding_release(1120.0, 120.0, on), 1150.0);
  EXPECT_DOUBLE_EQ(padding_release(1180.0, 180.0, on), 1180.0);
  EXPECT_DOUBLE_EQ(padding_release(1150.0, 150.0, on), 1150.0);
  EXPECT_DOUBLE_EQ(padding_release(777.0, 1.0, padding_config{false, 150.0}), 777.0);
  EXPECT_THROW(padding_release(-1.0, 1.0, on), config_error);
  EXPECT_EQ(padding_release(nanos::from_ms(1120), nanos::from_ms(120), nanos::from_ms(150), true),
            nanos::from_ms(1150));
}

TEST(Padding, ReleaseNeverEarlierAndHitsTarget) {
  random_stream rng(5);
  const padding_config on{true, 80.0};
  for (int i = 0; i < 1000; ++i) {
    const double d = 200.0 * rng.uniform();
    const double arrival = 1000.0 + d;
    const double release = padding_release(arrival, d, on);
    EXPECT_GE(release, arrival);
    EXPECT_NEAR(release - 1000.0, std::max(d, 80.0), 1e-9);
  }
}

TEST(ReorderBuffer, HoldsUntilGapFills) {
  reorder_buffer r;
  auto a = r.on_ready(0);
  EXPECT_EQ(a.released, (std::vector<seq_t>{0}));
  auto b = r.on_ready(2);
  EXPECT_TRUE(b.released.empty());
  EXPECT_TRUE(b.held);
  auto c = r.on_ready(1);
  EXPECT_EQ(c.released, (std::vector<seq_t>{1, 2}));
  EXPECT_EQ(r.next_expected(), 3u);
  EXPECT_EQ(r.held(), 0u);
}

TEST(ReorderBuffer, TimeoutDeclaresGapsLost) {
  reorder_buffer r;
  r.on_ready(3);
  r.on_ready(5);
  EXPECT_EQ(r.on_timeout(3), (std::vector<seq_t>{3}));
  EXPECT_EQ(r.declared_lost(), 3u);
  EXPECT_EQ(r.next_expected(), 4u);
  EXPECT_EQ(r.on_ready(4).released, (std::vector<seq_t>{4, 5}));
  // A straggler below next_expected goes out at once.
  EXPECT_EQ(r.on_ready(1).released, (std::vector<seq_t>{1}));
  EXPECT_TRUE(r.on_timeout(5).empty());
}
