#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace rail {

// Simulation time. Integer nanoseconds so that event ordering never
// depends on floating point accumulation; milliseconds at the edges.
class nanos {
public:
  constexpr nanos() = default;
  constexpr explicit nanos(std::int64_t ns) : ns_(ns) {}

  static nanos from_ms(double ms) { return nanos(std::llround(ms * 1e6)); }

  constexpr std::int64_t count() const { return ns_; }
  constexpr double ms() const { return static_cast<double>(ns_) / 1e6; }

  constexpr auto operator<=>(const nanos&) const = default;

  constexpr nanos& operator+=(nanos o) { ns_ += o.ns_; return *this; }
  constexpr nanos& operator-=(nanos o) { ns_ -= o.ns_; return *this; }
  friend constexpr nanos operator+(nanos a, nanos b) { return a += b; }
  friend constexpr nanos operator-(nanos a, nanos b) { return a -= b; }
  friend constexpr nanos operator*(nanos a, std::int64_t k) { return nanos(a.ns_ * k); }

private:
  std::int64_t ns_ = 0;
};

using seq_t = std::uint64_t;

}  // namespace rail
