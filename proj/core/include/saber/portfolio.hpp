#pragma once

#include <string_view>

namespace saber {

/// Daily trade signal. SELL exits to cash; there are no short positions.
enum class Signal : int { Sell = -1, Hold = 0, Buy = 1 };

constexpr int to_int(Signal s) { return static_cast<int>(s); }
std::string_view to_string(Signal s);

enum class Position { Flat, Long };

std::string_view to_string(Position p);

/// Long-only cash account holding a single symbol.
struct Portfolio {
  double cash = 0.0;
  double shares = 0.0;  // whole shares unless the engine runs in fractional test mode
  Position position = Position::Flat;

  friend bool operator==(const Portfolio&, const Portfolio&) = default;
};

}  // namespace saber
