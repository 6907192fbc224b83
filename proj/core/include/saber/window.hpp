#pragma once

#include "saber/date.hpp"

namespace saber {

/// One rolling-window cell: training look-back [train_start, trade_start)
/// and trading span [trade_start, trade_end], both calendar dates.
struct Window {
  Date train_start;
  Date trade_start;
  Date trade_end;

  friend bool operator==(const Window&, const Window&) = default;
};

}  // namespace saber
