#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace epidisc {

/// Population proportions, one entry per compartment.
using StateVector = std::vector<double>;

/// Index into the action set. 0 is "no lockdown", 1 is "lockdown".
struct ActionId {
  std::uint8_t value = 0;

  constexpr ActionId() = default;
  constexpr explicit ActionId(std::uint8_t v) : value(v) {}

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(ActionId, ActionId) = default;
};

inline constexpr ActionId kNoLockdown{0};
inline constexpr ActionId kLockdown{1};

using ActionSequence = std::vector<ActionId>;

/// Flat row-major index of a grid region.
struct RegionId {
  std::uint64_t flat = 0;

  constexpr RegionId() = default;
  constexpr explicit RegionId(std::uint64_t f) : flat(f) {}

  friend constexpr auto operator<=>(RegionId, RegionId) = default;
};

}  // namespace epidisc
