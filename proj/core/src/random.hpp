#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace driverid::detail {

// Fisher-Yates driven by raw mt19937_64 draws. std::shuffle and the std
// distributions are implementation-defined, so results would otherwise
// differ between standard libraries for the same seed.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace driverid::detail
