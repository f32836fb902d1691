#pragma once

#include <array>
#include <cstdint>

namespace snnens {

inline constexpr int kImageSide = 28;
inline constexpr int kImagePixels = kImageSide * kImageSide;

struct LabeledImage {
  std::array<std::uint8_t, kImagePixels> pixels{};
  int label = 0;

  bool operator==(const LabeledImage&) const = default;
};

}  // namespace snnens
