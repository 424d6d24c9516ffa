#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lesion/image.hpp"

namespace lesion::seg {

/// Row-major {0, 1} foreground map.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::uint8_t fill = 0);
  BinaryMask(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  std::uint8_t operator()(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(col)];
  }
  void set(int row, int col, bool on) {
    data_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
          static_cast<std::size_t>(col)] = on ? 1 : 0;
  }
  std::span<const std::uint8_t> data() const { return data_; }
  std::size_t count() const;

  RasterImage to_image(float on_value = 255.0f) const;
  /// Pixels > 0 become foreground.
  static BinaryMask from_image(const RasterImage& img);

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

using Histogram = std::array<std::uint64_t, 256>;

/// 256-bin histogram; values are rounded to the nearest bin and clamped.
Histogram histogram256(const RasterImage& img);

/// Threshold t maximizing the between-class variance of {<= t} vs {> t};
/// ties go to the smallest t. Comparisons are exact (integer arithmetic).
int otsu_threshold(const Histogram& hist);
int otsu_threshold(const RasterImage& img);

enum class Polarity { DarkForeground, BrightForeground };

/// DarkForeground: mask = img <= t. BrightForeground: mask = img > t.
BinaryMask binarize(const RasterImage& img, int threshold,
                    Polarity polarity = Polarity::DarkForeground);

/// Offsets (dy, dx) with dy^2 + dx^2 <= radius^2.
std::vector<std::array<int, 2>> disk(int radius);

// Out-of-image pixels count as foreground for erosion and background for
// dilation, so a mask filling the whole frame is not eaten from the edges.
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask binary_opening(const BinaryMask& mask, int radius);

/// Keeps only the largest 8-connected component (first in raster order on ties).
BinaryMask largest_component(const BinaryMask& mask);

/// Segmented lesion area: gfi * mask, per pixel.
RasterImage apply_mask(const RasterImage& gfi, const BinaryMask& mask);

struct SegmentOutput {
  BinaryMask mask;
  RasterImage lesion;
  int otsu_threshold = 0;
};

}  // namespace lesion::seg
