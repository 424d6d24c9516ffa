#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lesion/image.hpp"

namespace lesion::ive {

struct IveParams {
  double constant = 255.0;
  double threshold = 127.0;

  void validate() const;
};

/// out = c * in, no clamping.
RasterImage scale_by_constant(const RasterImage& img, double c);

/// Min-max stretch of the whole image onto [0, 255].
RasterImage normalize_0_255(const RasterImage& img);

/// Keeps pixels strictly above t at their original intensity, zeroes the rest.
RasterImage threshold_high_intensity(const RasterImage& img, double t);

/// Intensity value estimation: scale, normalize, keep the high-intensity pixels.
/// `sla` is the segmented lesion in unit range (8-bit intensity / 255).
RasterImage ive_transform(const RasterImage& sla, const IveParams& params);

struct CannyParams {
  double sigma = 1.0;
  double low = 0.1;   // fraction of the maximum gradient magnitude
  double high = 0.2;

  void validate() const;
};

/// Canny edge map with values in {0, 255}. The unit-range `sla` is scaled by
/// 255 and quantized to 8 bits before smoothing.
RasterImage canny_edges(const RasterImage& sla, const CannyParams& params);

struct HistogramEntry {
  std::string label;
  std::array<std::uint64_t, 256> bins{};
  std::uint64_t pixel_count = 0;
};

struct HistogramReport {
  std::vector<HistogramEntry> entries;
};

/// Per-image 256-bin histograms for side-by-side stage comparison.
HistogramReport compare_histograms(const std::vector<std::pair<std::string, RasterImage>>& images);

/// Number of distinct nonzero values.
std::size_t distinct_nonzero_levels(const RasterImage& img);

}  // namespace lesion::ive
