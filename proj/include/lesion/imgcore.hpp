#pragma once

#include <cstdint>
#include <vector>

#include "lesion/image.hpp"

namespace lesion::img {

struct PipelineConfig {
  int canvas_rows = 256;
  int canvas_cols = 256;
  double gaussian_sigma = 1.35;
  double brightness_factor = 1.2;
  double contrast_factor = 1.2;
  double sharpness_factor = 1.3;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Enhancement. Each op is exactly the identity at factor 1.
RasterImage adjust_brightness(const RasterImage& img, double factor);
RasterImage adjust_contrast(const RasterImage& img, double factor);
RasterImage adjust_sharpness(const RasterImage& img, double factor);

/// Brightness, then sharpness, then contrast.
RasterImage enhance(const RasterImage& img, const PipelineConfig& cfg);

/// Luminance, 0.2125 R + 0.7154 G + 0.0721 B.
RasterImage rgb_to_gray(const RasterImage& img);

/// Mean of the luminance (gray input: mean value).
double mean_luminance(const RasterImage& img);

/// Separable Gaussian with radius ceil(4 sigma) and edge replication.
RasterImage gaussian_filter(const RasterImage& img, double sigma);
int gaussian_radius(double sigma);
std::vector<float> gaussian_kernel(double sigma);

/// Copies img into the center of a zero canvas of rows x cols, offsets
/// floor((rows - h) / 2) and floor((cols - w) / 2). No interpolation.
RasterImage pad_center_resize(const RasterImage& img, int rows, int cols);

/// Bilinear shrink so that max(height, width) <= max_dim; aspect preserved.
RasterImage downscale_fit(const RasterImage& img, int max_dim);

}  // namespace lesion::img
