#pragma once

#include <cstdint>
#include <vector>

#include "lesion/image.hpp"

namespace lesion::aug {

struct AugmentParams {
  int multiplier = 10;
  double rotation_max = 30.0;  // degrees
  double zoom_min = 0.8;
  double zoom_max = 1.2;
  double brightness_jitter = 0.2;
  double contrast_jitter = 0.2;
  bool horizontal_flip = true;
  bool vertical_flip = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// One sampled composition of the augmentation operators.
struct AugmentDraw {
  double angle = 0.0;  // degrees
  double zoom = 1.0;
  bool flip_h = false;
  bool flip_v = false;
  double brightness = 1.0;
  double contrast = 1.0;
};

/// Draw number `copy` for image stream `stream_id`; depends only on
/// (params.rng_seed, stream_id, copy).
AugmentDraw draw(const AugmentParams& params, std::uint64_t stream_id, int copy);

/// Rotation about the center, zoom about the center (cropping or zero
/// padding back to the same canvas), flips, then brightness/contrast.
RasterImage apply(const RasterImage& img, const AugmentDraw& d);

/// `multiplier` augmented copies, each the same size as `img`.
std::vector<RasterImage> augment_sample(const RasterImage& img, const AugmentParams& params,
                                        std::uint64_t stream_id);

/// Inverse-mapped rotation (degrees) and zoom about the canvas center;
/// bilinear sampling with zero fill. Output keeps the input size.
RasterImage rotate_zoom(const RasterImage& img, double angle_deg, double zoom);

RasterImage flip_horizontal(const RasterImage& img);
RasterImage flip_vertical(const RasterImage& img);

}  // namespace lesion::aug
