#include "lesion/augment.hpp"

#include <cmath>

#include "lesion/error.hpp"
#include "lesion/imgcore.hpp"
#include "lesion/random.hpp"

namespace lesion::aug {

void AugmentParams::validate() const {
  if (multiplier < 0) fail(ErrorKind::ConfigError, "augmentation multiplier must be >= 0");
  if (!(rotation_max >= 0.0)) fail(ErrorKind::ConfigError, "rotation_max must be >= 0");
  if (!(zoom_min > 0.0 && zoom_min <= zoom_max))
    fail(ErrorKind::ConfigError, "zoom range needs 0 < min <= max");
  if (!(brightness_jitter >= 0.0 && brightness_jitter < 1.0) ||
      !(contrast_jitter >= 0.0 && contrast_jitter < 1.0))
    fail(ErrorKind::ConfigError, "jitters must lie in [0, 1)");
}

AugmentDraw draw(const AugmentParams& params, std::uint64_t stream_id, int copy) {
  Rng rng = derive_stream(params.rng_seed, "augment",
                          (stream_id << 20) ^ static_cast<std::uint64_t>(copy));
  // Every field consumes its draw whether or not the operator is enabled, so
  // toggling one operator leaves the others' values unchanged.
  AugmentDraw d;
  const double u_angle = rng.uniform(-1.0, 1.0);
  const double u_zoom = rng.uniform();
  const bool coin_h = rng.coin();
  const bool coin_v = rng.coin();
  const double u_bright = rng.uniform(-1.0, 1.0);
  const double u_contrast = rng.uniform(-1.0, 1.0);
  d.angle = params.rotation_max > 0.0 ? u_angle * params.rotation_max : 0.0;
  d.zoom = params.zoom_max > params.zoom_min
               ? params.zoom_min + (params.zoom_max - params.zoom_min) * u_zoom
               : params.zoom_min;
  d.flip_h = params.horizontal_flip && coin_h;
  d.flip_v = params.vertical_flip && coin_v;
  d.brightness = 1.0 + u_bright * params.brightness_jitter;
  d.contrast = 1.0 + u_contrast * params.contrast_jitter;
  return d;
}

RasterImage flip_horizontal(const RasterImage& img) {
  RasterImage out = img;
  const int w = img.width();
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < w; ++c)
      for (int k = 0; k < img.channels(); ++k) out.at(r, c, k) = img.at(r, w - 1 - c, k);
  return out;
}

RasterImage flip_vertical(const RasterImage& img) {
  RasterImage out = img;
  const int h = img.height();
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < img.width(); ++c)
      for (int k = 0; k < img.channels(); ++k) out.at(r, c, k) = img.at(h - 1 - r, c, k);
  return out;
}

RasterImage rotate_zoom(const RasterImage& img, double angle_deg, double zoom) {
  const int w = img.width(), h = img.height(), ch = img.channels();
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  const double theta = angle_deg * M_PI / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  RasterImage out(w, h, ch);

  auto sample = [&](int r, int c, int k) -> double {
    if (r < 0 || r >= h || c < 0 || c >= w) return 0.0;
    return img.at(r, c, k);
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double dy = (r - cy) / zoom, dx = (c - cx) / zoom;
      const double sy = cos_t * dy - sin_t * dx + cy;
      const double sx = sin_t * dy + cos_t * dx + cx;
      const double fy0 = std::floor(sy), fx0 = std::floor(sx);
      const int y0 = static_cast<int>(fy0), x0 = static_cast<int>(fx0);
      const double fy = sy - fy0, fx = sx - fx0;
      for (int k = 0; k < ch; ++k) {
        double v = sample(y0, x0, k) * (1.0 - fx) * (1.0 - fy);
        if (fx != 0.0) v += sample(y0, x0 + 1, k) * fx * (1.0 - fy);
        if (fy != 0.0) v += sample(y0 + 1, x0, k) * (1.0 - fx) * fy;
        if (fx != 0.0 && fy != 0.0) v += sample(y0 + 1, x0 + 1, k) * fx * fy;
        out.at(r, c, k) = static_cast<float>(v);
      }
    }
  }
  return out;
}

RasterImage apply(const RasterImage& img, const AugmentDraw& d) {
  RasterImage out = (d.angle != 0.0 || d.zoom != 1.0) ? rotate_zoom(img, d.angle, d.zoom) : img;
  if (d.flip_h) out = flip_horizontal(out);
  if (d.flip_v) out = flip_vertical(out);
  out = img::adjust_brightness(out, d.brightness);
  return img::adjust_contrast(out, d.contrast);
}

std::vector<RasterImage> augment_sample(const RasterImage& img, const AugmentParams& params,
                                        std::uint64_t stream_id) {
  params.validate();
  std::vector<RasterImage> out;
  out.reserve(static_cast<std::size_t>(params.multiplier));
  for (int i = 0; i < params.multiplier; ++i) out.push_back(apply(img, draw(params, stream_id, i)));
  return out;
}

}  // namespace lesion::aug
