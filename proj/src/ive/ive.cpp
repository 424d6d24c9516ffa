#include "lesion/ive.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "lesion/error.hpp"
#include "lesion/imgcore.hpp"
#include "lesion/segment.hpp"

namespace lesion::ive {

void IveParams::validate() const {
  if (!(constant > 0.0)) fail(ErrorKind::ConfigError, "IVE constant must be > 0");
  if (!(threshold >= 0.0 && threshold <= 255.0))
    fail(ErrorKind::ConfigError, "IVE threshold must be in [0, 255]");
}

void CannyParams::validate() const {
  if (!(sigma > 0.0)) fail(ErrorKind::ConfigError, "Canny sigma must be > 0");
  if (!(low >= 0.0 && low < high && high <= 1.0))
    fail(ErrorKind::ConfigError, "Canny thresholds need 0 <= low < high <= 1");
}

RasterImage scale_by_constant(const RasterImage& img, double c) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "constant must be > 0");
  RasterImage out = img;
  for (float& v : out.data()) v = static_cast<float>(c * static_cast<double>(v));
  return out;
}

RasterImage normalize_0_255(const RasterImage& img) {
  if (img.empty()) fail(ErrorKind::DegenerateImage, "cannot normalize an empty image");
  const auto [lo_it, hi_it] = std::minmax_element(img.data().begin(), img.data().end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) fail(ErrorKind::DegenerateImage, "normalization needs two distinct values");
  // For an image already spanning [0, 255] the scale is exactly 1.
  const double scale = 255.0 / (hi - lo);
  RasterImage out = img;
  for (float& v : out.data()) v = static_cast<float>((static_cast<double>(v) - lo) * scale);
  return out;
}

RasterImage threshold_high_intensity(const RasterImage& img, double t) {
  if (!(t >= 0.0 && t <= 255.0)) fail(ErrorKind::InvalidArgument, "threshold must be in [0, 255]");
  RasterImage out = img;
  for (float& v : out.data())
    if (!(static_cast<double>(v) > t)) v = 0.0f;
  return out;
}

RasterImage ive_transform(const RasterImage& sla, const IveParams& params) {
  params.validate();
  return threshold_high_intensity(normalize_0_255(scale_by_constant(sla, params.constant)),
                                  params.threshold);
}

namespace {

RasterImage quantize_u8(const RasterImage& img) {
  RasterImage out = img;
  for (float& v : out.data())
    v = static_cast<float>(std::lround(std::clamp(255.0 * static_cast<double>(v), 0.0, 255.0)));
  return out;
}

}  // namespace

RasterImage canny_edges(const RasterImage& sla, const CannyParams& params) {
  params.validate();
  if (sla.channels() != 1) fail(ErrorKind::ChannelError, "canny_edges expects a 1-channel image");
  const int w = sla.width(), h = sla.height();
  RasterImage edges(w, h, 1);
  if (w < 3 || h < 3) return edges;

  const RasterImage smooth = img::gaussian_filter(quantize_u8(sla), params.sigma);

  auto px = [&](int r, int c) {
    return static_cast<double>(smooth.at(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1)));
  };
  const std::size_t n = sla.pixel_count();
  std::vector<double> mag(n), gxs(n), gys(n);
  double max_mag = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double gx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
      const double gy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)) -
                        (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(c);
      gxs[i] = gx;
      gys[i] = gy;
      mag[i] = std::hypot(gx, gy);
      max_mag = std::max(max_mag, mag[i]);
    }
  }
  if (max_mag <= 0.0) return edges;

  auto at = [&](int r, int c) {
    return mag[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
               static_cast<std::size_t>(c)];
  };

  // Non-maximum suppression along the gradient, quantized to 4 directions.
  // The one-pixel frame is never an edge.
  std::vector<double> thin(n, 0.0);
  for (int r = 1; r + 1 < h; ++r) {
    for (int c = 1; c + 1 < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(c);
      const double m = mag[i];
      if (m <= 0.0) continue;
      double angle = std::atan2(gys[i], gxs[i]) * 180.0 / M_PI;
      if (angle < 0.0) angle += 180.0;
      int dr = 0, dc = 1;
      if (angle >= 22.5 && angle < 67.5) {
        dr = 1, dc = 1;
      } else if (angle >= 67.5 && angle < 112.5) {
        dr = 1, dc = 0;
      } else if (angle >= 112.5 && angle < 157.5) {
        dr = 1, dc = -1;
      }
      if (m > at(r - dr, c - dc) && m >= at(r + dr, c + dc)) thin[i] = m;
    }
  }

  // Double threshold plus hysteresis through 8-connected weak pixels.
  const double high = params.high * max_mag;
  const double low = params.low * max_mag;
  std::vector<std::size_t> stack;
  std::vector<std::uint8_t> visited(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (thin[i] >= high && thin[i] > 0.0) {
      visited[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    edges.data()[p] = 255.0f;
    const int pr = static_cast<int>(p / static_cast<std::size_t>(w));
    const int pc = static_cast<int>(p % static_cast<std::size_t>(w));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int rr = pr + dy, cc = pc + dx;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const std::size_t q = static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(cc);
        if (visited[q] || !(thin[q] >= low && thin[q] > 0.0)) continue;
        visited[q] = 1;
        stack.push_back(q);
      }
    }
  }
  return edges;
}

HistogramReport compare_histograms(
    const std::vector<std::pair<std::string, RasterImage>>& images) {
  if (images.empty()) fail(ErrorKind::InvalidArgument, "histogram comparison needs at least one image");
  HistogramReport report;
  for (const auto& [label, img] : images) {
    if (img.channels() != 1)
      fail(ErrorKind::ChannelError, "histogram input '" + label + "' is not single-channel");
    HistogramEntry entry;
    entry.label = label;
    entry.bins = seg::histogram256(img);
    entry.pixel_count = img.pixel_count();
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::size_t distinct_nonzero_levels(const RasterImage& img) {
  std::set<float> levels;
  for (float v : img.data())
    if (v != 0.0f) levels.insert(v);
  return levels.size();
}

}  // namespace lesion::ive
