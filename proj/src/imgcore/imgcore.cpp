#include "lesion/imgcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lesion/error.hpp"

namespace lesion::img {

namespace {

constexpr double kWeightR = 0.2125;
constexpr double kWeightG = 0.7154;
constexpr double kWeightB = 0.0721;

float clamp255(double v) { return static_cast<float>(std::clamp(v, 0.0, 255.0)); }

void require_factor(double factor, const char* what) {
  if (!(factor >= 0.0) || !std::isfinite(factor))
    fail(ErrorKind::InvalidArgument, std::string(what) + " factor must be finite and >= 0");
}

void require_gray(const RasterImage& img, const char* op) {
  if (img.channels() != 1)
    fail(ErrorKind::ChannelError, std::string(op) + " expects a 1-channel image");
}

// out = base + factor * (in - base), written as a lerp so that factor 0 and
// factor 1 reproduce base and in bit-exactly.
RasterImage blend(const RasterImage& base, const RasterImage& in, double factor) {
  RasterImage out = in;
  auto dst = out.data();
  auto b = base.data();
  auto src = in.data();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = clamp255(std::lerp(static_cast<double>(b[i]), static_cast<double>(src[i]), factor));
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (canvas_rows <= 0 || canvas_cols <= 0)
    fail(ErrorKind::ConfigError, "canvas dimensions must be positive");
  if (!(gaussian_sigma > 0.0)) fail(ErrorKind::ConfigError, "gaussian_sigma must be > 0");
  if (!(brightness_factor >= 0.0) || !(contrast_factor >= 0.0) || !(sharpness_factor >= 0.0))
    fail(ErrorKind::ConfigError, "enhancement factors must be >= 0");
}

RasterImage adjust_brightness(const RasterImage& img, double factor) {
  require_factor(factor, "brightness");
  RasterImage out = img;
  for (float& v : out.data()) v = clamp255(factor * static_cast<double>(v));
  return out;
}

double mean_luminance(const RasterImage& img) {
  if (img.empty()) return 0.0;
  const auto d = img.data();
  double sum = 0.0;
  if (img.channels() == 3) {
    for (std::size_t i = 0; i < d.size(); i += 3)
      sum += kWeightR * d[i] + kWeightG * d[i + 1] + kWeightB * d[i + 2];
  } else {
    for (float v : d) sum += v;
  }
  return sum / static_cast<double>(img.pixel_count());
}

RasterImage adjust_contrast(const RasterImage& img, double factor) {
  require_factor(factor, "contrast");
  const float mean = static_cast<float>(mean_luminance(img));
  RasterImage base(img.width(), img.height(), img.channels(), mean);
  return blend(base, img, factor);
}

RasterImage adjust_sharpness(const RasterImage& img, double factor) {
  require_factor(factor, "sharpness");
  // 3x3 smoothing, center weight 5, neighbours 1, normalized by 13. Border
  // pixels keep their original value.
  RasterImage smooth = img;
  const int w = img.width(), h = img.height(), ch = img.channels();
  for (int r = 1; r + 1 < h; ++r) {
    for (int c = 1; c + 1 < w; ++c) {
      for (int k = 0; k < ch; ++k) {
        double acc = 4.0 * img.at(r, c, k);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) acc += img.at(r + dr, c + dc, k);
        smooth.at(r, c, k) = static_cast<float>(acc / 13.0);
      }
    }
  }
  return blend(smooth, img, factor);
}

RasterImage enhance(const RasterImage& img, const PipelineConfig& cfg) {
  return adjust_contrast(
      adjust_sharpness(adjust_brightness(img, cfg.brightness_factor), cfg.sharpness_factor),
      cfg.contrast_factor);
}

RasterImage rgb_to_gray(const RasterImage& img) {
  if (img.channels() != 3)
    fail(ErrorKind::ChannelError, "rgb_to_gray expects 3 channels, got " +
                                      std::to_string(img.channels()));
  RasterImage out(img.width(), img.height(), 1);
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = static_cast<float>(kWeightR * r + kWeightG * g + kWeightB * b);
  }
  return out;
}

int gaussian_radius(double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::InvalidArgument, "sigma must be > 0");
  return static_cast<int>(std::ceil(4.0 * sigma));
}

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = gaussian_radius(sigma);
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  std::vector<float> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = static_cast<float>(k[i] / sum);
  return out;
}

RasterImage gaussian_filter(const RasterImage& img, double sigma) {
  require_gray(img, "gaussian_filter");
  const std::vector<float> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width(), h = img.height();
  if (img.empty()) return img;

  RasterImage tmp(w, h, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int cc = std::clamp(c + i, 0, w - 1);
        acc += static_cast<double>(kernel[static_cast<std::size_t>(i + radius)]) * img.at(r, cc);
      }
      tmp.at(r, c) = static_cast<float>(acc);
    }
  }
  RasterImage out(w, h, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int rr = std::clamp(r + i, 0, h - 1);
        acc += static_cast<double>(kernel[static_cast<std::size_t>(i + radius)]) * tmp.at(rr, c);
      }
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

RasterImage pad_center_resize(const RasterImage& img, int rows, int cols) {
  require_gray(img, "pad_center_resize");
  if (rows <= 0 || cols <= 0) fail(ErrorKind::SizeError, "canvas must be positive");
  if (img.height() > rows || img.width() > cols)
    fail(ErrorKind::SizeError, "image " + std::to_string(img.height()) + "x" +
                                   std::to_string(img.width()) + " exceeds canvas " +
                                   std::to_string(rows) + "x" + std::to_string(cols));
  RasterImage out(cols, rows, 1);
  const int row_offset = (rows - img.height()) / 2;
  const int col_offset = (cols - img.width()) / 2;
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) out.at(row_offset + r, col_offset + c) = img.at(r, c);
  return out;
}

RasterImage downscale_fit(const RasterImage& img, int max_dim) {
  if (max_dim <= 0) fail(ErrorKind::InvalidArgument, "max_dim must be > 0");
  const int longest = std::max(img.height(), img.width());
  if (longest <= max_dim) return img;

  const double scale = static_cast<double>(max_dim) / longest;
  const int out_h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  const int out_w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const double sy = static_cast<double>(img.height()) / out_h;
  const double sx = static_cast<double>(img.width()) / out_w;
  const int ch = img.channels();

  RasterImage out(out_w, out_h, ch);
  for (int r = 0; r < out_h; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(y);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = y - y0;
    for (int c = 0; c < out_w; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(x);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = x - x0;
      for (int k = 0; k < ch; ++k) {
        const double top = img.at(y0, x0, k) * (1.0 - fx) + img.at(y0, x1, k) * fx;
        const double bottom = img.at(y1, x0, k) * (1.0 - fx) + img.at(y1, x1, k) * fx;
        out.at(r, c, k) = static_cast<float>(top * (1.0 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

}  // namespace lesion::img
