#include "lesion/segment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "lesion/error.hpp"

namespace lesion::seg {

namespace {

void require_gray(const RasterImage& img, const char* op) {
  if (img.channels() != 1)
    fail(ErrorKind::ChannelError, std::string(op) + " expects a 1-channel image");
}

}  // namespace

BinaryMask::BinaryMask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) fail(ErrorKind::SizeError, "negative mask extent");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) fail(ErrorKind::SizeError, "negative mask extent");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    fail(ErrorKind::SizeError, "mask buffer length does not match width x height");
  for (std::uint8_t v : data_)
    if (v > 1) fail(ErrorKind::InvalidArgument, "mask values must be 0 or 1");
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

RasterImage BinaryMask::to_image(float on_value) const {
  RasterImage out(width_, height_, 1);
  auto dst = out.data();
  for (std::size_t i = 0; i < data_.size(); ++i) dst[i] = data_[i] ? on_value : 0.0f;
  return out;
}

BinaryMask BinaryMask::from_image(const RasterImage& img) {
  require_gray(img, "BinaryMask::from_image");
  std::vector<std::uint8_t> data(img.pixel_count());
  const auto src = img.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = src[i] > 0.0f ? 1 : 0;
  return BinaryMask(img.width(), img.height(), std::move(data));
}

Histogram histogram256(const RasterImage& img) {
  Histogram hist{};
  for (float v : img.data()) {
    const long bin = std::lround(std::clamp(static_cast<double>(v), 0.0, 255.0));
    ++hist[static_cast<std::size_t>(bin)];
  }
  return hist;
}

int otsu_threshold(const Histogram& hist) {
  using boost::multiprecision::int256_t;

  // With n0 / s0 the count / intensity sum of the {<= t} class and N / S the
  // totals, the between-class variance is (s0 N - n0 S)^2 / (N^2 n0 (N - n0)).
  // N^2 is common to all t, so scores compare as D^2 / b cross-multiplied.
  std::uint64_t total = 0;
  std::uint64_t total_sum = 0;
  int occupied = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    total += hist[i];
    total_sum += hist[i] * i;
    if (hist[i] != 0) ++occupied;
  }
  if (total >= (std::uint64_t{1} << 40))
    fail(ErrorKind::InvalidArgument, "histogram too large for exact Otsu");
  if (occupied < 2)
    fail(ErrorKind::DegenerateImage, "all pixels share one intensity; no threshold separates them");

  int best_t = 0;
  int256_t best_num = 0;  // D^2 of the best threshold
  int256_t best_den = 1;  // b of the best threshold
  std::uint64_t n0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[static_cast<std::size_t>(t)];
    s0 += hist[static_cast<std::size_t>(t)] * static_cast<std::uint64_t>(t);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;  // variance 0, never beats the start value
    const int256_t d = int256_t(s0) * total - int256_t(n0) * total_sum;
    const int256_t num = d * d;
    const int256_t den = int256_t(n0) * n1;
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_t = t;
    }
  }
  return best_t;
}

int otsu_threshold(const RasterImage& img) {
  require_gray(img, "otsu_threshold");
  if (img.empty()) fail(ErrorKind::DegenerateImage, "empty image");
  return otsu_threshold(histogram256(img));
}

BinaryMask binarize(const RasterImage& img, int threshold, Polarity polarity) {
  require_gray(img, "binarize");
  if (threshold < 0 || threshold > 255)
    fail(ErrorKind::InvalidArgument, "threshold must be in [0, 255]");
  std::vector<std::uint8_t> data(img.pixel_count());
  const auto src = img.data();
  const float t = static_cast<float>(threshold);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool dark = src[i] <= t;
    data[i] = (polarity == Polarity::DarkForeground) == dark ? 1 : 0;
  }
  return BinaryMask(img.width(), img.height(), std::move(data));
}

std::vector<std::array<int, 2>> disk(int radius) {
  if (radius < 1) fail(ErrorKind::InvalidArgument, "structuring element radius must be >= 1");
  std::vector<std::array<int, 2>> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) offsets.push_back({dy, dx});
  return offsets;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  const auto se = disk(radius);
  const int w = mask.width(), h = mask.height();
  BinaryMask out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      bool keep = true;
      for (const auto& [dy, dx] : se) {
        const int rr = r + dy, cc = c + dx;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        if (!mask(rr, cc)) {
          keep = false;
          break;
        }
      }
      out.set(r, c, keep);
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  const auto se = disk(radius);
  const int w = mask.width(), h = mask.height();
  BinaryMask out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      for (const auto& [dy, dx] : se) {
        const int rr = r + dy, cc = c + dx;
        if (rr >= 0 && rr < h && cc >= 0 && cc < w) out.set(rr, cc, true);
      }
    }
  }
  return out;
}

BinaryMask binary_opening(const BinaryMask& mask, int radius) {
  return dilate(erode(mask, radius), radius);
}

BinaryMask largest_component(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(mask.size(), 0);
  std::vector<std::size_t> sizes{0};
  std::vector<std::size_t> stack;
  int next = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t start = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                                static_cast<std::size_t>(c);
      if (!mask(r, c) || label[start] != 0) continue;
      ++next;
      std::size_t size = 0;
      label[start] = next;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        ++size;
        const int pr = static_cast<int>(p / static_cast<std::size_t>(w));
        const int pc = static_cast<int>(p % static_cast<std::size_t>(w));
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int rr = pr + dy, cc = pc + dx;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w || !mask(rr, cc)) continue;
            const std::size_t q = static_cast<std::size_t>(rr) * static_cast<std::size_t>(w) +
                                  static_cast<std::size_t>(cc);
            if (label[q] != 0) continue;
            label[q] = next;
            stack.push_back(q);
          }
        }
      }
      sizes.push_back(size);
    }
  }
  BinaryMask out(w, h);
  if (next == 0) return out;
  int best = 1;
  for (int i = 2; i <= next; ++i)
    if (sizes[static_cast<std::size_t>(i)] > sizes[static_cast<std::size_t>(best)]) best = i;
  std::vector<std::uint8_t> data(mask.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = label[i] == best ? 1 : 0;
  return BinaryMask(w, h, std::move(data));
}

RasterImage apply_mask(const RasterImage& gfi, const BinaryMask& mask) {
  require_gray(gfi, "apply_mask");
  if (gfi.width() != mask.width() || gfi.height() != mask.height())
    fail(ErrorKind::ShapeMismatch, "image and mask dimensions differ");
  RasterImage out = gfi;
  auto dst = out.data();
  const auto m = mask.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = dst[i] * static_cast<float>(m[i]);
  return out;
}

}  // namespace lesion::seg
