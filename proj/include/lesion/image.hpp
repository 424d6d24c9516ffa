#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lesion {

/// Row-major float raster, 1 (gray) or 3 (RGB) interleaved channels, nominal
/// range [0, 255]. Every preprocessing stage consumes and produces one.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, float fill = 0.0f);
  RasterImage(int width, int height, int channels, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return data_.empty(); }

  float& at(int row, int col, int channel = 0) {
    return data_[index(row, col, channel)];
  }
  float at(int row, int col, int channel = 0) const {
    return data_[index(row, col, channel)];
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(channel);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<float> data_;
};

}  // namespace lesion
