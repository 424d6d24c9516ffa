#include "lesion/image.hpp"

#include <cmath>
#include <string>

#include "lesion/error.hpp"

namespace lesion {

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 0 || height < 0) fail(ErrorKind::SizeError, "negative image extent");
  if (channels != 1 && channels != 3)
    fail(ErrorKind::ChannelError, "channels must be 1 or 3, got " + std::to_string(channels));
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    fail(ErrorKind::SizeError, "pixel buffer length does not match width x height x channels");
  for (float v : data_)
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite pixel value");
}

}  // namespace lesion
