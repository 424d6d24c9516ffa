#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lesion/image.hpp"

namespace lesion::img {

/// Decodes an 8-bit JPEG or PNG stream. Color input yields 3 channels,
/// grayscale input 1 channel; alpha is dropped.
RasterImage decode_image(std::span<const std::uint8_t> bytes);

RasterImage read_image(const std::filesystem::path& path);

// Encoders quantize to 8 bits (round to nearest, clamp to [0, 255]).
std::vector<std::uint8_t> encode_png(const RasterImage& img);
std::vector<std::uint8_t> encode_jpeg(const RasterImage& img, int quality = 95);

void write_png(const RasterImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lesion::img
