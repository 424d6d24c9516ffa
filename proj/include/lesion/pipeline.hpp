#pragma once

#include <string_view>
#include <vector>

#include "lesion/image.hpp"
#include "lesion/imgcore.hpp"
#include "lesion/ive.hpp"
#include "lesion/segment.hpp"

namespace lesion::pipeline {

enum class Variant { Ive, Canny };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

enum class Stage {
  Decoded,
  Downscaled,
  Enhanced,
  Gray,
  Filtered,
  OtsuMask,
  ResizedMask,
  ResizedGfi,
  OpenedMask,
  LesionMask,
  Sla,
  UnsignedIntensity,
  Ive,
  Canny,
};

std::string_view to_string(Stage s);

struct StageRecord {
  Stage stage;
  RasterImage image;
};

/// Settings for everything between a decoded photo and the network input.
struct PreprocessConfig {
  img::PipelineConfig image;
  seg::Polarity polarity = seg::Polarity::DarkForeground;
  int opening_radius = 3;
  bool keep_largest_component = true;
  ive::IveParams ive;
  ive::CannyParams canny;

  void validate() const;
};

/// The lesion image in every intermediate form, plus an ordered trace of
/// the stages that produced it.
struct Preprocessed {
  RasterImage sla;       // 8-bit range, zero outside the lesion
  seg::BinaryMask mask;  // final lesion mask on the canvas
  int otsu_threshold = 0;
  std::vector<StageRecord> trace;  // only filled when tracing is requested

  const RasterImage* find(Stage s) const;
};

/// decode -> downscale to the canvas -> enhance (B, S, C) -> grayscale ->
/// Gaussian -> Otsu mask -> pad both mask and filtered image onto the canvas
/// -> opening -> largest component -> masked lesion.
Preprocessed segment_lesion(const RasterImage& decoded, const PreprocessConfig& cfg,
                            bool trace = false);

/// The segmented lesion in unit range (8-bit intensity / 255).
RasterImage unit_range(const RasterImage& sla);

/// Network input for a variant, computed from the 8-bit-range SLA. An SLA
/// with no lesion pixels gives an all-zero feature image.
RasterImage feature_image(const RasterImage& sla, Variant variant, const PreprocessConfig& cfg);

/// Adds the IVE, unsigned-intensity and Canny stages to a traced result.
void trace_features(Preprocessed& p, const PreprocessConfig& cfg);

}  // namespace lesion::pipeline
