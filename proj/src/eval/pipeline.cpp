#include "lesion/pipeline.hpp"

#include <algorithm>
#include <string>

#include "lesion/error.hpp"

namespace lesion::pipeline {

std::string_view to_string(Variant v) { return v == Variant::Ive ? "ive" : "canny"; }

Variant parse_variant(std::string_view text) {
  if (text == "ive") return Variant::Ive;
  if (text == "canny") return Variant::Canny;
  fail(ErrorKind::ConfigError, "unknown variant '" + std::string(text) + "' (expected ive or canny)");
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Decoded: return "decoded";
    case Stage::Downscaled: return "downscaled";
    case Stage::Enhanced: return "enhanced";
    case Stage::Gray: return "gray";
    case Stage::Filtered: return "filtered";
    case Stage::OtsuMask: return "otsu_mask";
    case Stage::ResizedMask: return "resized_mask";
    case Stage::ResizedGfi: return "resized_gfi";
    case Stage::OpenedMask: return "opened_mask";
    case Stage::LesionMask: return "lesion_mask";
    case Stage::Sla: return "sla";
    case Stage::UnsignedIntensity: return "unsigned_intensity";
    case Stage::Ive: return "ive";
    case Stage::Canny: return "canny";
  }
  return "unknown";
}

void PreprocessConfig::validate() const {
  image.validate();
  if (opening_radius < 1) fail(ErrorKind::ConfigError, "opening_radius must be >= 1");
  ive.validate();
  canny.validate();
}

const RasterImage* Preprocessed::find(Stage s) const {
  for (const StageRecord& r : trace)
    if (r.stage == s) return &r.image;
  return nullptr;
}

Preprocessed segment_lesion(const RasterImage& decoded, const PreprocessConfig& cfg, bool trace) {
  cfg.validate();
  Preprocessed out;
  auto record = [&](Stage s, const RasterImage& img) {
    if (trace) out.trace.push_back({s, img});
  };
  record(Stage::Decoded, decoded);

  const int rows = cfg.image.canvas_rows, cols = cfg.image.canvas_cols;
  const RasterImage small = img::downscale_fit(decoded, std::min(rows, cols));
  record(Stage::Downscaled, small);

  const RasterImage enhanced = img::enhance(small, cfg.image);
  record(Stage::Enhanced, enhanced);

  const RasterImage gray = enhanced.channels() == 3 ? img::rgb_to_gray(enhanced) : enhanced;
  record(Stage::Gray, gray);

  const RasterImage gfi = img::gaussian_filter(gray, cfg.image.gaussian_sigma);
  record(Stage::Filtered, gfi);

  out.otsu_threshold = seg::otsu_threshold(gfi);
  const seg::BinaryMask otsu = seg::binarize(gfi, out.otsu_threshold, cfg.polarity);
  record(Stage::OtsuMask, otsu.to_image());

  // Mask and filtered image are placed on the canvas separately; the
  // opening then runs on the canvas-sized mask.
  const seg::BinaryMask canvas_mask =
      seg::BinaryMask::from_image(img::pad_center_resize(otsu.to_image(1.0f), rows, cols));
  record(Stage::ResizedMask, canvas_mask.to_image());
  const RasterImage canvas_gfi = img::pad_center_resize(gfi, rows, cols);
  record(Stage::ResizedGfi, canvas_gfi);

  seg::BinaryMask mask = seg::binary_opening(canvas_mask, cfg.opening_radius);
  record(Stage::OpenedMask, mask.to_image());
  if (cfg.keep_largest_component) {
    mask = seg::largest_component(mask);
    record(Stage::LesionMask, mask.to_image());
  }

  out.sla = seg::apply_mask(canvas_gfi, mask);
  out.mask = std::move(mask);
  record(Stage::Sla, out.sla);
  return out;
}

RasterImage unit_range(const RasterImage& sla) {
  RasterImage out = sla;
  for (float& v : out.data()) v /= 255.0f;
  return out;
}

namespace {

bool has_signal(const RasterImage& img) {
  const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
  return *hi > *lo;
}

}  // namespace

RasterImage feature_image(const RasterImage& sla, Variant variant, const PreprocessConfig& cfg) {
  const RasterImage unit = unit_range(sla);
  if (variant == Variant::Canny) return ive::canny_edges(unit, cfg.canny);
  if (!has_signal(unit)) return RasterImage(sla.width(), sla.height(), 1);
  return ive::ive_transform(unit, cfg.ive);
}

void trace_features(Preprocessed& p, const PreprocessConfig& cfg) {
  const RasterImage unit = unit_range(p.sla);
  if (has_signal(unit)) {
    p.trace.push_back({Stage::UnsignedIntensity,
                       ive::normalize_0_255(ive::scale_by_constant(unit, cfg.ive.constant))});
  } else {
    p.trace.push_back({Stage::UnsignedIntensity, RasterImage(p.sla.width(), p.sla.height(), 1)});
  }
  p.trace.push_back({Stage::Ive, feature_image(p.sla, Variant::Ive, cfg)});
  p.trace.push_back({Stage::Canny, feature_image(p.sla, Variant::Canny, cfg)});
}

}  // namespace lesion::pipeline
