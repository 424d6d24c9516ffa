#pragma once

#include <gtest/gtest.h>

#include "lesion/error.hpp"
#include "lesion/image.hpp"
#include "lesion/random.hpp"

namespace lesion::testing {

template <typename F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

inline RasterImage random_image(Rng& rng, int w, int h, int ch, double lo = 0, double hi = 255) {
  RasterImage img(w, h, ch);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

inline RasterImage gray(int w, int h, std::vector<float> data) {
  return RasterImage(w, h, 1, std::move(data));
}

}  // namespace lesion::testing
