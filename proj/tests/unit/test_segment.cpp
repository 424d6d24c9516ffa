#include <gtest/gtest.h>

#include <deque>

#include "helpers.hpp"
#include "otsu_oracle.hpp"
#include "lesion/segment.hpp"

using namespace lesion;
using lesion::testing::expect_error;
using lesion::testing::gray;
using lesion::testing::brute_force_otsu;

namespace {

seg::BinaryMask mask_from(int w, int h, const std::vector<int>& bits) {
  std::vector<std::uint8_t> d(bits.begin(), bits.end());
  return seg::BinaryMask(w, h, std::move(d));
}

seg::BinaryMask random_mask(Rng& rng, int w, int h, double p) {
  seg::BinaryMask m(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) m.set(r, c, rng.uniform() < p);
  return m;
}

// Direct definitions: erosion treats the outside as foreground, dilation
// as background.
seg::BinaryMask naive_erode(const seg::BinaryMask& m, int rad) {
  seg::BinaryMask out(m.width(), m.height());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      bool all = true;
      for (int dy = -rad; dy <= rad; ++dy)
        for (int dx = -rad; dx <= rad; ++dx) {
          if (dy * dy + dx * dx > rad * rad) continue;
          const int rr = r + dy, cc = c + dx;
          if (rr < 0 || cc < 0 || rr >= m.height() || cc >= m.width()) continue;
          all = all && m(rr, cc);
        }
      out.set(r, c, all);
    }
  return out;
}

seg::BinaryMask naive_dilate(const seg::BinaryMask& m, int rad) {
  seg::BinaryMask out(m.width(), m.height());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      bool any = false;
      for (int dy = -rad; dy <= rad; ++dy)
        for (int dx = -rad; dx <= rad; ++dx) {
          if (dy * dy + dx * dx > rad * rad) continue;
          const int rr = r + dy, cc = c + dx;
          if (rr < 0 || cc < 0 || rr >= m.height() || cc >= m.width()) continue;
          any = any || m(rr, cc);
        }
      out.set(r, c, any);
    }
  return out;
}

std::vector<std::size_t> component_sizes(const seg::BinaryMask& m) {
  std::vector<int> seen(m.size());
  std::vector<std::size_t> sizes;
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      if (!m(r, c) || seen[r * m.width() + c]) continue;
      std::size_t n = 0;
      std::deque<std::pair<int, int>> q{{r, c}};
      seen[r * m.width() + c] = 1;
      while (!q.empty()) {
        auto [y, x] = q.front();
        q.pop_front();
        ++n;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || xx < 0 || yy >= m.height() || xx >= m.width()) continue;
            if (m(yy, xx) && !seen[yy * m.width() + xx]) {
              seen[yy * m.width() + xx] = 1;
              q.emplace_back(yy, xx);
            }
          }
      }
      sizes.push_back(n);
    }
  return sizes;
}

bool subset(const seg::BinaryMask& a, const seg::BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.data()[i] && !b.data()[i]) return false;
  return true;
}

}  // namespace

// ---- BinaryMask --------------------------------------------------------------------

TEST(BinaryMask, StrictlyBinaryAndRoundTripsThroughImages) {
  expect_error(ErrorKind::InvalidArgument, [] { mask_from(3, 1, {0, 5, 1}); });
  const auto m = mask_from(3, 1, {0, 1, 1});
  EXPECT_EQ(m.count(), 2u);
  const RasterImage img = m.to_image();
  EXPECT_EQ(img.data()[1], 255.0f);
  EXPECT_EQ(seg::BinaryMask::from_image(img), m);
  expect_error(ErrorKind::SizeError, [] { seg::BinaryMask(2, 2, std::vector<std::uint8_t>(3)); });
}

// ---- Otsu --------------------------------------------------------------------------

TEST(Otsu, TwoSpikesTieGoesToSmallestThreshold) {
  seg::Histogram h{};
  h[0] = 50;
  h[255] = 50;
  EXPECT_EQ(seg::otsu_threshold(h), 0);
  EXPECT_EQ(brute_force_otsu(h), 0);
}

TEST(Otsu, UnbalancedSpikesMatchBruteForce) {
  seg::Histogram h{};
  h[10] = 90;
  h[200] = 10;
  EXPECT_EQ(seg::otsu_threshold(h), brute_force_otsu(h));
  EXPECT_EQ(seg::otsu_threshold(h), 10);
}

TEST(Otsu, ConstantImageIsDegenerate) {
  expect_error(ErrorKind::DegenerateImage, [] { seg::otsu_threshold(RasterImage(5, 5, 1, 42.0f)); });
  expect_error(ErrorKind::DegenerateImage, [] { seg::otsu_threshold(seg::Histogram{}); });
}

TEST(Otsu, HistogramRoundsAndClamps) {
  const auto h = seg::histogram256(gray(5, 1, {-3.0f, 0.4f, 0.6f, 254.6f, 300.0f}));
  EXPECT_EQ(h[0], 2u);
  EXPECT_EQ(h[1], 1u);
  EXPECT_EQ(h[255], 2u);
}

TEST(Otsu, PropertyEqualsExhaustiveScanOnRandomHistograms) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    seg::Histogram h{};
    const int occupied = 2 + static_cast<int>(rng.below(20));
    for (int i = 0; i < occupied; ++i) h[rng.below(256)] += 1 + rng.below(trial % 2 ? 5 : 100000);
    const int want = brute_force_otsu(h);
    if (want < 0) continue;
    ASSERT_EQ(seg::otsu_threshold(h), want) << "trial " << trial;
  }
}

TEST(Otsu, ImageOverloadUsesRoundedHistogram) {
  const RasterImage img = gray(4, 1, {10.2f, 9.8f, 200.4f, 199.6f});
  seg::Histogram h{};
  h[10] = 2;
  h[200] = 2;
  EXPECT_EQ(seg::otsu_threshold(img), seg::otsu_threshold(h));
}

// ---- binarize ----------------------------------------------------------------------

TEST(Binarize, Examples) {
  EXPECT_EQ(seg::binarize(gray(3, 1, {101, 150, 255}), 100).count(), 0u);
  EXPECT_EQ(seg::binarize(gray(3, 1, {0, 50, 100}), 100).count(), 3u);
  EXPECT_EQ(seg::binarize(gray(2, 1, {10, 200}), 100), mask_from(2, 1, {1, 0}));
  EXPECT_EQ(seg::binarize(gray(2, 1, {10, 200}), 100, seg::Polarity::BrightForeground),
            mask_from(2, 1, {0, 1}));
}

// ---- morphology ----------------------------------------------------------------------

TEST(Disk, OffsetsWithinRadius) {
  EXPECT_EQ(seg::disk(1).size(), 5u);
  EXPECT_EQ(seg::disk(3).size(), 29u);
  for (auto [dy, dx] : seg::disk(3)) EXPECT_LE(dy * dy + dx * dx, 9);
}

TEST(Opening, SingletonRemoved) {
  seg::BinaryMask m(9, 9);
  m.set(4, 4, true);
  EXPECT_EQ(seg::binary_opening(m, 1).count(), 0u);
}

TEST(Opening, EmptyStaysEmpty) {
  const seg::BinaryMask m(12, 7);
  EXPECT_EQ(seg::binary_opening(m, 3), m);
}

TEST(Opening, SolidSquareFillingTheFrameUnchanged) {
  const seg::BinaryMask m(20, 20, 1);
  EXPECT_EQ(seg::binary_opening(m, 3), m);
}

TEST(Opening, SquareInsideLargerCanvasLosesOnlyCornerPixels) {
  seg::BinaryMask m(40, 40);
  for (int r = 10; r < 30; ++r)
    for (int c = 10; c < 30; ++c) m.set(r, c, true);
  const auto out = seg::binary_opening(m, 3);
  EXPECT_TRUE(subset(out, m));
  for (int r = 13; r < 27; ++r)
    for (int c = 10; c < 30; ++c) EXPECT_TRUE(out(r, c));
  EXPECT_FALSE(out(10, 10));
}

TEST(Morphology, MatchesNaiveDefinitions) {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(25)), h = 1 + static_cast<int>(rng.below(25));
    const int rad = 1 + static_cast<int>(rng.below(4));
    const auto m = random_mask(rng, w, h, rng.uniform(0.2, 0.9));
    ASSERT_EQ(seg::erode(m, rad), naive_erode(m, rad));
    ASSERT_EQ(seg::dilate(m, rad), naive_dilate(m, rad));
    ASSERT_EQ(seg::binary_opening(m, rad), naive_dilate(naive_erode(m, rad), rad));
  }
}

TEST(Opening, PropertyIdempotentAndAntiExtensive) {
  Rng rng(6);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 5 + static_cast<int>(rng.below(40)), h = 5 + static_cast<int>(rng.below(40));
    const int rad = 1 + static_cast<int>(rng.below(3));
    const auto m = random_mask(rng, w, h, rng.uniform(0.3, 0.95));
    const auto once = seg::binary_opening(m, rad);
    ASSERT_TRUE(subset(once, m));
    ASSERT_EQ(seg::binary_opening(once, rad), once);
  }
}

// ---- connected components ---------------------------------------------------------------

TEST(LargestComponent, KeepsTheBiggerBlob) {
  seg::BinaryMask m(20, 10);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) m.set(r, c, true);  // 30 pixels
  for (int c = 10; c < 15; ++c) m.set(8, c, true);    // 5 pixels
  const auto out = seg::largest_component(m);
  EXPECT_EQ(out.count(), 30u);
  EXPECT_TRUE(out(0, 0));
  EXPECT_FALSE(out(8, 10));
}

TEST(LargestComponent, SingleBlobAndEmpty) {
  seg::BinaryMask m(6, 6);
  m.set(1, 1, true);
  m.set(2, 2, true);  // diagonal neighbours are connected
  EXPECT_EQ(seg::largest_component(m), m);
  const seg::BinaryMask empty(6, 6);
  EXPECT_EQ(seg::largest_component(empty), empty);
}

TEST(LargestComponent, PropertyMatchesFloodFillOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_mask(rng, 3 + static_cast<int>(rng.below(30)), 3 + static_cast<int>(rng.below(30)), 0.35);
    const auto sizes = component_sizes(m);
    const auto out = seg::largest_component(m);
    const std::size_t want = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
    ASSERT_EQ(out.count(), want);
    ASSERT_TRUE(subset(out, m));
    ASSERT_LE(component_sizes(out).size(), 1u);
  }
}

// ---- mask application ---------------------------------------------------------------------

TEST(ApplyMask, Examples) {
  const RasterImage gfi = gray(2, 1, {100, 50});
  EXPECT_EQ(seg::apply_mask(gfi, mask_from(2, 1, {1, 1})), gfi);
  EXPECT_EQ(seg::apply_mask(gfi, mask_from(2, 1, {0, 0})), gray(2, 1, {0, 0}));
  EXPECT_EQ(seg::apply_mask(gfi, mask_from(2, 1, {1, 0})), gray(2, 1, {100, 0}));
  expect_error(ErrorKind::ShapeMismatch, [&] { seg::apply_mask(gfi, seg::BinaryMask(1, 2)); });
}

TEST(ApplyMask, PropertyExactInsideZeroOutside) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(30)), h = 1 + static_cast<int>(rng.below(30));
    const RasterImage gfi = lesion::testing::random_image(rng, w, h, 1);
    const auto m = random_mask(rng, w, h, 0.5);
    const RasterImage out = seg::apply_mask(gfi, m);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) ASSERT_EQ(out.at(r, c), m(r, c) ? gfi.at(r, c) : 0.0f);
  }
}
