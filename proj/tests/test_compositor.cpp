#include "handsynth/compositor.hpp"
#include "handsynth/random.hpp"

#include "test_support.hpp"

using namespace handsynth;
using testing::error_code;

namespace {

RenderOutput random_fg(int w, int h, RandomStream& rng, int mode) {
  RenderOutput fg;
  fg.rgb = ImageRGBf(w, h, 3);
  fg.depth = DepthMap(w, h, 1);
  fg.mask = LabelMap(w, h, 1);
  fg.coverage = Image<float>(w, h, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool on = mode == 0 ? ((r + c) % 2 == 0) : mode == 1;
      fg.mask(r, c) = on ? kHand : kBackground;
      fg.depth(r, c) = on ? static_cast<float>(rng.uniform(0.2, 2.0)) : 0.0f;
      fg.coverage(r, c) = on ? 1.0f : 0.0f;
      for (int ch = 0; ch < 3; ++ch) fg.rgb(r, c, ch) = static_cast<float>(rng.uniform());
    }
  }
  return fg;
}

ImageRGBf random_rgb(int w, int h, RandomStream& rng) {
  ImageRGBf img(w, h, 3);
  for (auto& v : img.values()) v = static_cast<float>(rng.uniform());
  return img;
}

DepthMap random_depth(int w, int h, RandomStream& rng) {
  DepthMap d(w, h, 1);
  for (auto& v : d.values()) v = rng.bernoulli(0.1) ? 0.0f : static_cast<float>(rng.uniform(0.5, 5.0));
  return d;
}

}  // namespace

TEST_CASE("checkerboard selection matches a brute-force loop") {
  RandomStream rng(1);
  const RenderOutput fg = random_fg(13, 9, rng, 0);
  const ImageRGBf bg = random_rgb(13, 9, rng);
  const DepthMap bgd = random_depth(13, 9, rng);
  const ImageRGBf rgb = composite_rgb(fg, bg);
  const DepthMap depth = fuse_depth(fg, bgd);
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 13; ++c) {
      const bool on = (r + c) % 2 == 0;
      for (int ch = 0; ch < 3; ++ch) CHECK(rgb(r, c, ch) == (on ? fg.rgb(r, c, ch) : bg(r, c, ch)));
      CHECK(depth(r, c) == (on ? fg.depth(r, c) : bgd(r, c)));
    }
  }
}

TEST_CASE("full and empty masks") {
  RandomStream rng(2);
  const ImageRGBf bg = random_rgb(7, 5, rng);
  const DepthMap bgd = random_depth(7, 5, rng);
  const RenderOutput all = random_fg(7, 5, rng, 1);
  CHECK(composite_rgb(all, bg) == all.rgb);
  CHECK(fuse_depth(all, bgd) == all.depth);
  const RenderOutput none = random_fg(7, 5, rng, 2);
  CHECK(composite_rgb(none, bg) == bg);
  CHECK(composite_rgb(none, bg, true) == bg);
  CHECK(fuse_depth(none, bgd) == bgd);
}

TEST_CASE("compositing is idempotent for a fixed mask") {
  RandomStream rng(3);
  const RenderOutput fg = random_fg(10, 10, rng, 0);
  const ImageRGBf once = composite_rgb(fg, random_rgb(10, 10, rng));
  CHECK(composite_rgb(fg, once) == once);
  const DepthMap donce = fuse_depth(fg, random_depth(10, 10, rng));
  CHECK(fuse_depth(fg, donce) == donce);
}

TEST_CASE("feathering blends only boundary pixels by coverage") {
  RandomStream rng(4);
  RenderOutput fg = random_fg(8, 8, rng, 2);
  for (int r = 2; r < 6; ++r)
    for (int c = 2; c < 6; ++c) {
      fg.mask(r, c) = kHand;
      fg.coverage(r, c) = 1.0f;
    }
  fg.coverage(2, 2) = 0.25f;
  const ImageRGBf bg = random_rgb(8, 8, rng);
  const ImageRGBf out = composite_rgb(fg, bg, true);
  CHECK(out(2, 2, 0) == doctest::Approx(0.25f * fg.rgb(2, 2, 0) + 0.75f * bg(2, 2, 0)));
  CHECK(out(3, 3, 1) == fg.rgb(3, 3, 1));
  CHECK(out(0, 0, 2) == bg(0, 0, 2));
  CHECK(composite_rgb(fg, bg, false)(2, 2, 0) == fg.rgb(2, 2, 0));
}

TEST_CASE("shape mismatches are reported") {
  RandomStream rng(5);
  const RenderOutput fg = random_fg(4, 4, rng, 0);
  CHECK(error_code([&] { composite_rgb(fg, ImageRGBf(5, 4, 3)); }) == ErrorCode::ShapeMismatch);
  CHECK(error_code([&] { fuse_depth(fg, DepthMap(4, 3, 1)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("bbox examples") {
  LabelMap m(10, 10, 1);
  m(3, 2) = 1;
  CHECK(bbox_from_mask(m) == BBox{2, 3, 2, 3});
  m(7, 5) = 1;
  CHECK(bbox_from_mask(m) == BBox{2, 3, 5, 7});
  CHECK(bbox_from_mask(m, 1) == BBox{1, 2, 6, 8});
  LabelMap full(6, 4, 1, 1);
  CHECK(bbox_from_mask(full, 10) == BBox{0, 0, 5, 3});
  CHECK(error_code([] { bbox_from_mask(LabelMap(3, 3, 1)); }) == ErrorCode::EmptyMask);
}

TEST_CASE("bbox is tight over random masks") {
  RandomStream rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    LabelMap m(12, 9, 1);
    const double p = rng.uniform(0.01, 0.3);
    for (auto& v : m.values()) v = rng.bernoulli(p) ? kHand : kBackground;
    m(static_cast<int>(rng.uniform_index(9)), static_cast<int>(rng.uniform_index(12))) = kObject;
    const BBox b = bbox_from_mask(m);
    bool left = false, right = false, top = false, bottom = false;
    for (int r = 0; r < 9; ++r)
      for (int c = 0; c < 12; ++c) {
        if (m(r, c) == 0) continue;
        CHECK(c >= b.col_min);
        CHECK(c <= b.col_max);
        CHECK(r >= b.row_min);
        CHECK(r <= b.row_max);
        left |= c == b.col_min;
        right |= c == b.col_max;
        top |= r == b.row_min;
        bottom |= r == b.row_max;
      }
    CHECK((left && right && top && bottom));
  }
}
