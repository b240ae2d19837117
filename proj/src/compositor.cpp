#include "handsynth/compositor.hpp"

#include "handsynth/error.hpp"

#include <algorithm>

namespace handsynth {
namespace {

bool on_boundary(const LabelMap& mask, int r, int c) {
  const bool fg = mask(r, c) > 0;
  static constexpr int dr[4] = {-1, 1, 0, 0};
  static constexpr int dc[4] = {0, 0, -1, 1};
  for (int k = 0; k < 4; ++k) {
    const int rr = r + dr[k];
    const int cc = c + dc[k];
    if (rr < 0 || cc < 0 || rr >= mask.height() || cc >= mask.width()) continue;
    if ((mask(rr, cc) > 0) != fg) return true;
  }
  return false;
}

}  // namespace

ImageRGBf composite_rgb(const RenderOutput& fg, const ImageRGBf& background, bool feather) {
  if (!fg.rgb.same_shape(background) || !fg.mask.same_shape(background) || background.channels() != 3) {
    throw Error(ErrorCode::ShapeMismatch, "composite_rgb: foreground and background shapes differ");
  }
  const bool have_coverage = fg.coverage.same_shape(background) && !fg.coverage.empty();
  ImageRGBf out = background;
  for (int r = 0; r < background.height(); ++r) {
    for (int c = 0; c < background.width(); ++c) {
      float alpha = fg.mask(r, c) > 0 ? 1.0f : 0.0f;
      if (feather && have_coverage && on_boundary(fg.mask, r, c)) alpha = fg.coverage(r, c);
      if (alpha == 0.0f) continue;
      for (int ch = 0; ch < 3; ++ch) {
        out(r, c, ch) = alpha == 1.0f ? fg.rgb(r, c, ch)
                                      : alpha * fg.rgb(r, c, ch) + (1.0f - alpha) * background(r, c, ch);
      }
    }
  }
  return out;
}

DepthMap fuse_depth(const RenderOutput& fg, const DepthMap& background_depth) {
  if (!fg.depth.same_shape(background_depth) || !fg.mask.same_shape(background_depth)) {
    throw Error(ErrorCode::ShapeMismatch, "fuse_depth: foreground and background shapes differ");
  }
  DepthMap out = background_depth;
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      if (fg.mask(r, c) > 0) out(r, c) = fg.depth(r, c);
    }
  }
  return out;
}

BBox bbox_from_mask(const LabelMap& mask, int pad) {
  BBox box{mask.width(), mask.height(), -1, -1};
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (mask(r, c) == 0) continue;
      box.col_min = std::min(box.col_min, c);
      box.row_min = std::min(box.row_min, r);
      box.col_max = std::max(box.col_max, c);
      box.row_max = std::max(box.row_max, r);
    }
  }
  if (box.col_max < 0) throw Error(ErrorCode::EmptyMask, "bbox_from_mask: mask has no foreground pixels");
  box.col_min = std::max(0, box.col_min - pad);
  box.row_min = std::max(0, box.row_min - pad);
  box.col_max = std::min(mask.width() - 1, box.col_max + pad);
  box.row_max = std::min(mask.height() - 1, box.row_max + pad);
  return box;
}

}  // namespace handsynth
