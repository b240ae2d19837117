#pragma once

#include "handsynth/image.hpp"
#include "handsynth/renderer.hpp"

namespace handsynth {

struct BBox {
  int col_min = 0;
  int row_min = 0;
  int col_max = 0;  // inclusive
  int row_max = 0;  // inclusive

  friend bool operator==(const BBox&, const BBox&) = default;
};

// fg.rgb where mask > 0, background elsewhere. With `feather`, pixels on
// either side of the mask boundary blend by RGB supersample coverage.
// Throws ShapeMismatch.
ImageRGBf composite_rgb(const RenderOutput& fg, const ImageRGBf& background, bool feather = false);

// Mask-gated fusion: fg.depth where mask > 0, background depth elsewhere.
// Invalid (0) background pixels stay 0. Throws ShapeMismatch.
DepthMap fuse_depth(const RenderOutput& fg, const DepthMap& background_depth);

// Tight inclusive box over mask > 0, grown by `pad` and clamped to the image.
// Throws EmptyMask.
BBox bbox_from_mask(const LabelMap& mask, int pad = 0);

}  // namespace handsynth
