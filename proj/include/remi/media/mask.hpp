#pragma once

#include "remi/core/types.hpp"
#include "remi/media/image.hpp"

#include <cstdint>
#include <vector>

namespace remi::media {

// Throws Error(validation) listing every offending ring/span when the mask
// does not fit a width x height image. Coordinates are 0-based, so a vertex
// at (width, height) is out of bounds. A ring needs 3 distinct vertices; a
// repeated closing vertex is allowed.
void validate_mask(const MaskRegion& mask, int width, int height);

// One byte per pixel, row-major, 1 inside the mask. A pixel belongs to a
// ring when its center (x + 0.5, y + 0.5) lies inside under the even-odd
// rule; rings and spans are unioned. Exact integer arithmetic throughout.
std::vector<std::uint8_t> rasterize_mask(const MaskRegion& mask, int width, int height);

std::size_t mask_area(const std::vector<std::uint8_t>& raster);

// Grayscale PNG, 255 marks the editable area (raster-mask provider APIs).
std::string mask_to_png(const std::vector<std::uint8_t>& raster, int width, int height);
std::vector<std::uint8_t> mask_from_png(std::string_view png, int& width, int& height);

}  // namespace remi::media
