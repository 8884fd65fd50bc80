#include "remi/media/mask.hpp"

#include "remi/core/error.hpp"

#include <algorithm>
#include <cstring>
#include <png.h>

namespace remi::media {

namespace {

std::vector<Point> open_ring(const std::vector<Point>& ring) {
    std::vector<Point> out = ring;
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
}

std::size_t distinct_vertices(const std::vector<Point>& ring) {
    std::vector<std::pair<int, int>> v;
    for (const auto& p : ring) v.emplace_back(p.x, p.y);
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

// x-coordinate of an edge crossing, in doubled units, as num / den (den > 0).
struct Crossing {
    std::int64_t num;
    std::int64_t den;
};

bool less(const Crossing& a, const Crossing& b) { return a.num * b.den < b.num * a.den; }

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    // b > 0
    return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

void fill_ring(const std::vector<Point>& ring, int width, int height, std::vector<std::uint8_t>& out) {
    const std::size_t n = ring.size();
    std::vector<Crossing> xs;
    for (int y = 0; y < height; ++y) {
        const std::int64_t cy2 = 2 * static_cast<std::int64_t>(y) + 1;
        xs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& a = ring[i];
            const Point& b = ring[(i + 1) % n];
            std::int64_t ay = 2 * a.y, by = 2 * b.y;
            if (ay == by) continue;
            if (cy2 < std::min(ay, by) || cy2 >= std::max(ay, by)) continue;
            std::int64_t ax = 2 * a.x, bx = 2 * b.x;
            // X = ax + (cy2 - ay) * (bx - ax) / (by - ay)
            std::int64_t den = by - ay;
            std::int64_t num = ax * den + (cy2 - ay) * (bx - ax);
            if (den < 0) {
                den = -den;
                num = -num;
            }
            xs.push_back({num, den});
        }
        std::sort(xs.begin(), xs.end(), less);
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // Centers with X[k] <= 2x + 1 < X[k + 1].
            std::int64_t from = ceil_div(xs[k].num - xs[k].den, 2 * xs[k].den);
            std::int64_t to = ceil_div(xs[k + 1].num - xs[k + 1].den, 2 * xs[k + 1].den);
            from = std::max<std::int64_t>(from, 0);
            to = std::min<std::int64_t>(to, width);
            for (std::int64_t x = from; x < to; ++x) out[static_cast<std::size_t>(y) * width + x] ^= 1;
        }
    }
}

}  // namespace

void validate_mask(const MaskRegion& mask, int width, int height) {
    std::vector<FieldError> errors;
    if (width <= 0 || height <= 0) throw Error(ErrorCode::validation, "target image has no pixels");
    bool any_area = false;
    for (std::size_t r = 0; r < mask.polygons.size(); ++r) {
        const auto& ring = mask.polygons[r];
        std::string field = "polygons[" + std::to_string(r) + "]";
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const auto& p = ring[i];
            if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
                errors.push_back({field + "[" + std::to_string(i) + "]", "out_of_bounds",
                                  "vertex (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                      ") outside " + std::to_string(width) + "x" + std::to_string(height)});
            }
        }
        if (distinct_vertices(open_ring(ring)) < 3)
            errors.push_back({field, "too_few_vertices", "a polygon needs at least 3 distinct vertices"});
        else
            any_area = true;
    }
    for (std::size_t s = 0; s < mask.spans.size(); ++s) {
        const auto& span = mask.spans[s];
        std::string field = "spans[" + std::to_string(s) + "]";
        if (span.length < 0) {
            errors.push_back({field, "negative_length", "span length must be >= 0"});
            continue;
        }
        if (span.y < 0 || span.y >= height || span.x < 0 ||
            static_cast<std::int64_t>(span.x) + span.length > width) {
            errors.push_back({field, "out_of_bounds", "span outside " + std::to_string(width) + "x" +
                                                          std::to_string(height)});
            continue;
        }
        if (span.length > 0) any_area = true;
    }
    if (errors.empty() && !any_area)
        errors.push_back({"mask", "empty", "mask needs a polygon or a nonempty span"});
    if (!errors.empty()) throw Error(ErrorCode::validation, "invalid mask", std::move(errors));
}

std::vector<std::uint8_t> rasterize_mask(const MaskRegion& mask, int width, int height) {
    validate_mask(mask, width, height);
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height, 0);
    std::vector<std::uint8_t> ring_mask(out.size());
    for (const auto& ring : mask.polygons) {
        std::fill(ring_mask.begin(), ring_mask.end(), 0);
        fill_ring(open_ring(ring), width, height, ring_mask);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] |= ring_mask[i];
    }
    for (const auto& span : mask.spans)
        for (int x = span.x; x < span.x + span.length; ++x) out[static_cast<std::size_t>(span.y) * width + x] = 1;
    return out;
}

std::size_t mask_area(const std::vector<std::uint8_t>& raster) {
    return static_cast<std::size_t>(std::count_if(raster.begin(), raster.end(), [](std::uint8_t v) { return v != 0; }));
}

std::string mask_to_png(const std::vector<std::uint8_t>& raster, int width, int height) {
    std::vector<std::uint8_t> gray(raster.size());
    std::transform(raster.begin(), raster.end(), gray.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
    return encode_gray_png(width, height, gray);
}

std::vector<std::uint8_t> mask_from_png(std::string_view png, int& width, int& height) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, png.data(), png.size()))
        throw Error(ErrorCode::validation, std::string("invalid mask png: ") + img.message);
    img.format = PNG_FORMAT_GRAY;
    width = static_cast<int>(img.width);
    height = static_cast<int>(img.height);
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(width) * height);
    if (!png_image_finish_read(&img, nullptr, gray.data(), 0, nullptr))
        throw Error(ErrorCode::validation, std::string("invalid mask png: ") + img.message);
    for (auto& v : gray) v = v >= 128 ? 1 : 0;
    return gray;
}

}  // namespace remi::media
