#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace remi::media {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// 8-bit RGB raster, row-major, no padding.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);

    std::span<const std::uint8_t> bytes() const { return pixels_; }
    std::span<std::uint8_t> bytes() { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Lossless PNG round trip (8-bit RGB). Decoding accepts gray/palette/alpha
// inputs and flattens them to RGB.
std::string encode_png(const Image& image);
Image decode_png(std::string_view png);
bool looks_like_png(std::string_view bytes);

// Single-channel PNG (0 or 255) used for raster masks on the provider wire.
std::string encode_gray_png(int width, int height, std::span<const std::uint8_t> values);

std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace remi::media
