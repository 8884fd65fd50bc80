#pragma once

// Minimal PDF 1.4 writer: standard Helvetica fonts (WinAnsi), RGB images as
// Flate-compressed XObjects, uncompressed content streams. Output is a pure
// function of the calls made, so identical inputs give identical bytes.

#include "remi/media/image.hpp"

#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace remi::storybook::pdf {

enum class Font { regular, bold };

// UTF-8 to WinAnsi (cp1252); characters outside it become '?'.
std::string to_winansi(std::string_view utf8);
// UTF-16BE with BOM, as a PDF hex string "<FEFF...>".
std::string utf16_hex(std::string_view utf8);

// Width in points of WinAnsi text set in the given font and size.
double text_width(std::string_view winansi, double size, Font font);

// Greedy word wrap to `width` points. Words longer than a line are split.
std::vector<std::string> wrap(std::string_view winansi, double width, double size, Font font);

class Page {
public:
    void text(double x, double y, double size, Font font, std::string_view winansi);
    // Marked-content span carrying the original text for extraction; the
    // visible lines drawn inside may be wrapped or lossy.
    void begin_span(std::string_view tag, std::string_view utf8_actual_text);
    void end_span();
    void image(const std::string& name, double x, double y, double w, double h);
    void rule(double x0, double y0, double x1, double y1, double width);

    const std::string& content() const { return content_; }
    const std::vector<std::string>& images() const { return images_; }

private:
    std::string content_;
    std::vector<std::string> images_;
};

class Document {
public:
    Document(double page_width, double page_height);

    // Registers an image once per content hash; returns its resource name.
    std::string add_image(const media::Image& image, const std::string& content_hash);
    Page& add_page();
    void set_info(std::string title, std::string author, std::string date_yyyymmdd);

    double page_width() const { return width_; }
    double page_height() const { return height_; }
    std::size_t page_count() const { return pages_.size(); }

    std::string serialize() const;

private:
    struct ImageObject {
        std::string name;
        std::string hash;
        int width = 0;
        int height = 0;
        std::string compressed;
    };

    double width_;
    double height_;
    std::deque<Page> pages_;  // stable references from add_page
    std::vector<ImageObject> images_;
    std::map<std::string, std::size_t> image_by_hash_;
    std::string title_, author_, date_;
};

}  // namespace remi::storybook::pdf
