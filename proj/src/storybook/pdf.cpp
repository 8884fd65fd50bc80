#include "remi/storybook/pdf.hpp"

#include "remi/core/error.hpp"

#include <zlib.h>

#include <array>
#include <cstdio>

namespace remi::storybook::pdf {

namespace {

// Helvetica advance widths (1/1000 em) for WinAnsi 32..126.
constexpr std::array<int, 95> kHelvetica{
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,  // space ../
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,  // 0..?
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,  // @..O
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,   // P.._
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,   // `..o
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584};       // p..~

constexpr std::array<int, 95> kHelveticaBold{
    278, 333, 474, 556, 556, 889, 722, 238, 333, 333, 389, 584, 278, 333, 278, 278,
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 333, 333, 584, 584, 584, 611,
    975, 722, 722, 722, 722, 667, 611, 778, 722, 278, 556, 722, 611, 833, 722, 778,
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 333, 278, 333, 584, 556,
    333, 556, 611, 556, 611, 556, 333, 611, 611, 278, 278, 556, 278, 889, 611, 611,
    611, 611, 389, 556, 333, 611, 556, 778, 556, 556, 500, 389, 280, 389, 584};

// cp1252 0x80..0x9F -> Unicode; 0 marks unassigned slots.
constexpr std::array<char32_t, 32> kCp1252High{
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    for (std::size_t i = 0; i < s.size();) {
        auto c = static_cast<unsigned char>(s[i]);
        int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : (c >> 3) == 30 ? 4 : 0;
        if (len == 0 || i + len > s.size()) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        char32_t cp = len == 1 ? c : c & (0x7F >> len);
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(ok ? cp : 0xFFFD);
        i += ok ? len : 1;
    }
    return out;
}

int glyph_width(unsigned char c, Font font) {
    const auto& table = font == Font::bold ? kHelveticaBold : kHelvetica;
    if (c >= 32 && c <= 126) return table[c - 32];
    if (c >= 0xC0) return font == Font::bold ? 667 : 611;  // accented capitals/lowercase, close enough
    return 556;
}

std::string escape_literal(std::string_view s) {
    std::string out = "(";
    for (char c : s) {
        if (c == '(' || c == ')' || c == '\\') out += '\\';
        if (c == '\n' || c == '\r') {
            out += ' ';
            continue;
        }
        out += c;
    }
    return out + ")";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s == "-0" ? "0" : s;
}

std::string deflate(std::span<const std::uint8_t> data) {
    uLongf size = compressBound(static_cast<uLong>(data.size()));
    std::string out(size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(out.data()), &size, data.data(), static_cast<uLong>(data.size()), 9) != Z_OK)
        throw Error(ErrorCode::io, "deflate failed");
    out.resize(size);
    return out;
}

}  // namespace

std::string to_winansi(std::string_view utf8) {
    std::string out;
    for (char32_t cp : decode_utf8(utf8)) {
        if (cp == '\t' || cp == '\n' || cp == '\r') {
            out += ' ';
        } else if (cp >= 0x20 && cp < 0x7F) {
            out += static_cast<char>(cp);
        } else if (cp >= 0xA0 && cp <= 0xFF) {
            out += static_cast<char>(cp);
        } else {
            char mapped = '?';
            for (std::size_t i = 0; i < kCp1252High.size(); ++i)
                if (kCp1252High[i] != 0 && kCp1252High[i] == cp) mapped = static_cast<char>(0x80 + i);
            out += mapped;
        }
    }
    return out;
}

std::string utf16_hex(std::string_view utf8) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out = "<FEFF";
    auto unit = [&](unsigned u) {
        for (int shift = 12; shift >= 0; shift -= 4) out += hex[(u >> shift) & 0xF];
    };
    for (char32_t cp : decode_utf8(utf8)) {
        if (cp >= 0x10000) {
            cp -= 0x10000;
            unit(0xD800 + static_cast<unsigned>(cp >> 10));
            unit(0xDC00 + static_cast<unsigned>(cp & 0x3FF));
        } else {
            unit(static_cast<unsigned>(cp));
        }
    }
    return out + ">";
}

double text_width(std::string_view winansi, double size, Font font) {
    long total = 0;
    for (char c : winansi) total += glyph_width(static_cast<unsigned char>(c), font);
    return static_cast<double>(total) * size / 1000.0;
}

std::vector<std::string> wrap(std::string_view winansi, double width, double size, Font font) {
    std::vector<std::string> lines;
    std::string line;
    auto flush = [&] {
        if (!line.empty()) lines.push_back(line);
        line.clear();
    };
    std::size_t i = 0;
    while (i < winansi.size()) {
        while (i < winansi.size() && winansi[i] == ' ') ++i;
        std::size_t j = winansi.find(' ', i);
        if (j == std::string_view::npos) j = winansi.size();
        std::string word(winansi.substr(i, j - i));
        i = j;
        if (word.empty()) continue;
        std::string candidate = line.empty() ? word : line + " " + word;
        if (text_width(candidate, size, font) <= width) {
            line = std::move(candidate);
            continue;
        }
        flush();
        while (text_width(word, size, font) > width) {
            std::size_t cut = 1;
            while (cut < word.size() && text_width(word.substr(0, cut + 1), size, font) <= width) ++cut;
            lines.push_back(word.substr(0, cut));
            word.erase(0, cut);
        }
        line = word;
    }
    flush();
    return lines;
}

void Page::text(double x, double y, double size, Font font, std::string_view winansi) {
    content_ += "BT /" + std::string(font == Font::bold ? "F2" : "F1") + " " + fmt(size) + " Tf " + fmt(x) + " " +
                fmt(y) + " Td " + escape_literal(winansi) + " Tj ET\n";
}

void Page::begin_span(std::string_view tag, std::string_view utf8_actual_text) {
    content_ += "/" + std::string(tag) + " <</ActualText " + utf16_hex(utf8_actual_text) + ">> BDC\n";
}

void Page::end_span() { content_ += "EMC\n"; }

void Page::image(const std::string& name, double x, double y, double w, double h) {
    content_ += "q " + fmt(w) + " 0 0 " + fmt(h) + " " + fmt(x) + " " + fmt(y) + " cm /" + name + " Do Q\n";
    images_.push_back(name);
}

void Page::rule(double x0, double y0, double x1, double y1, double width) {
    content_ += "q " + fmt(width) + " w 0.6 G " + fmt(x0) + " " + fmt(y0) + " m " + fmt(x1) + " " + fmt(y1) +
                " l S Q\n";
}

Document::Document(double page_width, double page_height) : width_(page_width), height_(page_height) {
    if (page_width <= 0 || page_height <= 0) throw Error(ErrorCode::validation, "page size must be positive");
}

std::string Document::add_image(const media::Image& image, const std::string& content_hash) {
    if (auto it = image_by_hash_.find(content_hash); it != image_by_hash_.end()) return images_[it->second].name;
    ImageObject obj;
    obj.name = "Im" + std::to_string(images_.size() + 1);
    obj.hash = content_hash;
    obj.width = image.width();
    obj.height = image.height();
    obj.compressed = deflate(image.bytes());
    image_by_hash_[content_hash] = images_.size();
    images_.push_back(std::move(obj));
    return images_.back().name;
}

Page& Document::add_page() { return pages_.emplace_back(); }

void Document::set_info(std::string title, std::string author, std::string date_yyyymmdd) {
    title_ = std::move(title);
    author_ = std::move(author);
    date_ = std::move(date_yyyymmdd);
}

std::string Document::serialize() const {
    // Object numbers: 1 catalog, 2 pages, 3-4 fonts, 5 info, then images,
    // then a (page, content) pair per page.
    const std::size_t first_image = 6;
    const std::size_t first_page = first_image + images_.size();
    const std::size_t total = first_page + 2 * pages_.size();

    std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
    std::vector<std::size_t> offsets(total, 0);
    auto begin_obj = [&](std::size_t n) {
        offsets[n] = out.size();
        out += std::to_string(n) + " 0 obj\n";
    };
    auto end_obj = [&] { out += "endobj\n"; };

    begin_obj(1);
    out += "<< /Type /Catalog /Pages 2 0 R >>\n";
    end_obj();

    begin_obj(2);
    out += "<< /Type /Pages /Kids [";
    for (std::size_t i = 0; i < pages_.size(); ++i)
        out += (i ? " " : "") + std::to_string(first_page + 2 * i) + " 0 R";
    out += "] /Count " + std::to_string(pages_.size()) + " >>\n";
    end_obj();

    begin_obj(3);
    out += "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>\n";
    end_obj();
    begin_obj(4);
    out += "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica-Bold /Encoding /WinAnsiEncoding >>\n";
    end_obj();

    begin_obj(5);
    out += "<< /Title " + utf16_hex(title_) + " /Author " + utf16_hex(author_) + " /Producer (remihaven)";
    if (!date_.empty()) out += " /CreationDate (D:" + date_ + ")";
    out += " >>\n";
    end_obj();

    for (std::size_t i = 0; i < images_.size(); ++i) {
        const auto& im = images_[i];
        begin_obj(first_image + i);
        out += "<< /Type /XObject /Subtype /Image /Width " + std::to_string(im.width) + " /Height " +
               std::to_string(im.height) + " /ColorSpace /DeviceRGB /BitsPerComponent 8 /Filter /FlateDecode" +
               " /ContentHash (" + im.hash + ") /Length " + std::to_string(im.compressed.size()) + " >>\nstream\n";
        out += im.compressed;
        out += "\nendstream\n";
        end_obj();
    }

    for (std::size_t i = 0; i < pages_.size(); ++i) {
        const auto& page = pages_[i];
        std::size_t page_obj = first_page + 2 * i;
        begin_obj(page_obj);
        out += "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 " + fmt(width_) + " " + fmt(height_) + "]" +
               " /Resources << /Font << /F1 3 0 R /F2 4 0 R >>";
        if (!page.images().empty()) {
            out += " /XObject <<";
            std::map<std::string, std::size_t> used;
            for (const auto& name : page.images())
                for (std::size_t k = 0; k < images_.size(); ++k)
                    if (images_[k].name == name) used[name] = first_image + k;
            for (const auto& [name, obj] : used) out += " /" + name + " " + std::to_string(obj) + " 0 R";
            out += " >>";
        }
        out += " >> /Contents " + std::to_string(page_obj + 1) + " 0 R >>\n";
        end_obj();

        begin_obj(page_obj + 1);
        out += "<< /Length " + std::to_string(page.content().size()) + " >>\nstream\n";
        out += page.content();
        out += "\nendstream\n";
        end_obj();
    }

    std::size_t xref = out.size();
    out += "xref\n0 " + std::to_string(total) + "\n0000000000 65535 f \n";
    for (std::size_t n = 1; n < total; ++n) {
        char line[24];
        std::snprintf(line, sizeof line, "%010zu 00000 n \n", offsets[n]);
        out += line;
    }
    out += "trailer\n<< /Size " + std::to_string(total) + " /Root 1 0 R /Info 5 0 R >>\nstartxref\n" +
           std::to_string(xref) + "\n%%EOF\n";
    return out;
}

}  // namespace remi::storybook::pdf
