#pragma once

// Independent reader for the storybook PDFs: walks the xref table, inflates
// image streams and decodes ActualText spans. Only the subset of PDF the
// writer emits is understood; anything unexpected fails loudly.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <map>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace remi::test {

struct PdfImage {
    std::string content_hash;
    int width = 0;
    int height = 0;
    std::string rgb;  // inflated pixels
};

struct PdfSpan {
    std::string tag;   // Narrative or Caption
    std::string text;  // UTF-8
    std::size_t page = 0;
    std::size_t offset = 0;  // within the page content
};

struct PdfPage {
    std::string content;
    std::vector<std::string> image_hashes;  // in drawing order
};

struct PdfDocument {
    std::vector<PdfPage> pages;
    std::map<std::string, PdfImage> images;  // by content hash
    std::vector<PdfSpan> spans;              // in page order
    std::string creation_date;
};

namespace pdf_detail {

inline std::string inflate(const std::string& data, std::size_t expected) {
    std::string out(expected, '\0');
    uLongf size = static_cast<uLongf>(expected);
    if (uncompress(reinterpret_cast<Bytef*>(out.data()), &size, reinterpret_cast<const Bytef*>(data.data()),
                   static_cast<uLong>(data.size())) != Z_OK)
        throw std::runtime_error("inflate failed");
    out.resize(size);
    return out;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

inline std::string decode_utf16_hex(const std::string& hex) {
    if (hex.size() % 4 != 0) throw std::runtime_error("odd UTF-16 hex string");
    std::vector<std::uint32_t> units;
    for (std::size_t i = 0; i < hex.size(); i += 4) units.push_back(std::stoul(hex.substr(i, 4), nullptr, 16));
    if (units.empty() || units[0] != 0xFEFF) throw std::runtime_error("missing BOM");
    std::string out;
    for (std::size_t i = 1; i < units.size(); ++i) {
        std::uint32_t u = units[i];
        if (u >= 0xD800 && u < 0xDC00 && i + 1 < units.size()) {
            u = 0x10000 + ((u - 0xD800) << 10) + (units[++i] - 0xDC00);
        }
        append_utf8(out, u);
    }
    return out;
}

struct RawObject {
    std::string dict;
    std::string stream;
};

inline int int_field(const std::string& dict, const std::string& key) {
    std::smatch m;
    if (!std::regex_search(dict, m, std::regex("/" + key + " (\\d+)"))) throw std::runtime_error("missing /" + key);
    return std::stoi(m[1]);
}

}  // namespace pdf_detail

inline PdfDocument inspect_pdf(const std::string& bytes) {
    using namespace pdf_detail;
    if (bytes.rfind("%PDF-1.", 0) != 0) throw std::runtime_error("bad header");
    if (bytes.size() < 6 || bytes.substr(bytes.size() - 6) != "%%EOF\n") throw std::runtime_error("missing %%EOF");

    auto sx = bytes.rfind("startxref\n");
    if (sx == std::string::npos) throw std::runtime_error("missing startxref");
    std::size_t xref = std::stoul(bytes.substr(sx + 10));
    if (bytes.compare(xref, 5, "xref\n") != 0) throw std::runtime_error("startxref does not point at xref");

    std::size_t pos = xref + 5;
    auto eol = bytes.find('\n', pos);
    std::string header = bytes.substr(pos, eol - pos);
    std::size_t count = std::stoul(header.substr(header.find(' ') + 1));
    pos = eol + 1;

    std::map<int, RawObject> objects;
    for (std::size_t n = 0; n < count; ++n, pos += 20) {
        std::string line = bytes.substr(pos, 20);
        if (n == 0) continue;
        if (line[17] != 'n') throw std::runtime_error("free object in use list");
        std::size_t off = std::stoul(line.substr(0, 10));
        std::string marker = std::to_string(n) + " 0 obj\n";
        if (bytes.compare(off, marker.size(), marker) != 0)
            throw std::runtime_error("xref offset mismatch for object " + std::to_string(n));
        std::size_t body = off + marker.size();
        RawObject obj;
        auto stream_at = bytes.find(">>\nstream\n", body);
        auto end_at = bytes.find("endobj\n", body);
        if (stream_at != std::string::npos && stream_at < end_at) {
            obj.dict = bytes.substr(body, stream_at + 2 - body);
            std::size_t len = static_cast<std::size_t>(int_field(obj.dict, "Length"));
            std::size_t data = stream_at + 10;
            obj.stream = bytes.substr(data, len);
            if (bytes.compare(data + len, 11, "\nendstream\n") != 0) throw std::runtime_error("bad stream length");
        } else {
            obj.dict = bytes.substr(body, end_at - body);
        }
        objects[static_cast<int>(n)] = obj;
    }

    PdfDocument doc;
    std::smatch m;
    for (const auto& [n, obj] : objects) {
        if (std::regex_search(obj.dict, m, std::regex("/CreationDate \\(D:(\\d+)\\)"))) doc.creation_date = m[1];
    }

    std::map<int, std::string> hash_by_obj;
    for (const auto& [n, obj] : objects) {
        if (obj.dict.find("/Subtype /Image") == std::string::npos) continue;
        PdfImage im;
        im.width = int_field(obj.dict, "Width");
        im.height = int_field(obj.dict, "Height");
        if (!std::regex_search(obj.dict, m, std::regex("/ContentHash \\(([^)]*)\\)")))
            throw std::runtime_error("image without ContentHash");
        im.content_hash = m[1];
        im.rgb = inflate(obj.stream, static_cast<std::size_t>(im.width) * im.height * 3);
        hash_by_obj[n] = im.content_hash;
        doc.images[im.content_hash] = im;
    }

    const auto& root = objects.at(2).dict;
    if (!std::regex_search(root, m, std::regex("/Kids \\[([^\\]]*)\\]"))) throw std::runtime_error("missing /Kids");
    std::string kids = m[1];
    std::regex ref_re("(\\d+) 0 R");
    for (auto it = std::sregex_iterator(kids.begin(), kids.end(), ref_re); it != std::sregex_iterator(); ++it) {
        const auto& page_obj = objects.at(std::stoi((*it)[1]));
        if (page_obj.dict.find("/Type /Page ") == std::string::npos) throw std::runtime_error("kid is not a page");
        std::smatch c;
        if (!std::regex_search(page_obj.dict, c, std::regex("/Contents (\\d+) 0 R")))
            throw std::runtime_error("page without contents");
        PdfPage page;
        page.content = objects.at(std::stoi(c[1])).stream;

        std::map<std::string, int> xobjects;
        std::regex xo_re("/(Im\\d+) (\\d+) 0 R");
        for (auto x = std::sregex_iterator(page_obj.dict.begin(), page_obj.dict.end(), xo_re);
             x != std::sregex_iterator(); ++x)
            xobjects[(*x)[1]] = std::stoi((*x)[2]);
        std::regex do_re("/(Im\\d+) Do");
        for (auto d = std::sregex_iterator(page.content.begin(), page.content.end(), do_re);
             d != std::sregex_iterator(); ++d)
            page.image_hashes.push_back(hash_by_obj.at(xobjects.at((*d)[1])));

        // Scanned by hand: std::regex recurses per character and long
        // ActualText strings overflow the stack.
        for (std::string tag : {"Narrative", "Caption"}) {
            std::string open = "/" + tag + " <</ActualText <";
            for (auto at = page.content.find(open); at != std::string::npos; at = page.content.find(open, at + 1)) {
                auto start = at + open.size();
                auto end = page.content.find(">>> BDC", start);
                if (end == std::string::npos) throw std::runtime_error("unterminated span");
                doc.spans.push_back({tag, decode_utf16_hex(page.content.substr(start, end - start)), doc.pages.size(), at});
            }
        }
        std::sort(doc.spans.begin(), doc.spans.end(), [](const PdfSpan& a, const PdfSpan& b) {
            return std::tie(a.page, a.offset) < std::tie(b.page, b.offset);
        });
        doc.pages.push_back(std::move(page));
    }
    if (int_field(root, "Count") != static_cast<int>(doc.pages.size())) throw std::runtime_error("/Count mismatch");
    return doc;
}

// Blanks the export date (title page text and CreationDate) so two exports
// taken on different days can be byte-compared.
inline std::string normalize_export_date(std::string bytes) {
    bytes = std::regex_replace(bytes, std::regex("\\(Exported \\d{4}-\\d{2}-\\d{2}\\)"), "(Exported YYYY-MM-DD)");
    bytes = std::regex_replace(bytes, std::regex("/CreationDate \\(D:\\d{8}\\)"), "/CreationDate (D:YYYYMMDD)");
    return bytes;
}

}  // namespace remi::test
