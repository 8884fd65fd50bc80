#include "remi/knowledge/fetch.hpp"

#include "remi/text/tokenize.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

namespace remi::knowledge {

namespace {

std::string lower(std::string_view s) { return text::to_lower(s); }

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x110000) {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::string decode_entities(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        std::string name(s.substr(i + 1, semi - i - 1));
        if (!name.empty() && name[0] == '#') {
            bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
            try {
                unsigned long cp = std::stoul(name.substr(hex ? 2 : 1), nullptr, hex ? 16 : 10);
                append_utf8(out, cp);
                i = semi;
                continue;
            } catch (const std::exception&) {
            }
        }
        static const std::pair<const char*, const char*> named[] = {
            {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "},
            {"mdash", "\xE2\x80\x94"}, {"ndash", "\xE2\x80\x93"}, {"hellip", "\xE2\x80\xA6"}};
        bool matched = false;
        for (const auto& [n, v] : named)
            if (name == n) {
                out += v;
                matched = true;
            }
        if (matched)
            i = semi;
        else
            out += '&';
    }
    return out;
}

bool is_block(std::string_view tag) {
    static constexpr std::string_view blocks[] = {"p",  "div", "br", "li", "ul", "ol", "h1",    "h2",      "h3",
                                                  "h4", "h5",  "h6", "tr", "table", "section", "article", "blockquote"};
    return std::find(std::begin(blocks), std::end(blocks), tag) != std::end(blocks);
}

}  // namespace

std::string strip_html(std::string_view html) {
    std::string text;
    std::string lowered = lower(html);
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            text += html[i++];
            continue;
        }
        if (lowered.compare(i, 4, "<!--") == 0) {
            auto end = lowered.find("-->", i + 4);
            i = end == std::string::npos ? html.size() : end + 3;
            continue;
        }
        auto close = html.find('>', i);
        if (close == std::string_view::npos) break;
        std::string_view tag_body = std::string_view(lowered).substr(i + 1, close - i - 1);
        bool closing = !tag_body.empty() && tag_body[0] == '/';
        if (closing) tag_body.remove_prefix(1);
        auto name_end = tag_body.find_first_of(" \t\r\n/>");
        std::string name(tag_body.substr(0, name_end));
        if (!closing && (name == "script" || name == "style")) {
            auto end = lowered.find("</" + name, close);
            if (end == std::string::npos) break;
            auto end_close = lowered.find('>', end);
            i = end_close == std::string::npos ? html.size() : end_close + 1;
            continue;
        }
        text += is_block(name) ? "\n\n" : " ";
        i = close + 1;
    }
    text = decode_entities(text);

    // Normalize: collapse whitespace inside paragraphs, one blank line between.
    std::string out;
    std::size_t p = 0;
    while (p <= text.size()) {
        auto next = text.find("\n\n", p);
        std::string para = text::collapse_whitespace(
            std::string_view(text).substr(p, next == std::string::npos ? std::string::npos : next - p));
        if (!para.empty()) {
            if (!out.empty()) out += "\n\n";
            out += para;
        }
        if (next == std::string::npos) break;
        p = next + 2;
    }
    return out;
}

std::string url_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

Document EncyclopediaClient::fetch(const std::string& title) const {
    if (title.empty()) throw Error(ErrorCode::validation, "title must not be empty");
    std::string path = config_.path_template;
    if (auto pos = path.find("{title}"); pos != std::string::npos) path.replace(pos, 7, url_encode(title));

    httplib::Client client(config_.base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    auto res = client.Get(path);
    if (!res) throw Error(ErrorCode::provider, "encyclopedia fetch failed: " + httplib::to_string(res.error()));
    if (res->status == 404) throw_not_found("encyclopedia page '" + title + "'");
    if (res->status >= 400)
        throw Error(ErrorCode::provider, "encyclopedia returned HTTP " + std::to_string(res->status));
    return Document{"enc:" + title, title, strip_html(res->body)};
}

}  // namespace remi::knowledge
