#include "remi/text/template.hpp"

#include "remi/core/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace remi::text {

namespace {

struct Lexeme {
    enum class Kind { text, slot, open, open_inverted, close } kind;
    std::string value;
};

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string trim_name(std::string_view s) {
    auto b = s.find_first_not_of(' ');
    auto e = s.find_last_not_of(' ');
    if (b == std::string_view::npos) return {};
    return std::string(s.substr(b, e - b + 1));
}

std::vector<Lexeme> lex(std::string_view src, const std::string& name) {
    std::vector<Lexeme> out;
    std::string pending;
    std::size_t i = 0;
    while (i < src.size()) {
        auto open = src.find("{{", i);
        if (open == std::string_view::npos) {
            pending.append(src.substr(i));
            break;
        }
        auto close = src.find("}}", open + 2);
        if (close == std::string_view::npos)
            throw Error(ErrorCode::validation, name + ": unterminated tag at byte " + std::to_string(open));
        std::string_view body = src.substr(open + 2, close - open - 2);
        std::size_t after = close + 2;
        char sigil = body.empty() ? '\0' : body.front();
        bool is_section = sigil == '#' || sigil == '^' || sigil == '/';

        std::string_view before = src.substr(i, open - i);
        if (is_section) {
            // Standalone: only whitespace between the line start and the tag,
            // and between the tag and the line end.
            auto nl = open == 0 ? std::string_view::npos : src.rfind('\n', open - 1);
            std::size_t line_start = nl == std::string_view::npos ? 0 : nl + 1;
            auto line_end = src.find('\n', after);
            std::string_view lead = src.substr(line_start, open - line_start);
            std::string_view trail =
                src.substr(after, (line_end == std::string_view::npos ? src.size() : line_end) - after);
            bool line_start_in_segment = line_start >= i;
            if (blank(lead) && blank(trail) && line_start_in_segment) {
                before = src.substr(i, line_start - i);
                after = line_end == std::string_view::npos ? src.size() : line_end + 1;
            }
        }
        pending.append(before);
        if (!pending.empty()) out.push_back({Lexeme::Kind::text, std::move(pending)});
        pending.clear();

        std::string tag = trim_name(is_section ? body.substr(1) : body);
        if (tag.empty()) throw Error(ErrorCode::validation, name + ": empty tag");
        switch (sigil) {
            case '#': out.push_back({Lexeme::Kind::open, tag}); break;
            case '^': out.push_back({Lexeme::Kind::open_inverted, tag}); break;
            case '/': out.push_back({Lexeme::Kind::close, tag}); break;
            default: out.push_back({Lexeme::Kind::slot, tag}); break;
        }
        i = after;
    }
    if (!pending.empty()) out.push_back({Lexeme::Kind::text, std::move(pending)});
    return out;
}

using Node = Template::Node;

void render_nodes(const std::vector<Node>& nodes, const Slots& slots, const std::string& name, std::string& out) {
    for (const auto& n : nodes) {
        switch (n.kind) {
            case Node::Kind::text: out += n.value; break;
            case Node::Kind::slot: {
                auto it = slots.find(n.value);
                if (it == slots.end())
                    throw Error(ErrorCode::validation, name + ": unbound slot '" + n.value + "'");
                out += it->second;
                break;
            }
            case Node::Kind::section:
            case Node::Kind::inverted: {
                auto it = slots.find(n.value);
                bool present = it != slots.end() && !it->second.empty();
                if (present == (n.kind == Node::Kind::section)) render_nodes(n.children, slots, name, out);
                break;
            }
        }
    }
}

void collect_names(const std::vector<Node>& nodes, std::set<std::string>& names) {
    for (const auto& n : nodes) {
        if (n.kind != Node::Kind::text) names.insert(n.value);
        collect_names(n.children, names);
    }
}

}  // namespace

Template Template::parse(std::string_view source, std::string name) {
    Template t;
    t.name_ = std::move(name);

    // Strip "##!" header lines.
    std::string body;
    std::istringstream in{std::string(source)};
    std::string line;
    bool first = true;
    bool trailing_newline = !source.empty() && source.back() == '\n';
    while (std::getline(in, line)) {
        if (line.rfind("##!", 0) == 0) {
            auto colon = line.find(':');
            if (colon != std::string::npos)
                t.headers_[trim_name(line.substr(3, colon - 3))] = trim_name(line.substr(colon + 1));
            continue;
        }
        if (!first) body += '\n';
        body += line;
        first = false;
    }
    if (trailing_newline && !body.empty()) body += '\n';

    auto lexemes = lex(body, t.name_);
    std::vector<Node> root;
    std::vector<std::vector<Node>*> stack{&root};
    std::vector<std::string> open_names;
    for (auto& lx : lexemes) {
        switch (lx.kind) {
            case Lexeme::Kind::text: stack.back()->push_back({Node::Kind::text, std::move(lx.value), {}}); break;
            case Lexeme::Kind::slot: stack.back()->push_back({Node::Kind::slot, std::move(lx.value), {}}); break;
            case Lexeme::Kind::open:
            case Lexeme::Kind::open_inverted: {
                auto kind = lx.kind == Lexeme::Kind::open ? Node::Kind::section : Node::Kind::inverted;
                stack.back()->push_back({kind, lx.value, {}});
                stack.push_back(&stack.back()->back().children);
                open_names.push_back(lx.value);
                break;
            }
            case Lexeme::Kind::close:
                if (open_names.empty() || open_names.back() != lx.value)
                    throw Error(ErrorCode::validation, t.name_ + ": unmatched {{/" + lx.value + "}}");
                open_names.pop_back();
                stack.pop_back();
                break;
        }
    }
    if (!open_names.empty())
        throw Error(ErrorCode::validation, t.name_ + ": unclosed section '" + open_names.back() + "'");
    t.nodes_ = std::make_shared<const std::vector<Node>>(std::move(root));
    return t;
}

std::string Template::render(const Slots& slots) const {
    std::string out;
    render_nodes(*nodes_, slots, name_, out);
    return out;
}

std::string Template::header(std::string_view key) const {
    auto it = headers_.find(key);
    return it == headers_.end() ? std::string() : it->second;
}

std::vector<std::string> Template::slot_names() const {
    std::set<std::string> names;
    collect_names(*nodes_, names);
    return {names.begin(), names.end()};
}

}  // namespace remi::text
