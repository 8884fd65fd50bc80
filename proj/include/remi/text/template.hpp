#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace remi::text {

using Slots = std::map<std::string, std::string, std::less<>>;

// Plain-text prompt template with named slots.
//
//   {{name}}              substituted; an unbound slot is an error
//   {{#name}} ... {{/name}}  kept only when `name` is bound and non-empty
//   {{^name}} ... {{/name}}  kept only when `name` is unbound or empty
//   ##! key: value        header line (e.g. "##! version: v1"), not rendered
//
// A section tag alone on its line consumes that line, so elided sections
// leave no blank lines behind.
class Template {
public:
    static Template parse(std::string_view source, std::string name = "template");

    std::string render(const Slots& slots) const;

    const std::string& name() const { return name_; }
    // Header value, or empty.
    std::string header(std::string_view key) const;
    // Every slot referenced by a substitution or section tag.
    std::vector<std::string> slot_names() const;

    struct Node;

private:
    std::string name_;
    std::map<std::string, std::string, std::less<>> headers_;
    std::shared_ptr<const std::vector<Node>> nodes_;
};

struct Template::Node {
    enum class Kind { text, slot, section, inverted } kind = Kind::text;
    std::string value;  // literal text or slot name
    std::vector<Node> children;
};

}  // namespace remi::text
