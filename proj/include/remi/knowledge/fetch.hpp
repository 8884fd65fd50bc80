#pragma once

#include "remi/knowledge/knowledge.hpp"

#include <chrono>
#include <string>
#include <string_view>

namespace remi::knowledge {

// Markup to plain text: drops script/style/comments, turns block elements
// into paragraph breaks, decodes character references.
std::string strip_html(std::string_view html);

struct EncyclopediaConfig {
    std::string base_url;                      // "http://host:port"
    std::string path_template = "/wiki/{title}";
    std::chrono::milliseconds timeout{5000};
};

// Optional source client. Runs outside ingest so the knowledge store never
// touches the network; results feed KnowledgeStore::ingest.
class EncyclopediaClient {
public:
    explicit EncyclopediaClient(EncyclopediaConfig config) : config_(std::move(config)) {}

    // doc_id is "enc:" + title. Throws Error(provider) on transport or HTTP
    // failure, Error(not_found) on 404.
    Document fetch(const std::string& title) const;

private:
    EncyclopediaConfig config_;
};

std::string url_encode(std::string_view s);

}  // namespace remi::knowledge
