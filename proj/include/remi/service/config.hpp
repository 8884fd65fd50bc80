#pragma once

#include "remi/conversation/engine.hpp"
#include "remi/generation/generator.hpp"
#include "remi/knowledge/fetch.hpp"
#include "remi/providers/registry.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace remi::service {

struct ServiceConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path resource_dir = REMI_RESOURCE_DIR;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t workers = 2;
    std::string log_level = "warn";
    providers::ProvidersConfig providers;
    conversation::ConversationConfig conversation;
    generation::GenerationConfig generation;
    knowledge::KnowledgeLimits knowledge;
    std::optional<knowledge::EncyclopediaConfig> encyclopedia;  // title fetch disabled when unset
};

// Config file layout (all keys optional):
//   {"data_dir", "resource_dir", "host", "port", "workers", "log_level",
//    "providers": {...},
//    "conversation": {"entity_threshold", "turn_threshold", "context_turns", "k", "max_turn_chars"},
//    "generation": {"image_width", "image_height", "embellishment_budget", "k"},
//    "knowledge": {"max_fact_chars", "max_facts"},
//    "encyclopedia": {"base_url", "path_template", "timeout_ms"}}
// Relative paths resolve against the config file's directory.
// Throws Error(validation) listing every bad field.
ServiceConfig parse_config(const json& j, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// REMI_DATA_DIR, REMI_RESOURCE_DIR, REMI_HOST, REMI_PORT, REMI_WORKERS,
// REMI_LOG_LEVEL, REMI_PROVIDERS_MODE.
void apply_env(ServiceConfig& config, const EnvLookup& env = process_env());

json describe(const ServiceConfig& config);

}  // namespace remi::service
