#include "remi/service/config.hpp"

#include "remi/core/store.hpp"

#include <cstdlib>

namespace remi::service {

namespace {

class Reader {
public:
    Reader(const json& j, std::string prefix, std::vector<FieldError>& errors)
        : j_(j), prefix_(std::move(prefix)), errors_(errors) {}

    template <typename T>
    void read(const char* key, T& out) {
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back({prefix_ + key, "invalid", "wrong type"});
        }
    }

    void positive(const char* key, std::size_t& out) {
        long long v = static_cast<long long>(out);
        read(key, v);
        if (v <= 0)
            errors_.push_back({prefix_ + key, "invalid", "must be positive"});
        else
            out = static_cast<std::size_t>(v);
    }

    void positive(const char* key, int& out) {
        read(key, out);
        if (out <= 0) errors_.push_back({prefix_ + key, "invalid", "must be positive"});
    }

private:
    const json& j_;
    std::string prefix_;
    std::vector<FieldError>& errors_;
};

const json& section(const json& j, const char* key, std::vector<FieldError>& errors) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j[key].is_object()) {
        errors.push_back({key, "invalid", "must be an object"});
        return empty;
    }
    return j[key];
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

void check_live(const ServiceConfig& config) {
    if (config.providers.mode == "mock") return;
    std::vector<FieldError> errors;
    if (config.providers.mode != "live") errors.push_back({"providers.mode", "invalid", "mode must be 'mock' or 'live'"});
    for (auto cap : providers::kCapabilities) {
        auto it = config.providers.bindings.find(std::string(cap));
        if (it == config.providers.bindings.end() || it->second.endpoint.empty())
            errors.push_back({"providers." + std::string(cap) + ".endpoint", "missing", "live mode needs an endpoint"});
    }
    if (!errors.empty()) throw Error(ErrorCode::validation, "invalid providers config", std::move(errors));
}

}  // namespace

ServiceConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::validation, "config must be a JSON object");
    ServiceConfig config;
    std::vector<FieldError> errors;

    Reader top(j, "", errors);
    std::string data_dir, resource_dir;
    top.read("data_dir", data_dir);
    top.read("resource_dir", resource_dir);
    if (!data_dir.empty()) config.data_dir = resolve(base_dir, data_dir);
    if (!resource_dir.empty()) config.resource_dir = resolve(base_dir, resource_dir);
    top.read("host", config.host);
    top.read("port", config.port);
    if (config.port < 0 || config.port > 65535) errors.push_back({"port", "invalid", "must be 0..65535"});
    top.positive("workers", config.workers);
    top.read("log_level", config.log_level);

    try {
        config.providers = providers::parse_providers_config(j.value("providers", json::object()));
    } catch (const Error& e) {
        errors.insert(errors.end(), e.fields().begin(), e.fields().end());
        if (e.fields().empty()) errors.push_back({"providers", "invalid", e.what()});
    }

    Reader conv(section(j, "conversation", errors), "conversation.", errors);
    conv.positive("entity_threshold", config.conversation.readiness.entity_threshold);
    conv.positive("turn_threshold", config.conversation.readiness.turn_threshold);
    conv.positive("context_turns", config.conversation.context_turns);
    conv.positive("k", config.conversation.k);
    conv.positive("max_turn_chars", config.conversation.max_turn_chars);
    config.conversation.retry = config.providers.bindings.count("chat") ? config.providers.bindings["chat"].retry
                                                                       : providers::RetryPolicy{};

    Reader gen(section(j, "generation", errors), "generation.", errors);
    gen.positive("image_width", config.generation.image_width);
    gen.positive("image_height", config.generation.image_height);
    gen.read("embellishment_budget", config.generation.embellishment_budget);
    if (config.generation.embellishment_budget < 0)
        errors.push_back({"generation.embellishment_budget", "invalid", "must be >= 0"});
    gen.positive("k", config.generation.k);

    Reader kb(section(j, "knowledge", errors), "knowledge.", errors);
    kb.positive("max_fact_chars", config.knowledge.max_fact_chars);
    kb.positive("max_facts", config.knowledge.max_facts);

    if (j.contains("encyclopedia")) {
        const auto& e = section(j, "encyclopedia", errors);
        knowledge::EncyclopediaConfig enc;
        Reader r(e, "encyclopedia.", errors);
        r.read("base_url", enc.base_url);
        r.read("path_template", enc.path_template);
        int timeout_ms = static_cast<int>(enc.timeout.count());
        r.positive("timeout_ms", timeout_ms);
        enc.timeout = std::chrono::milliseconds(timeout_ms);
        if (enc.base_url.empty()) errors.push_back({"encyclopedia.base_url", "missing", "required"});
        config.encyclopedia = enc;
    }

    if (!errors.empty()) throw Error(ErrorCode::validation, "invalid config", std::move(errors));
    return config;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::io, "cannot read config " + path.string() + ": " + e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::validation, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j, path.parent_path());
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str()); v && *v) return std::string(v);
        return std::nullopt;
    };
}

void apply_env(ServiceConfig& config, const EnvLookup& env) {
    std::vector<FieldError> errors;
    auto number = [&](const char* name, auto& out) {
        auto v = env(name);
        if (!v) return;
        try {
            std::size_t used = 0;
            long long n = std::stoll(*v, &used);
            if (used != v->size() || n < 0) throw std::invalid_argument(*v);
            out = static_cast<std::remove_reference_t<decltype(out)>>(n);
        } catch (const std::exception&) {
            errors.push_back({name, "invalid", "not a number: " + *v});
        }
    };
    if (auto v = env("REMI_DATA_DIR")) config.data_dir = *v;
    if (auto v = env("REMI_RESOURCE_DIR")) config.resource_dir = *v;
    if (auto v = env("REMI_HOST")) config.host = *v;
    number("REMI_PORT", config.port);
    number("REMI_WORKERS", config.workers);
    if (config.workers == 0) errors.push_back({"REMI_WORKERS", "invalid", "must be positive"});
    if (auto v = env("REMI_LOG_LEVEL")) config.log_level = *v;
    if (auto v = env("REMI_PROVIDERS_MODE")) {
        config.providers.mode = *v;
        for (auto& [cap, b] : config.providers.bindings)
            if (b.provider_id == "mock" || b.provider_id == "http") b.provider_id = *v == "mock" ? "mock" : "http";
    }
    if (!errors.empty()) throw Error(ErrorCode::validation, "invalid environment override", std::move(errors));
    check_live(config);
}

json describe(const ServiceConfig& config) {
    json out{{"data_dir", config.data_dir.string()},
             {"resource_dir", config.resource_dir.string()},
             {"host", config.host},
             {"port", config.port},
             {"workers", config.workers},
             {"log_level", config.log_level},
             {"providers", providers::describe(config.providers)},
             {"conversation",
              {{"entity_threshold", config.conversation.readiness.entity_threshold},
               {"turn_threshold", config.conversation.readiness.turn_threshold},
               {"context_turns", config.conversation.context_turns},
               {"k", config.conversation.k},
               {"max_turn_chars", config.conversation.max_turn_chars}}},
             {"generation",
              {{"image_width", config.generation.image_width},
               {"image_height", config.generation.image_height},
               {"embellishment_budget", config.generation.embellishment_budget},
               {"k", config.generation.k}}}};
    if (config.encyclopedia) out["encyclopedia"] = {{"base_url", config.encyclopedia->base_url}};
    return out;
}

}  // namespace remi::service
