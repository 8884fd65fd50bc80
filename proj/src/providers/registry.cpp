#include "remi/providers/registry.hpp"

#include "remi/providers/http.hpp"

#include <cstdlib>

namespace remi::providers {

ProvidersConfig parse_providers_config(const json& j) {
    ProvidersConfig config;
    std::vector<FieldError> errors;
    if (!j.is_object()) throw Error(ErrorCode::validation, "providers config must be an object");
    config.mode = j.value("mode", std::string("mock"));
    if (config.mode != "mock" && config.mode != "live")
        errors.push_back({"providers.mode", "invalid", "mode must be 'mock' or 'live'"});
    for (auto cap : kCapabilities) {
        std::string key(cap);
        ProviderBinding b;
        b.provider_id = config.mode == "mock" ? "mock" : "http";
        if (j.contains(key)) {
            const auto& c = j[key];
            if (!c.is_object()) {
                errors.push_back({"providers." + key, "invalid", "binding must be an object"});
                continue;
            }
            b.provider_id = c.value("provider_id", b.provider_id);
            b.endpoint = c.value("endpoint", std::string());
            b.timeout = std::chrono::milliseconds(c.value("timeout_ms", 30000));
            b.retry.timeout_retries = c.value("timeout_retries", 1);
            if (auto env = c.value("api_key_env", std::string()); !env.empty())
                if (const char* v = std::getenv(env.c_str())) b.api_key = v;
            if (b.timeout.count() <= 0)
                errors.push_back({"providers." + key + ".timeout_ms", "invalid", "timeout must be positive"});
            if (b.retry.timeout_retries < 0)
                errors.push_back({"providers." + key + ".timeout_retries", "invalid", "retries must be >= 0"});
        }
        if (config.mode == "live" && b.endpoint.empty())
            errors.push_back({"providers." + key + ".endpoint", "missing", "live mode needs an endpoint"});
        config.bindings[key] = b;
    }
    if (!errors.empty()) throw Error(ErrorCode::validation, "invalid providers config", std::move(errors));
    return config;
}

json describe(const ProvidersConfig& config) {
    json out{{"mode", config.mode}};
    for (const auto& [cap, b] : config.bindings)
        out[cap] = {{"provider_id", b.provider_id},
                    {"endpoint", b.endpoint},
                    {"timeout_ms", b.timeout.count()},
                    {"timeout_retries", b.retry.timeout_retries}};
    return out;
}

MockProviders make_mock_providers(const std::filesystem::path& resource_dir) {
    return MockProviders{std::make_shared<MockChatProvider>(), std::make_shared<MockImageGenProvider>(),
                         std::make_shared<MockImageEditProvider>(),
                         std::make_shared<MockTranscribeProvider>(MockTranscribeProvider::load(resource_dir)),
                         std::make_shared<MockSynthesizeProvider>()};
}

RetryPolicy ProviderRegistry::retry(std::string_view capability) const {
    auto it = bindings.find(std::string(capability));
    return it == bindings.end() ? RetryPolicy{} : it->second.retry;
}

ProviderRegistry ProviderRegistry::from_mocks(MockProviders mocks) {
    ProviderRegistry r;
    r.mode = "mock";
    r.chat = mocks.chat;
    r.image_gen = mocks.image_gen;
    r.image_edit = mocks.image_edit;
    r.transcribe = mocks.transcribe;
    r.synthesize = mocks.synthesize;
    for (auto cap : kCapabilities) r.bindings[std::string(cap)] = ProviderBinding{"mock", "", {}, {}, ""};
    r.mocks = std::move(mocks);
    return r;
}

ProviderRegistry ProviderRegistry::from_config(const ProvidersConfig& config, const std::filesystem::path& resource_dir) {
    if (config.mode == "mock") {
        auto r = from_mocks(make_mock_providers(resource_dir));
        for (const auto& [cap, b] : config.bindings) r.bindings[cap].retry = b.retry;
        return r;
    }
    auto endpoint = [&](const char* cap) {
        const auto& b = config.bindings.at(cap);
        return HttpEndpoint{b.endpoint, b.timeout, b.api_key};
    };
    ProviderRegistry r;
    r.mode = config.mode;
    r.chat = std::make_shared<HttpChatProvider>(endpoint("chat"));
    r.image_gen = std::make_shared<HttpImageGenProvider>(endpoint("image_gen"));
    r.image_edit = std::make_shared<HttpImageEditProvider>(endpoint("image_edit"));
    r.transcribe = std::make_shared<HttpTranscribeProvider>(endpoint("transcribe"));
    r.synthesize = std::make_shared<HttpSynthesizeProvider>(endpoint("synthesize"));
    r.bindings = config.bindings;
    return r;
}

}  // namespace remi::providers
