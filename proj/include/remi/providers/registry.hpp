#pragma once

#include "remi/core/json.hpp"
#include "remi/providers/mock.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace remi::providers {

inline constexpr std::array<std::string_view, 5> kCapabilities{"chat", "image_gen", "image_edit", "transcribe",
                                                               "synthesize"};

struct ProviderBinding {
    std::string provider_id;  // "mock" or a label for the live service
    std::string endpoint;     // base URL, live mode only
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
    std::string api_key;
};

// `providers` section of the service config:
//   {"mode": "mock" | "live",
//    "<capability>": {"provider_id", "endpoint", "timeout_ms", "timeout_retries", "api_key_env"}}
// Live mode requires an endpoint for every capability.
struct ProvidersConfig {
    std::string mode = "mock";
    std::map<std::string, ProviderBinding> bindings;
};

ProvidersConfig parse_providers_config(const json& j);
json describe(const ProvidersConfig& config);  // no secrets

struct MockProviders {
    std::shared_ptr<MockChatProvider> chat;
    std::shared_ptr<MockImageGenProvider> image_gen;
    std::shared_ptr<MockImageEditProvider> image_edit;
    std::shared_ptr<MockTranscribeProvider> transcribe;
    std::shared_ptr<MockSynthesizeProvider> synthesize;
};

MockProviders make_mock_providers(const std::filesystem::path& resource_dir);

// Exactly one active binding per capability.
struct ProviderRegistry {
    std::string mode;
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<ImageGenProvider> image_gen;
    std::shared_ptr<ImageEditProvider> image_edit;
    std::shared_ptr<TranscribeProvider> transcribe;
    std::shared_ptr<SynthesizeProvider> synthesize;
    std::map<std::string, ProviderBinding> bindings;
    std::optional<MockProviders> mocks;  // set in mock mode

    RetryPolicy retry(std::string_view capability) const;

    static ProviderRegistry from_mocks(MockProviders mocks);
    static ProviderRegistry from_config(const ProvidersConfig& config, const std::filesystem::path& resource_dir);
};

}  // namespace remi::providers
