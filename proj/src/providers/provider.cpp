#include "remi/providers/provider.hpp"

#include <algorithm>

namespace remi::providers {

std::string_view to_string(FailureKind kind) {
    switch (kind) {
        case FailureKind::timeout: return "timeout";
        case FailureKind::client_error: return "client_error";
        case FailureKind::server_error: return "server_error";
        case FailureKind::unavailable: return "unavailable";
        case FailureKind::bad_response: return "bad_response";
    }
    return "unknown";
}

std::string_view to_string(ChatPurpose purpose) {
    switch (purpose) {
        case ChatPurpose::conversation: return "conversation";
        case ChatPurpose::summary: return "summary";
        case ChatPurpose::distillation: return "distillation";
        case ChatPurpose::narrative: return "narrative";
    }
    return "conversation";
}

std::string ChatProvider::complete(const ChatRequest& request) {
    std::string out;
    CancelToken never;
    ChatRequest r = request;
    r.stream = false;
    stream(r, [&](std::string_view chunk) { out.append(chunk); }, never);
    return out;
}

const std::vector<VoiceProfile>& voice_profiles() {
    static const std::vector<VoiceProfile> profiles{
        {"gentle_elder_female", "gentle, slow, older female voice", 210, 0.85},
        {"gentle_elder_male", "gentle, slow, older male voice", 120, 0.85},
        {"warm_adult_female", "warm adult female voice", 230, 1.0},
        {"warm_adult_male", "warm adult male voice", 130, 1.0},
    };
    return profiles;
}

VoiceResolution resolve_voice(std::string_view requested) {
    const auto& all = voice_profiles();
    auto by_id = [&](std::string_view id) {
        return std::find_if(all.begin(), all.end(), [&](const VoiceProfile& v) { return v.id == id; });
    };
    if (requested.empty()) return {*by_id(kDefaultVoice), std::nullopt};
    if (auto it = by_id(requested); it != all.end()) return {*it, std::nullopt};
    return {*by_id(kDefaultVoice),
            "unknown voice profile '" + std::string(requested) + "', using " + std::string(kDefaultVoice)};
}

}  // namespace remi::providers
