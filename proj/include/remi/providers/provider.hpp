#pragma once

// Capability interfaces for model providers. The service talks only to these;
// concrete bindings are mocks (deterministic, offline) or HTTP clients.

#include "remi/media/image.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace remi::providers {

enum class FailureKind { timeout, client_error, server_error, unavailable, bad_response };

std::string_view to_string(FailureKind kind);

class ProviderError : public std::runtime_error {
public:
    ProviderError(FailureKind kind, const std::string& message, int http_status = 0)
        : std::runtime_error(message), kind_(kind), http_status_(http_status) {}

    FailureKind kind() const noexcept { return kind_; }
    int http_status() const noexcept { return http_status_; }

private:
    FailureKind kind_;
    int http_status_;
};

class CancelToken {
public:
    void cancel() {
        {
            std::lock_guard lock(mutex_);
            cancelled_ = true;
        }
        cv_.notify_all();
    }
    bool cancelled() const {
        std::lock_guard lock(mutex_);
        return cancelled_;
    }
    // True when cancelled before the timeout elapsed.
    bool wait_for(std::chrono::milliseconds timeout) const {
        std::unique_lock lock(mutex_);
        return cv_.wait_for(lock, timeout, [&] { return cancelled_; });
    }

private:
    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    bool cancelled_ = false;
};

// ---------------------------------------------------------------------------
// Chat
// ---------------------------------------------------------------------------

enum class ChatPurpose { conversation, summary, distillation, narrative };

std::string_view to_string(ChatPurpose purpose);

struct ChatMessage {
    std::string role;  // "user" | "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    ChatPurpose purpose = ChatPurpose::conversation;
    std::string system_prompt;
    std::vector<ChatMessage> messages;
    bool stream = true;
    // Structured side inputs (detected entities, required details). Live
    // models read the prompt; mocks build their output from these.
    std::vector<std::string> hints;
};

enum class StreamEnd { completed, cancelled };

using ChunkSink = std::function<void(std::string_view chunk)>;

class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    // Delivers text chunks in order. Failures throw ProviderError; chunks
    // already delivered stand. Returns cancelled once the token fires.
    virtual StreamEnd stream(const ChatRequest& request, const ChunkSink& sink, const CancelToken& cancel) = 0;

    // Whole reply, for non-interactive purposes.
    std::string complete(const ChatRequest& request);
};

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

class ImageGenProvider {
public:
    virtual ~ImageGenProvider() = default;
    virtual media::Image generate(const std::string& prompt, int width, int height) = 0;
};

class ImageEditProvider {
public:
    virtual ~ImageEditProvider() = default;
    // mask: one byte per pixel, nonzero where the edit applies.
    virtual media::Image edit(const media::Image& image, const std::vector<std::uint8_t>& mask,
                              const std::string& instruction) = 0;
};

// ---------------------------------------------------------------------------
// Speech
// ---------------------------------------------------------------------------

struct VoiceProfile {
    std::string id;
    std::string description;
    int pitch_hz = 0;
    double rate = 1.0;
};

inline constexpr std::string_view kDefaultVoice = "gentle_elder_female";

const std::vector<VoiceProfile>& voice_profiles();

struct VoiceResolution {
    VoiceProfile profile;
    std::optional<std::string> warning;  // set when falling back to the default
};

// Empty request selects the default silently; unknown ids fall back with a warning.
VoiceResolution resolve_voice(std::string_view requested);

class TranscribeProvider {
public:
    virtual ~TranscribeProvider() = default;
    virtual std::string transcribe(std::string_view audio, const std::string& locale) = 0;
};

class SynthesizeProvider {
public:
    virtual ~SynthesizeProvider() = default;
    // Returns encoded audio (WAV or MP3, provider-native).
    virtual std::string synthesize(const std::string& text, const VoiceProfile& voice) = 0;
};

// ---------------------------------------------------------------------------
// Retry
// ---------------------------------------------------------------------------

// Retries only timeouts; client (4xx) and server errors surface immediately.
struct RetryPolicy {
    int timeout_retries = 1;
    std::chrono::milliseconds backoff{0};
};

template <typename F>
auto with_retry(const RetryPolicy& policy, F&& call) -> decltype(call()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return call();
        } catch (const ProviderError& e) {
            if (e.kind() != FailureKind::timeout || attempt >= policy.timeout_retries) throw;
            if (policy.backoff.count() > 0) std::this_thread::sleep_for(policy.backoff);
        }
    }
}

}  // namespace remi::providers
