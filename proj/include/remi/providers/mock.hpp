#pragma once

#include "remi/providers/provider.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

namespace remi::providers {

// Scripted chat behavior. Conversation replies are picked by the number of
// user messages in the request (1-based; the last reply repeats).
struct MockChatScript {
    std::vector<std::string> replies;
    bool echo = false;  // reply with the last user message verbatim
    std::size_t chunk_size = 12;  // bytes, widened to keep UTF-8 sequences whole
    std::chrono::milliseconds chunk_delay{0};
    // After this many chunks: throw ProviderError(fail_kind).
    std::optional<std::size_t> fail_after_chunks;
    FailureKind fail_kind = FailureKind::server_error;
    // After this many chunks: block until the request is cancelled.
    std::optional<std::size_t> hold_after_chunks;
    // Non-conversation purposes (summary, distillation, narrative) fail.
    std::optional<FailureKind> fail_auxiliary;
};

class MockChatProvider final : public ChatProvider {
public:
    explicit MockChatProvider(MockChatScript script = {}) : script_(std::move(script)) {}

    StreamEnd stream(const ChatRequest& request, const ChunkSink& sink, const CancelToken& cancel) override;

    void set_script(MockChatScript script);
    MockChatScript script() const;

    // Requests seen so far (most recent last), for contract tests.
    std::vector<ChatRequest> requests() const;
    std::size_t request_count() const;

    // What a request produces, before chunking.
    std::string reply_for(const ChatRequest& request) const;

    static std::string default_reply(std::size_t user_messages);
    static std::vector<std::string> split_chunks(std::string_view text, std::size_t chunk_size);

private:
    mutable std::mutex mutex_;
    MockChatScript script_;
    std::vector<ChatRequest> requests_;
};

// Deterministic images derived from the SHA-256 of the prompt.
class MockImageGenProvider final : public ImageGenProvider {
public:
    media::Image generate(const std::string& prompt, int width, int height) override;

    // The next `count` calls throw ProviderError(kind).
    void fail_next(FailureKind kind, int count = 1);
    int calls() const { return calls_; }

    static media::Image render(std::string_view prompt, int width, int height);

private:
    std::mutex mutex_;
    std::optional<FailureKind> fail_kind_;
    int fail_remaining_ = 0;
    std::atomic<int> calls_{0};
};

inline constexpr media::Rgb kFlagColor{255, 0, 255};

// Paints every masked pixel with kFlagColor; everything else is untouched.
class MockImageEditProvider final : public ImageEditProvider {
public:
    media::Image edit(const media::Image& image, const std::vector<std::uint8_t>& mask,
                      const std::string& instruction) override;

    void set_available(bool available) { available_ = available; }
    std::optional<std::string> last_instruction() const;

private:
    std::atomic<bool> available_{true};
    mutable std::mutex mutex_;
    std::optional<std::string> last_instruction_;
};

// Maps fixture audio ("fixture:<name>" blobs) to fixture strings, and reads
// back the text embedded in WAVs produced by MockSynthesizeProvider.
class MockTranscribeProvider final : public TranscribeProvider {
public:
    explicit MockTranscribeProvider(std::map<std::string, std::string> fixtures = {}) : fixtures_(std::move(fixtures)) {}
    static MockTranscribeProvider load(const std::filesystem::path& resource_dir);

    std::string transcribe(std::string_view audio, const std::string& locale) override;

private:
    std::map<std::string, std::string> fixtures_;
};

// 16 kHz mono PCM WAV: a short tone at the voice pitch plus a "remi" chunk
// carrying the text, so transcription of synthesized audio round-trips.
class MockSynthesizeProvider final : public SynthesizeProvider {
public:
    std::string synthesize(const std::string& text, const VoiceProfile& voice) override;
};

}  // namespace remi::providers
