#pragma once

// HTTP/JSON provider clients. Wire contract (see docs/providers.md):
//
//   POST /chat               {purpose, system_prompt, messages[], stream, hints[]}
//                            -> NDJSON: {"delta": s}* then {"done": true}
//                               or an {"error": {kind, message}} line
//   POST /images/generate    {prompt, width, height}             -> {image_base64}
//   POST /images/edit        {image_base64, mask_base64, instruction} -> {image_base64}
//   POST /speech/transcribe  {audio_base64, locale}              -> {text}
//   POST /speech/synthesize  {text, voice: {id, pitch_hz, rate}} -> {audio_base64, mime}
//
// Images travel as base64 PNG; masks as grayscale PNG with 255 marking the
// editable area.

#include "remi/providers/provider.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace remi::providers {

struct HttpEndpoint {
    std::string base_url;  // "http://host:port"
    std::chrono::milliseconds timeout{30000};
    std::string api_key;   // sent as a bearer token when non-empty
};

class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    StreamEnd stream(const ChatRequest& request, const ChunkSink& sink, const CancelToken& cancel) override;

private:
    HttpEndpoint endpoint_;
};

class HttpImageGenProvider final : public ImageGenProvider {
public:
    explicit HttpImageGenProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    media::Image generate(const std::string& prompt, int width, int height) override;

private:
    HttpEndpoint endpoint_;
};

class HttpImageEditProvider final : public ImageEditProvider {
public:
    explicit HttpImageEditProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    media::Image edit(const media::Image& image, const std::vector<std::uint8_t>& mask,
                      const std::string& instruction) override;

private:
    HttpEndpoint endpoint_;
};

class HttpTranscribeProvider final : public TranscribeProvider {
public:
    explicit HttpTranscribeProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string transcribe(std::string_view audio, const std::string& locale) override;

private:
    HttpEndpoint endpoint_;
};

class HttpSynthesizeProvider final : public SynthesizeProvider {
public:
    explicit HttpSynthesizeProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string synthesize(const std::string& text, const VoiceProfile& voice) override;

private:
    HttpEndpoint endpoint_;
};

// Maps an HTTP status to a failure kind: 408/504 timeout, 503 unavailable,
// other 4xx client_error, other 5xx server_error.
FailureKind classify_status(int status);

}  // namespace remi::providers
