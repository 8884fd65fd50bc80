#include "remi/providers/mock.hpp"

#include "remi/core/json.hpp"
#include "remi/core/store.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace remi::providers {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::size_t user_messages(const ChatRequest& r) {
    return static_cast<std::size_t>(
        std::count_if(r.messages.begin(), r.messages.end(), [](const ChatMessage& m) { return m.role == "user"; }));
}

std::string last_user_message(const ChatRequest& r) {
    for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it)
        if (it->role == "user") return it->content;
    return {};
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_u16(std::string& s, std::uint16_t v) {
    s += static_cast<char>(v & 0xFF);
    s += static_cast<char>(v >> 8);
}

std::uint32_t get_u32(std::string_view s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Chat
// ---------------------------------------------------------------------------

std::string MockChatProvider::default_reply(std::size_t n) {
    static const std::vector<std::string> prompts{
        "That sounds like a treasured memory. What do you remember most about that place?",
        "How lovely. Who was with you in those days?",
        "I can almost picture it. Were there festivals or special occasions you looked forward to?",
        "Thank you for sharing that. What sounds or smells come back to you when you think of it?",
        "What a warm memory. Is there a moment from that time you would like to keep forever?",
    };
    return prompts[(n == 0 ? 0 : n - 1) % prompts.size()];
}

std::string MockChatProvider::reply_for(const ChatRequest& r) const {
    MockChatScript s = script();
    switch (r.purpose) {
        case ChatPurpose::summary:
            return "[summary of " + std::to_string(r.messages.size()) + " earlier turns, truncated]";
        case ChatPurpose::distillation:
            return r.hints.empty() ? last_user_message(r) : join(r.hints, ", ");
        case ChatPurpose::narrative:
            if (r.hints.empty()) return "Looking back, I remember those days with a quiet smile.";
            return "Looking back, I remember " + join(r.hints, "; ") + ". Those days stay with me.";
        case ChatPurpose::conversation: break;
    }
    if (s.echo) return last_user_message(r);
    std::size_t n = user_messages(r);
    if (s.replies.empty()) return default_reply(n);
    return s.replies[std::min(n == 0 ? 0 : n - 1, s.replies.size() - 1)];
}

std::vector<std::string> MockChatProvider::split_chunks(std::string_view text, std::size_t chunk_size) {
    std::vector<std::string> out;
    chunk_size = std::max<std::size_t>(chunk_size, 1);
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t end = std::min(text.size(), i + chunk_size);
        while (end < text.size() && (static_cast<unsigned char>(text[end]) & 0xC0) == 0x80) ++end;
        out.emplace_back(text.substr(i, end - i));
        i = end;
    }
    return out;
}

StreamEnd MockChatProvider::stream(const ChatRequest& request, const ChunkSink& sink, const CancelToken& cancel) {
    MockChatScript s;
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
        if (requests_.size() > 1000) requests_.erase(requests_.begin());
        s = script_;
    }
    if (request.purpose != ChatPurpose::conversation) {
        if (s.fail_auxiliary)
            throw ProviderError(*s.fail_auxiliary, "mock " + std::string(to_string(request.purpose)) + " failure");
        sink(reply_for(request));
        return StreamEnd::completed;
    }
    auto chunks = split_chunks(reply_for(request), s.chunk_size);
    for (std::size_t i = 0; i <= chunks.size(); ++i) {
        if (cancel.cancelled()) return StreamEnd::cancelled;
        if (s.fail_after_chunks && *s.fail_after_chunks == i)
            throw ProviderError(s.fail_kind, "mock stream failure after " + std::to_string(i) + " chunks");
        if (s.hold_after_chunks && *s.hold_after_chunks == i) {
            if (cancel.wait_for(std::chrono::seconds(10))) return StreamEnd::cancelled;
        }
        if (i == chunks.size()) break;
        if (s.chunk_delay.count() > 0 && cancel.wait_for(s.chunk_delay)) return StreamEnd::cancelled;
        sink(chunks[i]);
    }
    return StreamEnd::completed;
}

void MockChatProvider::set_script(MockChatScript script) {
    std::lock_guard lock(mutex_);
    script_ = std::move(script);
}

MockChatScript MockChatProvider::script() const {
    std::lock_guard lock(mutex_);
    return script_;
}

std::vector<ChatRequest> MockChatProvider::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t MockChatProvider::request_count() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
}

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

media::Image MockImageGenProvider::render(std::string_view prompt, int width, int height) {
    if (width <= 0 || height <= 0 || width > 4096 || height > 4096)
        throw ProviderError(FailureKind::client_error, "unsupported image size");
    std::string h = media::sha256_hex(prompt);
    auto byte = [&](int i) { return static_cast<std::uint8_t>(std::stoi(h.substr(2 * i, 2), nullptr, 16)); };
    media::Rgb top{byte(0), byte(1), byte(2)};
    media::Rgb bottom{byte(3), byte(4), byte(5)};
    media::Image img(width, height);
    for (int y = 0; y < height; ++y) {
        auto mix = [&](std::uint8_t a, std::uint8_t b) {
            return static_cast<std::uint8_t>((a * (height - 1 - y) + b * y) / std::max(1, height - 1));
        };
        media::Rgb row{mix(top.r, bottom.r), mix(top.g, bottom.g), mix(top.b, bottom.b)};
        for (int x = 0; x < width; ++x) img.set(x, y, row);
    }
    // A few hash-placed blocks so edits and crops are visible.
    for (int k = 0; k < 4; ++k) {
        int bx = byte(6 + 4 * k) * width / 256, by = byte(7 + 4 * k) * height / 256;
        int bw = std::max(1, byte(8 + 4 * k) * width / 1024), bh = std::max(1, byte(9 + 4 * k) * height / 1024);
        media::Rgb c{byte(22 + k), byte(26 + k), static_cast<std::uint8_t>(255 - byte(22 + k))};
        for (int y = by; y < std::min(height, by + bh); ++y)
            for (int x = bx; x < std::min(width, bx + bw); ++x) img.set(x, y, c);
    }
    return img;
}

media::Image MockImageGenProvider::generate(const std::string& prompt, int width, int height) {
    ++calls_;
    {
        std::lock_guard lock(mutex_);
        if (fail_remaining_ > 0) {
            --fail_remaining_;
            throw ProviderError(*fail_kind_, "mock image generation failure");
        }
    }
    return render(prompt, width, height);
}

void MockImageGenProvider::fail_next(FailureKind kind, int count) {
    std::lock_guard lock(mutex_);
    fail_kind_ = kind;
    fail_remaining_ = count;
}

media::Image MockImageEditProvider::edit(const media::Image& image, const std::vector<std::uint8_t>& mask,
                                         const std::string& instruction) {
    if (!available_) throw ProviderError(FailureKind::unavailable, "mock image edit provider unavailable");
    if (mask.size() != static_cast<std::size_t>(image.width()) * image.height())
        throw ProviderError(FailureKind::client_error, "mask size does not match image");
    {
        std::lock_guard lock(mutex_);
        last_instruction_ = instruction;
    }
    media::Image out = image;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (mask[static_cast<std::size_t>(y) * image.width() + x]) out.set(x, y, kFlagColor);
    return out;
}

std::optional<std::string> MockImageEditProvider::last_instruction() const {
    std::lock_guard lock(mutex_);
    return last_instruction_;
}

// ---------------------------------------------------------------------------
// Speech
// ---------------------------------------------------------------------------

MockTranscribeProvider MockTranscribeProvider::load(const std::filesystem::path& resource_dir) {
    auto j = json::parse(read_file(resource_dir / "mock" / "transcripts.json"));
    return MockTranscribeProvider(j.get<std::map<std::string, std::string>>());
}

std::string MockTranscribeProvider::transcribe(std::string_view audio, const std::string&) {
    if (audio.rfind("fixture:", 0) == 0) {
        std::string key(audio.substr(8));
        while (!key.empty() && (key.back() == '\n' || key.back() == '\r' || key.back() == ' ')) key.pop_back();
        auto it = fixtures_.find(key);
        if (it == fixtures_.end()) throw ProviderError(FailureKind::client_error, "unknown audio fixture '" + key + "'");
        return it->second;
    }
    if (audio.size() >= 12 && audio.substr(0, 4) == "RIFF" && audio.substr(8, 4) == "WAVE") {
        std::size_t at = 12;
        while (at + 8 <= audio.size()) {
            std::uint32_t len = get_u32(audio, at + 4);
            if (audio.substr(at, 4) == "remi" && at + 8 + len <= audio.size())
                return std::string(audio.substr(at + 8, len));
            at += 8 + len + (len & 1);
        }
    }
    throw ProviderError(FailureKind::client_error, "mock transcriber does not recognize this audio");
}

std::string MockSynthesizeProvider::synthesize(const std::string& text, const VoiceProfile& voice) {
    constexpr std::uint32_t rate = 16000;
    // 40 ms per character, between 0.2 s and 3 s.
    std::uint32_t samples = std::clamp<std::uint32_t>(static_cast<std::uint32_t>(text.size()) * 640, 3200, 48000);
    std::string pcm;
    pcm.reserve(samples * 2);
    for (std::uint32_t i = 0; i < samples; ++i) {
        double v = std::sin(2.0 * M_PI * voice.pitch_hz * i / rate) * 6000.0;
        put_u16(pcm, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }
    std::string extra = text;
    if (extra.size() % 2) extra += '\0';

    std::string wav = "RIFF";
    put_u32(wav, static_cast<std::uint32_t>(4 + 8 + 16 + 8 + extra.size() + 8 + pcm.size()));
    wav += "WAVEfmt ";
    put_u32(wav, 16);
    put_u16(wav, 1);  // PCM
    put_u16(wav, 1);  // mono
    put_u32(wav, rate);
    put_u32(wav, rate * 2);
    put_u16(wav, 2);
    put_u16(wav, 16);
    wav += "remi";
    put_u32(wav, static_cast<std::uint32_t>(text.size()));
    wav += extra;
    wav += "data";
    put_u32(wav, static_cast<std::uint32_t>(pcm.size()));
    wav += pcm;
    return wav;
}

}  // namespace remi::providers
