#include "remi/providers/http.hpp"

#include "remi/core/json.hpp"
#include "remi/media/mask.hpp"

#include <httplib.h>

namespace remi::providers {

FailureKind classify_status(int status) {
    if (status == 408 || status == 504) return FailureKind::timeout;
    if (status == 503) return FailureKind::unavailable;
    if (status >= 500) return FailureKind::server_error;
    return FailureKind::client_error;
}

namespace {

using SteadyClock = std::chrono::steady_clock;

std::unique_ptr<httplib::Client> make_client(const HttpEndpoint& ep) {
    auto client = std::make_unique<httplib::Client>(ep.base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());
    if (!ep.api_key.empty()) client->set_bearer_token_auth(ep.api_key);
    return client;
}

// httplib reports a read timeout as a generic read error, so elapsed time
// decides whether it was one.
[[noreturn]] void throw_transport(httplib::Error err, SteadyClock::time_point started, const HttpEndpoint& ep,
                                  const std::string& path) {
    auto elapsed = SteadyClock::now() - started;
    bool timed_out = err == httplib::Error::ConnectionTimeout ||
                     ((err == httplib::Error::Read || err == httplib::Error::Write) && elapsed >= ep.timeout * 9 / 10);
    FailureKind kind = timed_out ? FailureKind::timeout
                       : err == httplib::Error::Connection ? FailureKind::unavailable
                                                           : FailureKind::server_error;
    throw ProviderError(kind, "POST " + path + " failed: " + httplib::to_string(err));
}

std::string error_message(const std::string& body) {
    try {
        auto j = json::parse(body);
        if (j.contains("error")) {
            const auto& e = j["error"];
            return e.is_object() ? e.value("message", e.dump()) : e.dump();
        }
    } catch (const json::exception&) {
    }
    return body.substr(0, 200);
}

json post_json(const HttpEndpoint& ep, const std::string& path, const json& body) {
    auto client = make_client(ep);
    auto started = SteadyClock::now();
    auto res = client->Post(path, body.dump(), "application/json");
    if (!res) throw_transport(res.error(), started, ep, path);
    if (res->status >= 400)
        throw ProviderError(classify_status(res->status),
                            "POST " + path + " returned " + std::to_string(res->status) + ": " + error_message(res->body),
                            res->status);
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProviderError(FailureKind::bad_response, "POST " + path + ": invalid JSON response: " + e.what());
    }
}

std::string field_string(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_string())
        throw ProviderError(FailureKind::bad_response, "POST " + path + ": response lacks '" + key + "'");
    return j[key].get<std::string>();
}

media::Image decode_image_field(const json& j, const std::string& path) {
    try {
        return media::decode_png(media::base64_decode(field_string(j, "image_base64", path)));
    } catch (const Error& e) {
        throw ProviderError(FailureKind::bad_response, "POST " + path + ": " + e.what());
    }
}

FailureKind parse_kind(const std::string& s) {
    for (auto k : {FailureKind::timeout, FailureKind::client_error, FailureKind::server_error, FailureKind::unavailable,
                   FailureKind::bad_response})
        if (to_string(k) == s) return k;
    return FailureKind::server_error;
}

}  // namespace

StreamEnd HttpChatProvider::stream(const ChatRequest& request, const ChunkSink& sink, const CancelToken& cancel) {
    const std::string path = "/chat";
    json body{{"purpose", to_string(request.purpose)},
              {"system_prompt", request.system_prompt},
              {"stream", request.stream},
              {"hints", request.hints},
              {"messages", json::array()}};
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    auto client = make_client(endpoint_);
    httplib::Request req;
    req.method = "POST";
    req.path = path;
    req.body = body.dump();
    req.set_header("Content-Type", "application/json");
    req.set_header("Accept", "application/x-ndjson");

    int status = 0;
    std::string buffer;
    std::string error_body;
    bool done = false;
    std::optional<ProviderError> stream_error;
    bool was_cancelled = false;

    auto handle_line = [&](const std::string& line) {
        if (line.empty()) return true;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            stream_error.emplace(FailureKind::bad_response, "malformed stream line: " + line.substr(0, 80));
            return false;
        }
        if (j.contains("delta") && j["delta"].is_string()) {
            sink(j["delta"].get<std::string>());
        } else if (j.value("done", false)) {
            done = true;
        } else if (j.contains("error")) {
            const auto& e = j["error"];
            stream_error.emplace(parse_kind(e.value("kind", "server_error")), e.value("message", "provider error"));
            return false;
        }
        return true;
    };

    req.response_handler = [&](const httplib::Response& res) {
        status = res.status;
        return true;
    };
    req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
        if (cancel.cancelled()) {
            was_cancelled = true;
            return false;
        }
        if (status >= 400) {
            error_body.append(data, len);
            return true;
        }
        buffer.append(data, len);
        std::size_t nl;
        while ((nl = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!handle_line(line)) return false;
            if (cancel.cancelled()) {
                was_cancelled = true;
                return false;
            }
        }
        return true;
    };

    httplib::Response res;
    httplib::Error err = httplib::Error::Success;
    auto started = SteadyClock::now();
    bool ok = client->send(req, res, err);
    if (was_cancelled) return StreamEnd::cancelled;
    if (stream_error) throw *stream_error;
    if (!ok) throw_transport(err, started, endpoint_, path);
    if (status >= 400)
        throw ProviderError(classify_status(status),
                            "POST /chat returned " + std::to_string(status) + ": " + error_message(error_body), status);
    if (!buffer.empty() && !handle_line(buffer)) throw *stream_error;
    if (!done) throw ProviderError(FailureKind::bad_response, "chat stream ended without a done marker");
    return StreamEnd::completed;
}

media::Image HttpImageGenProvider::generate(const std::string& prompt, int width, int height) {
    const std::string path = "/images/generate";
    auto j = post_json(endpoint_, path, {{"prompt", prompt}, {"width", width}, {"height", height}});
    return decode_image_field(j, path);
}

media::Image HttpImageEditProvider::edit(const media::Image& image, const std::vector<std::uint8_t>& mask,
                                         const std::string& instruction) {
    const std::string path = "/images/edit";
    json body{{"image_base64", media::base64_encode(media::encode_png(image))},
              {"mask_base64", media::base64_encode(media::mask_to_png(mask, image.width(), image.height()))},
              {"instruction", instruction}};
    return decode_image_field(post_json(endpoint_, path, body), path);
}

std::string HttpTranscribeProvider::transcribe(std::string_view audio, const std::string& locale) {
    const std::string path = "/speech/transcribe";
    auto j = post_json(endpoint_, path, {{"audio_base64", media::base64_encode(audio)}, {"locale", locale}});
    return field_string(j, "text", path);
}

std::string HttpSynthesizeProvider::synthesize(const std::string& text, const VoiceProfile& voice) {
    const std::string path = "/speech/synthesize";
    json body{{"text", text}, {"voice", {{"id", voice.id}, {"pitch_hz", voice.pitch_hz}, {"rate", voice.rate}}}};
    auto j = post_json(endpoint_, path, body);
    try {
        return media::base64_decode(field_string(j, "audio_base64", path));
    } catch (const Error& e) {
        throw ProviderError(FailureKind::bad_response, "POST " + path + ": " + e.what());
    }
}

}  // namespace remi::providers
