#pragma once

// Thin JSON client over the HTTP API plus a harness that runs a Service on
// an ephemeral port.

#include "remi/core/json.hpp"
#include "remi/service/http.hpp"

#include <httplib.h>

#include <memory>
#include <string>
#include <vector>

namespace remi::testing {

struct ApiResponse {
    int status = 0;
    std::string body;
    std::string content_type;
    std::string disposition;

    json json_body() const { return body.empty() ? json() : json::parse(body); }
};

struct StreamedTurn {
    int status = 0;
    std::vector<std::string> deltas;
    json done;  // terminal line
    std::string text() const {
        std::string t;
        for (const auto& d : deltas) t += d;
        return t;
    }
};

class ApiClient {
public:
    ApiClient(const std::string& host, int port, std::string token = {})
        : client_(host, port), token_(std::move(token)) {
        client_.set_read_timeout(30, 0);
        client_.set_write_timeout(30, 0);
    }

    void set_token(std::string token) { token_ = std::move(token); }
    const std::string& token() const { return token_; }

    ApiResponse get(const std::string& path) { return wrap(client_.Get(path, headers())); }
    ApiResponse del(const std::string& path) { return wrap(client_.Delete(path, headers())); }
    ApiResponse post(const std::string& path, const json& body = json::object()) {
        return wrap(client_.Post(path, headers(), body.dump(), "application/json"));
    }
    ApiResponse post_raw(const std::string& path, const std::string& body, const std::string& type) {
        return wrap(client_.Post(path, headers(), body, type));
    }
    ApiResponse put(const std::string& path, const json& body) {
        return wrap(client_.Put(path, headers(), body.dump(), "application/json"));
    }
    ApiResponse patch(const std::string& path, const json& body) {
        return wrap(client_.Patch(path, headers(), body.dump(), "application/json"));
    }

    // Reads the NDJSON turn stream line by line as it arrives.
    StreamedTurn turn(const std::string& session_id, const json& body) {
        StreamedTurn out;
        std::string buffer;
        httplib::Request req;
        req.method = "POST";
        req.path = "/sessions/" + session_id + "/turns";
        req.headers = headers();
        req.body = body.dump();
        req.set_header("Content-Type", "application/json");
        std::string error_body;
        req.response_handler = [&](const httplib::Response& r) {
            out.status = r.status;
            return true;
        };
        req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
            if (out.status != 200) {
                error_body.append(data, len);
                return true;
            }
            buffer.append(data, len);
            std::size_t nl;
            while ((nl = buffer.find('\n')) != std::string::npos) {
                auto line = json::parse(buffer.substr(0, nl));
                buffer.erase(0, nl + 1);
                if (line.contains("delta"))
                    out.deltas.push_back(line["delta"].get<std::string>());
                else
                    out.done = line;
            }
            return true;
        };
        auto res = client_.send(req);
        if (!res) throw std::runtime_error("request failed: " + httplib::to_string(res.error()));
        out.status = res->status;
        if (out.status != 200) out.done = error_body.empty() ? json() : json::parse(error_body);
        return out;
    }

private:
    httplib::Headers headers() const {
        httplib::Headers h;
        if (!token_.empty()) h.emplace("Authorization", "Bearer " + token_);
        return h;
    }

    static ApiResponse wrap(const httplib::Result& res) {
        if (!res) throw std::runtime_error("request failed: " + httplib::to_string(res.error()));
        return {res->status, res->body, res->get_header_value("Content-Type"),
                res->get_header_value("Content-Disposition")};
    }

    httplib::Client client_;
    std::string token_;
};

// Service + HTTP server on 127.0.0.1 with an ephemeral port.
struct RunningService {
    RunningService(service::ServiceConfig config, service::ServiceOptions options = {})
        : service(std::make_unique<service::Service>(std::move(config), std::move(options))),
          server(std::make_unique<service::HttpServer>(*service)) {
        port = server->bind("127.0.0.1", 0);
        server->start();
    }
    ~RunningService() { shutdown(); }

    void shutdown() {
        if (server) server->stop();
        server.reset();
        service.reset();
    }

    ApiClient client(const std::string& token = {}) const { return ApiClient("127.0.0.1", port, token); }

    std::unique_ptr<service::Service> service;
    std::unique_ptr<service::HttpServer> server;
    int port = 0;
};

}  // namespace remi::testing
