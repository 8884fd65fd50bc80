#pragma once

#include "remi/service/service.hpp"

#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace remi::service {

// HTTP status for an error code: 404, 409, 412, 422, 401, 403, 502, 500.
int http_status(ErrorCode code);
json error_body(ErrorCode code, const std::string& message, const std::vector<FieldError>& fields = {});

class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 picks a free port. Throws Error(io) when the address is taken.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void start();   // listen() on a background thread
    void stop();

    int port() const { return port_; }

private:
    void routes();

    Service& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace remi::service
