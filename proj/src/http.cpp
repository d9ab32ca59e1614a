#include "qox/http.hpp"

#include <httplib.h>

namespace qox {

struct HttpApiServer::Impl {
    explicit Impl(ServiceStack& s) : stack(s) {}
    ServiceStack& stack;
    httplib::Server server;
};

HttpApiServer::HttpApiServer(ServiceStack& stack) : impl_(std::make_unique<Impl>(stack)) {
    impl_->server.Post("/api", [this](const httplib::Request& req, httplib::Response& res) {
        json response;
        try {
            response = impl_->stack.handle(json::parse(req.body));
        } catch (const json::parse_error& e) {
            response = json{{"error", errc::parse_error}, {"message", e.what()}};
        } catch (const Error& e) {  // e.g. the event log append failed
            response = json{{"error", e.code()}, {"message", e.what()}};
        }
        res.set_content(response.dump(), "application/json");
    });
}

HttpApiServer::~HttpApiServer() { stop(); }

int HttpApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw Error(errc::io_error, "cannot bind to " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw Error(errc::io_error,
                    "cannot bind to " + host + ":" + std::to_string(port));
    return port;
}

void HttpApiServer::run() {
    if (!impl_->server.listen_after_bind())
        throw Error(errc::io_error, "server loop terminated abnormally");
}

void HttpApiServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

struct HttpTransport::Impl {
    Impl(const std::string& host, int port) : client(host, port) {
        client.set_connection_timeout(5);
        client.set_read_timeout(30);
    }
    httplib::Client client;
};

HttpTransport::HttpTransport(const std::string& host, int port)
    : impl_(std::make_unique<Impl>(host, port)) {}

HttpTransport::~HttpTransport() = default;

json HttpTransport::roundtrip(const json& request) {
    const auto result = impl_->client.Post("/api", request.dump(), "application/json");
    if (!result)
        throw Error(errc::io_error,
                    "transport failure: " + httplib::to_string(result.error()));
    if (result->status != 200)
        throw Error(errc::io_error, "unexpected HTTP status " +
                                        std::to_string(result->status));
    return json::parse(result->body);
}

}  // namespace qox
