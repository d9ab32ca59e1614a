// Socket binding for the envelope: POST /api carries one request per call.

#pragma once

#include <memory>
#include <string>

#include "qox/api.hpp"

namespace qox {

class HttpApiServer {
public:
    explicit HttpApiServer(ServiceStack& stack);
    ~HttpApiServer();

    // Binds to host:port (port 0 picks a free one) and returns the bound
    // port. Call run() afterwards to serve.
    int bind(const std::string& host, int port);

    // Blocking accept loop; returns after stop().
    void run();

    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Client-side transport speaking to an HttpApiServer.
class HttpTransport final : public Transport {
public:
    HttpTransport(const std::string& host, int port);
    ~HttpTransport() override;

    json roundtrip(const json& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qox
