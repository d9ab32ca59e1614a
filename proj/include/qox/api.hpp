// Request/response envelope shared by the exchange and vouching services.
// One message type per operation: the request is the operation's canonical
// JSON body plus an "op" field; a failed response carries an "error" field
// holding a stable string code. The envelope is transport-agnostic; the
// loopback binding runs both services in process, and qox/http.hpp adds a
// socket binding.

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qox/exchange.hpp"
#include "qox/model.hpp"
#include "qox/vouching.hpp"

namespace qox {

class Transport {
public:
    virtual ~Transport() = default;
    virtual json roundtrip(const json& request) = 0;
};

class LoopbackTransport final : public Transport {
public:
    explicit LoopbackTransport(std::function<json(const json&)> handler)
        : handler_(std::move(handler)) {}

    json roundtrip(const json& request) override { return handler_(request); }

private:
    std::function<json(const json&)> handler_;
};

// Vouching authority behind the envelope.
// Ops: register, record_interaction, has_interacted, register_pattern,
// verify_record, is_registered.
class VouchingService {
public:
    explicit VouchingService(VouchingAuthority& authority) : authority_(authority) {}

    json handle(const json& request);

private:
    VouchingAuthority& authority_;
};

// Exchange behind the envelope.
// Ops: submit_rating, get_aggregate, list_reviews, extract_common_tags,
// submit_record, query_records, discover, watch_rating, poll_alerts.
class ExchangeService {
public:
    explicit ExchangeService(Exchange& exchange) : exchange_(exchange) {}

    json handle(const json& request);

private:
    Exchange& exchange_;
};

// The exchange's view of the vouching authority, implemented as envelope
// calls over a transport (never shared memory).
class RemoteVouching final : public VouchingView {
public:
    explicit RemoteVouching(Transport& transport) : transport_(transport) {}

    bool is_registered(const IdentityId& identity) override;
    bool has_interacted(const IdentityId& a, const IdentityId& b,
                        std::uint64_t min_packets) override;
    VerifiedStatus verify_record(const SpecificRecord& record) override;

private:
    json call(json request);

    Transport& transport_;
};

// Write-ahead JSON-lines event log: one accepted mutating request per line.
// Replaying the lines through the dispatcher rebuilds the exact state.
class EventLog {
public:
    explicit EventLog(const std::filesystem::path& path);

    void append(const json& line);

    static std::vector<json> read_all(const std::filesystem::path& path);

private:
    std::ofstream out_;
};

// Exchange + vouching behind one dispatcher. The exchange reaches vouching
// only through the loopback envelope, so the pair can later be split across
// the socket binding without behavior changes.
class ServiceStack {
public:
    explicit ServiceStack(ExchangeOptions options = {});

    // Routes by "op"; unknown ops yield {"error": "unknown_op"}. Successful
    // mutating requests are appended to the attached event log.
    json handle(const json& request);

    // Replays an existing log, then appends subsequent mutations to it.
    void attach_log(const std::filesystem::path& path);

    VouchingAuthority& vouching() { return vouching_; }
    Exchange& exchange() { return exchange_; }

private:
    json route(const json& request, const std::string& op);

    VouchingAuthority vouching_;
    VouchingService vouching_service_;
    LoopbackTransport vouching_loopback_;
    RemoteVouching vouching_view_;
    Exchange exchange_;
    ExchangeService exchange_service_;

    std::mutex log_mutex_;
    std::unique_ptr<EventLog> log_;
};

}  // namespace qox
