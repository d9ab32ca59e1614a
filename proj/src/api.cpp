#include "qox/api.hpp"

#include <set>

namespace qox {

namespace {

json error_response(const std::string& op, const std::string& code,
                    const std::string& message) {
    return json{{"op", op}, {"error", code}, {"message", message}};
}

// Runs one handler under the envelope's error discipline.
json guarded(const json& request, const std::function<json(const json&)>& body) {
    const std::string op = request.value("op", "");
    try {
        json response = body(request);
        response["op"] = op;
        return response;
    } catch (const Error& e) {
        return error_response(op, e.code(), e.what());
    } catch (const json::exception& e) {
        return error_response(op, errc::validation_error, e.what());
    }
}

const std::set<std::string>& vouching_ops() {
    static const std::set<std::string> ops{"register",         "record_interaction",
                                           "has_interacted",   "register_pattern",
                                           "verify_record",    "is_registered"};
    return ops;
}

const std::set<std::string>& exchange_ops() {
    static const std::set<std::string> ops{
        "submit_rating", "get_aggregate", "list_reviews", "extract_common_tags",
        "submit_record", "query_records", "discover",     "watch_rating",
        "poll_alerts"};
    return ops;
}

const std::set<std::string>& mutating_ops() {
    static const std::set<std::string> ops{"register",      "record_interaction",
                                           "register_pattern", "submit_rating",
                                           "submit_record", "watch_rating"};
    return ops;
}

}  // namespace

json VouchingService::handle(const json& request) {
    return guarded(request, [this](const json& req) -> json {
        const std::string op = req.at("op").get<std::string>();
        if (op == "register") {
            const Credential credential{req.at("credential").get<std::string>()};
            const auto kind = identity_kind_from_string(req.at("kind").get<std::string>());
            const IdentityId identity = authority_.register_identity(credential, kind);
            return json(identity);
        }
        if (op == "record_interaction") {
            authority_.record_interaction(req.at("a").get<IdentityId>(),
                                          req.at("b").get<IdentityId>(),
                                          req.at("packets").get<std::uint64_t>(),
                                          req.at("timestamp").get<Timestamp>());
            return json{{"ok", true}};
        }
        if (op == "has_interacted") {
            const bool result = authority_.has_interacted(
                req.at("a").get<IdentityId>(), req.at("b").get<IdentityId>(),
                req.at("min_packets").get<std::uint64_t>());
            return json{{"result", result}};
        }
        if (op == "register_pattern") {
            EvidencePattern pattern;
            pattern.owner = req.at("owner").get<IdentityId>();
            pattern.kind = record_kind_from_string(req.at("kind").get<std::string>());
            const json& p = req.at("params");
            pattern.params.min_count = p.at("min_count").get<std::uint64_t>();
            pattern.params.window = p.at("window").get<std::uint64_t>();
            pattern.params.src = p.value("src", "*");
            pattern.params.dst = p.value("dst", "*");
            const PatternId id = authority_.register_evidence_pattern(pattern.owner, pattern);
            return json{{"pattern_id", id}};
        }
        if (op == "verify_record") {
            const auto record = req.get<SpecificRecord>();
            return json{{"verified", to_string(authority_.verify_record(record))}};
        }
        if (op == "is_registered") {
            return json{{"result", authority_.is_registered(req.get<IdentityId>())}};
        }
        throw Error(errc::unknown_op, "no vouching operation \"" + op + "\"");
    });
}

json ExchangeService::handle(const json& request) {
    return guarded(request, [this](const json& req) -> json {
        const std::string op = req.at("op").get<std::string>();
        if (op == "submit_rating") {
            exchange_.submit_rating(req.get<Rating>());
            return json{{"ok", true}};
        }
        if (op == "get_aggregate") {
            return json(exchange_.get_aggregate(req.at("ratee").get<IdentityId>()));
        }
        if (op == "list_reviews") {
            return json{
                {"reviews", exchange_.list_reviews(req.at("ratee").get<IdentityId>())}};
        }
        if (op == "extract_common_tags") {
            return json{{"tags", exchange_.extract_common_tags(
                                     req.at("ratee").get<IdentityId>(),
                                     req.at("min_support").get<std::uint64_t>())}};
        }
        if (op == "submit_record") {
            const auto status = exchange_.submit_record(req.get<SpecificRecord>());
            return json{{"verified", to_string(status)}};
        }
        if (op == "query_records") {
            RecordFilter filter;
            if (req.contains("subject")) filter.subject = req.at("subject").get<IdentityId>();
            if (req.contains("kind"))
                filter.kind = record_kind_from_string(req.at("kind").get<std::string>());
            if (req.contains("since")) filter.since = req.at("since").get<Timestamp>();
            filter.include_unverified = req.value("include_unverified", false);
            return json{{"records", exchange_.query_records(filter)}};
        }
        if (op == "discover") {
            const auto catalog = req.at("catalog").get<std::vector<IdentityId>>();
            return json{{"providers",
                         exchange_.discover(catalog, req.at("min_rating").get<double>())}};
        }
        if (op == "watch_rating") {
            exchange_.watch_rating(req.at("subject").get<IdentityId>(),
                                   req.at("threshold_drop").get<double>());
            return json{{"ok", true}};
        }
        if (op == "poll_alerts") {
            return json{{"alerts", exchange_.drain_alerts()}};
        }
        throw Error(errc::unknown_op, "no exchange operation \"" + op + "\"");
    });
}

json RemoteVouching::call(json request) {
    json response = transport_.roundtrip(request);
    if (response.contains("error")) {
        throw Error(response.at("error").get<std::string>(),
                    response.value("message", "vouching call failed"));
    }
    return response;
}

bool RemoteVouching::is_registered(const IdentityId& identity) {
    json request(identity);
    request["op"] = "is_registered";
    return call(std::move(request)).at("result").get<bool>();
}

bool RemoteVouching::has_interacted(const IdentityId& a, const IdentityId& b,
                                    std::uint64_t min_packets) {
    return call(json{{"op", "has_interacted"}, {"a", a}, {"b", b},
                     {"min_packets", min_packets}})
        .at("result")
        .get<bool>();
}

VerifiedStatus RemoteVouching::verify_record(const SpecificRecord& record) {
    json request(record);
    request["op"] = "verify_record";
    return verified_status_from_string(
        call(std::move(request)).at("verified").get<std::string>());
}

EventLog::EventLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw Error(errc::io_error, "cannot open event log " + path.string());
}

void EventLog::append(const json& line) {
    out_ << line.dump() << '\n';
    out_.flush();
    if (!out_) throw Error(errc::io_error, "event log write failed");
}

std::vector<json> EventLog::read_all(const std::filesystem::path& path) {
    std::vector<json> lines;
    std::ifstream in(path);
    if (!in) return lines;  // absent log: empty history
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error(errc::io_error, "event log line " + std::to_string(line_no) +
                                            " is not valid JSON: " + e.what());
        }
    }
    return lines;
}

ServiceStack::ServiceStack(ExchangeOptions options)
    : vouching_(),
      vouching_service_(vouching_),
      vouching_loopback_([this](const json& req) { return vouching_service_.handle(req); }),
      vouching_view_(vouching_loopback_),
      exchange_(vouching_view_, options),
      exchange_service_(exchange_) {}

json ServiceStack::route(const json& request, const std::string& op) {
    if (vouching_ops().count(op)) return vouching_service_.handle(request);
    if (exchange_ops().count(op)) return exchange_service_.handle(request);
    return error_response(op, errc::unknown_op, "no operation \"" + op + "\"");
}

json ServiceStack::handle(const json& request) {
    const std::string op = request.value("op", "");
    if (!mutating_ops().count(op)) return route(request, op);
    // Mutations are serialized together with their log append so the log
    // order always equals the order the state changes applied in; a replay
    // then rebuilds the exact state.
    std::lock_guard lock(log_mutex_);
    json response = route(request, op);
    if (!response.contains("error") && log_) log_->append(request);
    return response;
}

void ServiceStack::attach_log(const std::filesystem::path& path) {
    const auto history = EventLog::read_all(path);
    std::size_t line_no = 0;
    for (const json& request : history) {
        ++line_no;
        const json response = handle(request);  // log_ still unset: no re-append
        if (response.contains("error")) {
            throw Error(errc::io_error,
                        "event log replay failed at line " + std::to_string(line_no) +
                            ": " + response.at("error").get<std::string>());
        }
    }
    std::lock_guard lock(log_mutex_);
    log_ = std::make_unique<EventLog>(path);
}

}  // namespace qox
