#include <doctest.h>

#include "qox/api.hpp"
#include "qox/http.hpp"

#include <cstdio>
#include <filesystem>
#include <thread>

using namespace qox;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("qox-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

json register_req(const std::string& credential, const char* kind) {
    return json{{"op", "register"}, {"credential", credential}, {"kind", kind}};
}

json rating_req(const IdentityId& rater, const IdentityId& ratee, double value,
                Timestamp t) {
    json req(Rating{rater, ratee, value, t, ReviewText{"review", {"dos"}}});
    req["op"] = "submit_rating";
    return req;
}

}  // namespace

TEST_CASE("the envelope carries canonical bodies plus op, and string error codes") {
    ServiceStack stack;

    const json registered = stack.handle(register_req("cc-1", "provider"));
    CHECK(registered.at("op") == "register");
    CHECK(registered.at("kind") == "provider");
    const auto provider = registered.get<IdentityId>();

    const json consumer_resp = stack.handle(register_req("cc-2", "consumer"));
    const auto consumer = consumer_resp.get<IdentityId>();

    SUBCASE("unvouched submission returns the pinned code, state untouched") {
        const json resp = stack.handle(rating_req(consumer, provider, 0.8, 1));
        CHECK(resp.at("error") == "not_vouched");
        const json aggregate =
            stack.handle(json{{"op", "get_aggregate"}, {"ratee", provider}});
        CHECK(aggregate.at("count") == 0);
        CHECK_FALSE(aggregate.contains("mean"));
    }
    SUBCASE("unknown identity code") {
        const IdentityId ghost{"ghost", IdentityKind::consumer};
        const json resp = stack.handle(rating_req(ghost, provider, 0.8, 1));
        CHECK(resp.at("error") == "unknown_identity");
    }
    SUBCASE("stale timestamp code") {
        stack.handle(json{{"op", "record_interaction"}, {"a", consumer},
                          {"b", provider}, {"packets", 3}, {"timestamp", 0}});
        CHECK_FALSE(stack.handle(rating_req(consumer, provider, 0.8, 5)).contains("error"));
        const json stale = stack.handle(rating_req(consumer, provider, 0.9, 2));
        CHECK(stale.at("error") == "stale_timestamp");
    }
    SUBCASE("unknown op and malformed bodies do not crash the dispatcher") {
        CHECK(stack.handle(json{{"op", "explode"}}).at("error") == "unknown_op");
        CHECK(stack.handle(json{{"op", "submit_rating"}}).at("error") ==
              "validation_error");
        CHECK(stack.handle(json::object()).at("error") == "unknown_op");
    }
}

TEST_CASE("vouching ops round-trip through the envelope") {
    ServiceStack stack;
    const auto a = stack.handle(register_req("cc-a", "consumer")).get<IdentityId>();
    const auto b = stack.handle(register_req("cc-b", "provider")).get<IdentityId>();

    CHECK(stack
              .handle(json{{"op", "has_interacted"}, {"a", a}, {"b", b},
                           {"min_packets", 1}})
              .at("result") == false);
    stack.handle(json{{"op", "record_interaction"}, {"a", a}, {"b", b},
                      {"packets", 7}, {"timestamp", 1}});
    CHECK(stack
              .handle(json{{"op", "has_interacted"}, {"a", b}, {"b", a},
                           {"min_packets", 7}})
              .at("result") == true);

    const json pattern_resp = stack.handle(json{
        {"op", "register_pattern"},
        {"owner", b},
        {"kind", "traffic_burst"},
        {"params", json{{"min_count", 5}, {"window", 10}, {"src", "*"}, {"dst", "*"}}}});
    CHECK(pattern_resp.contains("pattern_id"));

    json verify_req(SpecificRecord{b, a, RecordKind::traffic_burst, {}, 5,
                                   VerifiedStatus::unchecked});
    verify_req["op"] = "verify_record";
    CHECK(stack.handle(verify_req).at("verified") == "verified");

    json is_reg(a);
    is_reg["op"] = "is_registered";
    CHECK(stack.handle(is_reg).at("result") == true);
}

TEST_CASE("exchange query ops round-trip through the envelope") {
    ServiceStack stack;
    const auto p = stack.handle(register_req("cc-p", "provider")).get<IdentityId>();
    const auto c = stack.handle(register_req("cc-c", "consumer")).get<IdentityId>();
    stack.handle(json{{"op", "record_interaction"}, {"a", c}, {"b", p},
                      {"packets", 1}, {"timestamp", 0}});
    stack.handle(rating_req(c, p, 0.8, 1));

    const json reviews = stack.handle(json{{"op", "list_reviews"}, {"ratee", p}});
    REQUIRE(reviews.at("reviews").size() == 1);
    CHECK(reviews.at("reviews")[0].at("value") == 0.8);

    const json tags =
        stack.handle(json{{"op", "extract_common_tags"}, {"ratee", p}, {"min_support", 1}});
    CHECK(tags.at("tags") == json::array({"dos"}));

    const json discovered = stack.handle(
        json{{"op", "discover"}, {"catalog", json::array({p})}, {"min_rating", 0.0}});
    REQUIRE(discovered.at("providers").size() == 1);

    stack.handle(json{{"op", "watch_rating"}, {"subject", p}, {"threshold_drop", 0.1}});
    const auto c2 = stack.handle(register_req("cc-c2", "consumer")).get<IdentityId>();
    stack.handle(json{{"op", "record_interaction"}, {"a", c2}, {"b", p},
                      {"packets", 1}, {"timestamp", 1}});
    stack.handle(rating_req(c2, p, 0.2, 2));  // mean 0.8 -> 0.5
    const json alerts = stack.handle(json{{"op", "poll_alerts"}});
    REQUIRE(alerts.at("alerts").size() == 1);
    CHECK(alerts.at("alerts")[0].at("old_mean") == 0.8);
    CHECK(stack.handle(json{{"op", "poll_alerts"}}).at("alerts").empty());
}

TEST_CASE("the event log replays to an identical state") {
    TempDir dir;
    const auto log_path = dir.path / "state.jsonl";

    IdentityId provider;
    IdentityId consumer;
    double mean_before = 0.0;
    {
        ServiceStack stack;
        stack.attach_log(log_path);
        provider = stack.handle(register_req("cc-p", "provider")).get<IdentityId>();
        consumer = stack.handle(register_req("cc-c", "consumer")).get<IdentityId>();
        stack.handle(json{{"op", "record_interaction"}, {"a", consumer}, {"b", provider},
                          {"packets", 4}, {"timestamp", 0}});
        stack.handle(rating_req(consumer, provider, 0.7, 1));
        stack.handle(json{{"op", "register_pattern"},
                          {"owner", provider},
                          {"kind", "dos_alert"},
                          {"params", json{{"min_count", 2}, {"window", 5}}}});
        json record_req(SpecificRecord{provider, consumer, RecordKind::dos_alert,
                                       {}, 2, VerifiedStatus::unchecked});
        record_req["op"] = "submit_record";
        CHECK(stack.handle(record_req).at("verified") == "verified");
        // A rejected submission must not be logged.
        const auto ghost_resp =
            stack.handle(rating_req({"ghost", IdentityKind::consumer}, provider, 0.1, 1));
        CHECK(ghost_resp.contains("error"));
        mean_before = stack.handle(json{{"op", "get_aggregate"}, {"ratee", provider}})
                          .at("mean")
                          .get<double>();
    }

    ServiceStack replayed;
    replayed.attach_log(log_path);
    const json aggregate =
        replayed.handle(json{{"op", "get_aggregate"}, {"ratee", provider}});
    CHECK(aggregate.at("count") == 1);
    CHECK(aggregate.at("mean").get<double>() == mean_before);
    CHECK(replayed
              .handle(json{{"op", "has_interacted"}, {"a", consumer}, {"b", provider},
                           {"min_packets", 4}})
              .at("result") == true);
    const json records = replayed.handle(json{{"op", "query_records"}});
    REQUIRE(records.at("records").size() == 1);
    CHECK(records.at("records")[0].at("verified") == "verified");

    // The replayed stack keeps appending: one more mutation, one more line.
    const auto lines_before = EventLog::read_all(log_path).size();
    replayed.handle(json{{"op", "record_interaction"}, {"a", consumer}, {"b", provider},
                         {"packets", 1}, {"timestamp", 2}});
    CHECK(EventLog::read_all(log_path).size() == lines_before + 1);
}

TEST_CASE("a corrupt event log is refused") {
    TempDir dir;
    const auto log_path = dir.path / "state.jsonl";
    {
        std::ofstream out(log_path);
        out << "{\"op\": \"register\", \"credential\": \"cc\", \"kind\": \"provider\"}\n";
        out << "not json\n";
    }
    ServiceStack stack;
    CHECK_THROWS_WITH_AS(stack.attach_log(log_path), doctest::Contains("line 2"), Error);
}

TEST_CASE("the socket binding serves the same envelope") {
    ServiceStack stack;
    HttpApiServer server(stack);
    int port = 0;
    try {
        port = server.bind("127.0.0.1", 0);
    } catch (const Error&) {
        return;  // sandbox without loopback listen; covered by loopback tests
    }
    std::thread loop([&] { server.run(); });

    {
        HttpTransport client("127.0.0.1", port);
        const auto provider =
            client.roundtrip(register_req("cc-p", "provider")).get<IdentityId>();
        const auto consumer =
            client.roundtrip(register_req("cc-c", "consumer")).get<IdentityId>();
        client.roundtrip(json{{"op", "record_interaction"}, {"a", consumer},
                              {"b", provider}, {"packets", 2}, {"timestamp", 0}});
        CHECK_FALSE(
            client.roundtrip(rating_req(consumer, provider, 0.9, 1)).contains("error"));
        const json aggregate =
            client.roundtrip(json{{"op", "get_aggregate"}, {"ratee", provider}});
        CHECK(aggregate.at("mean") == 0.9);
        CHECK(client.roundtrip(json{{"op", "nope"}}).at("error") == "unknown_op");
    }

    server.stop();
    loop.join();
}
