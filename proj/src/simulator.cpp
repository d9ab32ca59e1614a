#include "qox/simulator.hpp"

#include <cmath>
#include <cstdio>

#include "qox/interpreter.hpp"
#include "qox/rng.hpp"

namespace qox {

namespace {

void require(bool ok, const char* code, const std::string& message) {
    if (!ok) throw Error(code, message);
}

void require_unit(double x, const char* field) {
    require(std::isfinite(x) && x >= 0.0 && x <= 1.0, errc::invalid_value,
            std::string(field) + " must lie in [0,1]");
}

// Envelope call that treats any error response as fatal: the simulator only
// issues requests it expects to succeed.
json call(ServiceStack& stack, json request) {
    json response = stack.handle(std::move(request));
    if (response.contains("error")) {
        throw Error(response.at("error").get<std::string>(),
                    "simulation request failed: " + response.value("message", ""));
    }
    return response;
}

IdentityId register_identity(ServiceStack& stack, const std::string& credential,
                             IdentityKind kind) {
    return call(stack, json{{"op", "register"},
                            {"credential", credential},
                            {"kind", to_string(kind)}})
        .get<IdentityId>();
}

void record_interaction(ServiceStack& stack, const IdentityId& a, const IdentityId& b,
                        Timestamp t) {
    call(stack, json{{"op", "record_interaction"},
                     {"a", a},
                     {"b", b},
                     {"packets", 1},
                     {"timestamp", t}});
}

json rating_request(const IdentityId& rater, const IdentityId& ratee, double value,
                    Timestamp t) {
    json request(Rating{rater, ratee, value, t, generate_review({}, value)});
    request["op"] = "submit_rating";
    return request;
}

std::string number_repr(double v) { return json(v).dump(); }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(errc::io_error, "write to " + path.string() + " failed");
}

std::filesystem::path csv_sibling(const std::filesystem::path& json_path) {
    std::filesystem::path p = json_path;
    p.replace_extension(".csv");
    return p;
}

}  // namespace

void MarketParams::validate() const {
    require(!provider_qualities.empty(), errc::invalid_value,
            "provider_qualities must be non-empty");
    for (const double q : provider_qualities) require_unit(q, "provider quality");
    require(consumers >= 1, errc::invalid_value, "consumers must be >= 1");
    require(rounds >= 1, errc::invalid_value, "rounds must be >= 1");
    require(price_per_selection >= 1, errc::invalid_value,
            "price_per_selection must be >= 1");
    double sum = 0.0;
    for (const double p : rank_probabilities) {
        require(std::isfinite(p) && p >= 0.0, errc::invalid_value,
                "rank probabilities must be non-negative");
        sum += p;
    }
    require(sum <= 1.0 + 1e-9, errc::invalid_value,
            "rank probabilities must sum to at most 1");
}

void SybilParams::validate() const {
    require(honest_raters >= 1, errc::invalid_value, "honest_raters must be >= 1");
    require_unit(honest_value, "honest_value");
    require_unit(fake_value, "fake_value");
}

void to_json(json& j, const MarketOutcome& v) {
    j = json{{"revenue", v.revenue},
             {"selections", v.selections},
             {"rounds_run", v.rounds_run},
             {"provider_quality", v.provider_quality}};
}

void to_json(json& j, const SybilOutcome& v) {
    j = json{{"aggregate_mean", v.aggregate_mean},
             {"accepted", v.accepted},
             {"rejected", v.rejected}};
}

std::vector<double> selection_distribution(std::size_t ranked_count,
                                           std::span<const double> rank_probabilities) {
    require(ranked_count >= 1, errc::invalid_value, "ranked_count must be >= 1");
    std::vector<double> out(ranked_count, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < ranked_count && i < rank_probabilities.size(); ++i) {
        out[i] = rank_probabilities[i];
        sum += out[i];
    }
    if (sum <= 0.0) {
        // No mass in the prefix; degrade to uniform.
        const double uniform = 1.0 / static_cast<double>(ranked_count);
        for (double& p : out) p = uniform;
        return out;
    }
    for (double& p : out) p /= sum;
    return out;
}

MarketOutcome run_market(const MarketParams& params, ServiceStack* stack) {
    params.validate();
    ServiceStack local;
    ServiceStack& services = stack != nullptr ? *stack : local;
    Rng rng(params.seed);

    const std::size_t provider_count = params.provider_qualities.size();
    std::vector<IdentityId> providers;
    std::map<std::string, double> quality_of;
    providers.reserve(provider_count);
    for (std::size_t i = 0; i < provider_count; ++i) {
        const IdentityId provider = register_identity(
            services, "provider-cc-" + std::to_string(i), IdentityKind::provider);
        quality_of[provider.id] = params.provider_qualities[i];
        providers.push_back(provider);
    }

    // One vouched bootstrap rating pins each provider's aggregate to its
    // quality before round 1 discovery.
    for (std::size_t i = 0; i < provider_count; ++i) {
        const IdentityId bootstrap = register_identity(
            services, "bootstrap-cc-" + std::to_string(i), IdentityKind::consumer);
        record_interaction(services, bootstrap, providers[i], 0);
        call(services,
             rating_request(bootstrap, providers[i], params.provider_qualities[i], 0));
    }

    std::vector<IdentityId> consumers;
    consumers.reserve(params.consumers);
    for (std::uint64_t k = 0; k < params.consumers; ++k) {
        consumers.push_back(register_identity(
            services, "consumer-cc-" + std::to_string(k), IdentityKind::consumer));
    }

    MarketOutcome outcome;
    outcome.provider_quality = quality_of;
    for (const auto& provider : providers) {
        outcome.revenue[provider.id] = 0;
        outcome.selections[provider.id] = 0;
    }

    json discover_request{{"op", "discover"}, {"catalog", providers}, {"min_rating", 0.0}};
    for (std::uint64_t round = 0; round < params.rounds; ++round) {
        const Timestamp t = round + 1;
        for (const auto& consumer : consumers) {
            const auto ranked =
                call(services, discover_request).at("providers").get<std::vector<IdentityId>>();
            const auto distribution =
                selection_distribution(ranked.size(), params.rank_probabilities);
            const IdentityId& chosen = ranked[rng.sample(distribution)];
            record_interaction(services, consumer, chosen, t);
            outcome.selections[chosen.id] += 1;
            outcome.revenue[chosen.id] += params.price_per_selection;
            call(services, rating_request(consumer, chosen, quality_of[chosen.id], t));
        }
    }
    outcome.rounds_run = params.rounds;
    return outcome;
}

SybilOutcome run_sybil(const SybilParams& params, ServiceStack* stack) {
    params.validate();
    ServiceStack local(ExchangeOptions{1, params.vouching_enabled});
    ServiceStack& services = stack != nullptr ? *stack : local;

    const IdentityId target =
        register_identity(services, "target-cc", IdentityKind::provider);

    SybilOutcome outcome;
    for (std::uint64_t i = 0; i < params.honest_raters; ++i) {
        const IdentityId rater = register_identity(
            services, "honest-cc-" + std::to_string(i), IdentityKind::consumer);
        record_interaction(services, rater, target, 1);
        call(services, rating_request(rater, target, params.honest_value, 1));
        outcome.accepted += 1;
    }

    for (std::uint64_t k = 0; k < params.fake_identities; ++k) {
        IdentityId fake;
        if (params.vouching_enabled) {
            // All fakes hold the same credential: the authority hands back
            // one identity, and that identity has no ledger interactions.
            fake = register_identity(services, "sybil-cc", IdentityKind::consumer);
        } else {
            char buf[24];
            std::snprintf(buf, sizeof buf, "fake-%06llu",
                          static_cast<unsigned long long>(k + 1));
            fake = IdentityId{buf, IdentityKind::consumer};
        }
        const json response =
            services.handle(rating_request(fake, target, params.fake_value, 1));
        if (response.contains("error")) {
            outcome.rejected += 1;
        } else {
            outcome.accepted += 1;
        }
    }

    const json aggregate =
        call(services, json{{"op", "get_aggregate"}, {"ratee", target}});
    outcome.aggregate_mean = aggregate.at("mean").get<double>();
    return outcome;
}

void write_report(const MarketOutcome& outcome, std::uint64_t seed,
                  const std::filesystem::path& json_path) {
    json report(outcome);
    report["rng_algorithm"] = Rng::algorithm;
    report["seed"] = seed;
    write_text_file(json_path, report.dump(2) + "\n");

    std::string csv = "provider,quality,selections,revenue\n";
    for (const auto& [provider, quality] : outcome.provider_quality) {
        const auto selections =
            outcome.selections.count(provider) ? outcome.selections.at(provider) : 0;
        const auto revenue =
            outcome.revenue.count(provider) ? outcome.revenue.at(provider) : 0;
        csv += provider + "," + number_repr(quality) + "," + std::to_string(selections) +
               "," + std::to_string(revenue) + "\n";
    }
    write_text_file(csv_sibling(json_path), csv);
}

void write_report(const SybilOutcome& outcome, const std::filesystem::path& json_path) {
    write_text_file(json_path, json(outcome).dump(2) + "\n");
}

}  // namespace qox
