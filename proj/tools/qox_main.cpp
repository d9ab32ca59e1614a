// qox: command-line front door for the QoX fabric.
//   qox sim market   -- rating-driven marketplace simulation
//   qox sim sybil    -- sybil attack scenario, vouching on/off
//   qox serve        -- exchange+vouching over the socket binding
//   qox interpret    -- batch quality-interpreter run over a fast-alert file
// Exit codes: 0 success, 1 validation error, 2 I/O error.
// Every flag can also come from the environment as QOX_<FLAG>.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qox/api.hpp"
#include "qox/http.hpp"
#include "qox/interpreter.hpp"
#include "qox/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qox::Error(qox::errc::io_error, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

qox::IdentityId subject_for_alert(const qox::NormalizedAlert& alert,
                                  const qox::InterpreterConfig& config) {
    if (const auto it = config.addresses.find(alert.src); it != config.addresses.end())
        return it->second;
    // Fall back to the bare address when the table has no port-qualified
    // entry.
    if (const auto colon = alert.src.find(':'); colon != std::string::npos) {
        const std::string bare = alert.src.substr(0, colon);
        if (const auto it = config.addresses.find(bare); it != config.addresses.end())
            return it->second;
    }
    return config.unknown_subject;
}

int run_interpret(const std::string& config_path, const std::string& alerts_path,
                  const std::string& out_path) {
    const qox::InterpreterConfig config = qox::load_config(read_file(config_path));

    std::ifstream alerts_in(alerts_path, std::ios::binary);
    if (!alerts_in) throw qox::Error(qox::errc::io_error, "cannot open " + alerts_path);

    std::map<std::string, std::pair<qox::IdentityId, std::vector<qox::FeedbackEvent>>>
        events_by_subject;
    qox::Timestamp now = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(alerts_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        qox::NormalizedAlert alert;
        try {
            alert = qox::parse_alert_line(line);
        } catch (const qox::AlertParseError& e) {
            throw qox::Error(qox::errc::validation_error,
                             alerts_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        now = std::max(now, alert.timestamp);
        const qox::IdentityId subject = subject_for_alert(alert, config);
        const qox::FeedbackEvent event = qox::apply_mapping(
            qox::AlertObservation{std::move(alert), config.observer, subject}, config);
        auto& bucket = events_by_subject[subject.id];
        bucket.first = subject;
        bucket.second.push_back(event);
    }

    qox::json ratings = qox::json::array();
    for (const auto& [subject_id, bucket] : events_by_subject) {
        ratings.push_back(qox::compute_rating(config.observer, bucket.first,
                                              bucket.second, now, config));
    }

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw qox::Error(qox::errc::io_error, "cannot open " + out_path);
    out << ratings.dump(2) << "\n";
    if (!out) throw qox::Error(qox::errc::io_error, "write to " + out_path + " failed");
    std::cout << "wrote " << ratings.size() << " ratings to " << out_path << "\n";
    return kExitOk;
}

int run_serve(const std::string& state_path, const std::string& host, int port) {
    qox::ServiceStack stack;
    if (!state_path.empty()) stack.attach_log(state_path);
    qox::HttpApiServer server(stack);
    const int bound = server.bind(host, port);
    std::cout << "qox exchange+vouching listening on " << host << ":" << bound << "\n";
    server.run();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QoX fabric: ratings, vouching, and the desk-scale market simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "deterministic simulations");
    sim->require_subcommand(1);

    // sim market
    auto* market = sim->add_subcommand("market", "rating-driven marketplace");
    qox::MarketParams market_params;
    std::string market_out = "results.json";
    market->add_option("--qualities", market_params.provider_qualities,
                       "provider quality levels")
        ->delimiter(',')
        ->envname("QOX_QUALITIES");
    market->add_option("--consumers", market_params.consumers, "number of consumers")
        ->envname("QOX_CONSUMERS");
    market->add_option("--rounds", market_params.rounds, "number of rounds")
        ->envname("QOX_ROUNDS");
    market->add_option("--seed", market_params.seed, "rng seed")->envname("QOX_SEED");
    market->add_option("--price", market_params.price_per_selection,
                       "units earned per selection")
        ->envname("QOX_PRICE");
    market->add_option("--rank-probabilities", market_params.rank_probabilities,
                       "selection probability by rank")
        ->delimiter(',')
        ->envname("QOX_RANK_PROBABILITIES");
    market->add_option("--out", market_out, "report path (.csv written alongside)")
        ->envname("QOX_OUT");

    // sim sybil
    auto* sybil = sim->add_subcommand("sybil", "sybil attack scenario");
    qox::SybilParams sybil_params;
    std::string sybil_out = "sybil.json";
    std::string vouching_flag = "on";
    sybil->add_option("--honest", sybil_params.honest_raters, "honest rater count")
        ->envname("QOX_HONEST");
    sybil->add_option("--honest-value", sybil_params.honest_value, "honest rating value")
        ->envname("QOX_HONEST_VALUE");
    sybil->add_option("--fakes", sybil_params.fake_identities, "fake identity count")
        ->envname("QOX_FAKES");
    sybil->add_option("--fake-value", sybil_params.fake_value, "fake rating value")
        ->envname("QOX_FAKE_VALUE");
    sybil->add_option("--vouching", vouching_flag, "on|off")
        ->check(CLI::IsMember({"on", "off"}))
        ->envname("QOX_VOUCHING");
    sybil->add_option("--out", sybil_out, "report path")->envname("QOX_OUT");

    // serve
    auto* serve = app.add_subcommand("serve", "run the services over a socket");
    std::string state_path;
    std::string host = "127.0.0.1";
    int port = 7878;
    serve->add_option("--state", state_path, "JSON-lines event log to replay and append")
        ->envname("QOX_STATE");
    serve->add_option("--host", host, "bind address")->envname("QOX_HOST");
    serve->add_option("--port", port, "bind port (0 picks a free one)")
        ->envname("QOX_PORT");

    // interpret
    auto* interpret = app.add_subcommand("interpret", "batch interpreter over alerts");
    std::string config_path;
    std::string alerts_path;
    std::string ratings_out = "ratings.json";
    interpret->add_option("--config", config_path, "interpreter configuration")
        ->required()
        ->envname("QOX_CONFIG");
    interpret->add_option("--alerts", alerts_path, "fast-alert log file")
        ->required()
        ->envname("QOX_ALERTS");
    interpret->add_option("--out", ratings_out, "output ratings path")
        ->envname("QOX_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (market->parsed()) {
            const qox::MarketOutcome outcome = qox::run_market(market_params);
            qox::write_report(outcome, market_params.seed, market_out);
            std::cout << "wrote " << market_out << "\n";
            return kExitOk;
        }
        if (sybil->parsed()) {
            sybil_params.vouching_enabled = vouching_flag == "on";
            const qox::SybilOutcome outcome = qox::run_sybil(sybil_params);
            qox::write_report(outcome, sybil_out);
            std::cout << "wrote " << sybil_out << "\n";
            return kExitOk;
        }
        if (serve->parsed()) return run_serve(state_path, host, port);
        if (interpret->parsed())
            return run_interpret(config_path, alerts_path, ratings_out);
    } catch (const qox::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == qox::errc::io_error ? kExitIo : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
