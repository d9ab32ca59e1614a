// Deterministic desk-scale marketplace: providers and consumers exchange
// ratings through the exchange+vouching stack (driven over the loopback
// envelope), discovery ranks providers, selections earn unit-priced
// revenue, and sybil scenarios compare vouched against unguarded
// submission. Single-threaded; byte-identical outcomes per seed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qox/api.hpp"
#include "qox/model.hpp"

namespace qox {

struct MarketParams {
    std::vector<double> provider_qualities{0.2, 0.4, 0.6, 0.8};
    std::uint64_t consumers = 100;
    std::uint64_t rounds = 100;
    std::uint64_t seed = 42;
    std::uint64_t price_per_selection = 1;
    // Probability the consumer picks the 1st/2nd/3rd/... ranked result;
    // ranks past the list carry zero mass.
    std::vector<double> rank_probabilities{0.85, 0.10, 0.05};

    void validate() const;
};

struct MarketOutcome {
    std::map<std::string, std::uint64_t> revenue;     // provider id -> units
    std::map<std::string, std::uint64_t> selections;  // provider id -> count
    std::uint64_t rounds_run = 0;
    // Configured quality per provider, kept for reporting.
    std::map<std::string, double> provider_quality;
};

void to_json(json& j, const MarketOutcome& v);

struct SybilParams {
    std::uint64_t honest_raters = 3;
    double honest_value = 0.2;
    std::uint64_t fake_identities = 0;
    double fake_value = 1.0;
    bool vouching_enabled = true;

    void validate() const;
};

struct SybilOutcome {
    double aggregate_mean = 0.0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
};

void to_json(json& j, const SybilOutcome& v);

// First min(ranked_count, |probabilities|) base probabilities, zero-padded
// to ranked_count, renormalized to sum exactly 1.
std::vector<double> selection_distribution(std::size_t ranked_count,
                                           std::span<const double> rank_probabilities);

// Runs the market through the given stack (a fresh one when null). Each
// provider's aggregate is seeded to its quality by one vouched bootstrap
// rater; each round every consumer discovers, samples a provider by rank,
// records a vouched interaction, pays, and rates the provider at its
// quality.
MarketOutcome run_market(const MarketParams& params, ServiceStack* stack = nullptr);

// Honest raters interact and rate honest_value. Fakes attempt fake_value:
// with vouching on they share one credential and have no ledger backing, so
// every attempt is rejected; with vouching off the exchange skips both
// checks and accepts all of them.
SybilOutcome run_sybil(const SybilParams& params, ServiceStack* stack = nullptr);

// Writes the outcome as a JSON report (annotated with the RNG algorithm
// and seed) plus a sibling .csv "provider,quality,selections,revenue"
// sorted by provider id. Identical outcomes produce byte-identical files.
void write_report(const MarketOutcome& outcome, std::uint64_t seed,
                  const std::filesystem::path& json_path);

// Sybil reports are JSON only.
void write_report(const SybilOutcome& outcome, const std::filesystem::path& json_path);

}  // namespace qox
