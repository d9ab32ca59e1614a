// Core domain types of the QoX fabric: identities, quality dimensions,
// feedback, ratings, reviews, interaction and security records.
// All types are immutable values after construction and safe to share
// across threads. Canonical wire/file form is a flat JSON object per type,
// enums as lowercase snake_case strings.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qox {

using json = nlohmann::json;

// Logical time: non-negative integer units (e.g. seconds). No wall clock.
using Timestamp = std::uint64_t;

// Error with a stable string code; the codes double as the "error" field
// of the request/response envelope.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* invalid_value = "invalid_value";
inline constexpr const char* parse_error = "parse_error";
inline constexpr const char* validation_error = "validation_error";
inline constexpr const char* unknown_identity = "unknown_identity";
inline constexpr const char* not_vouched = "not_vouched";
inline constexpr const char* stale_timestamp = "stale_timestamp";
inline constexpr const char* self_interaction = "self_interaction";
inline constexpr const char* invalid_pattern = "invalid_pattern";
inline constexpr const char* empty_credential = "empty_credential";
inline constexpr const char* config_error = "config_error";
inline constexpr const char* io_error = "io_error";
inline constexpr const char* unknown_op = "unknown_op";
}  // namespace errc

enum class IdentityKind { provider, consumer };

enum class Side { qos, qoc };

enum class Dimension {
    // QoS
    performance,
    dependability,
    cost,
    // QoC
    purchase_power,
    code_efficiency,
    threat,
};

enum class RecordKind { traffic_burst, crash, packet_sent, port_scan, dos_alert };

enum class VerifiedStatus { unchecked, verified, unverifiable };

std::string to_string(IdentityKind k);
std::string to_string(Side s);
std::string to_string(Dimension d);
std::string to_string(RecordKind k);
std::string to_string(VerifiedStatus v);

IdentityKind identity_kind_from_string(const std::string& s);
Side side_from_string(const std::string& s);
Dimension dimension_from_string(const std::string& s);
RecordKind record_kind_from_string(const std::string& s);
VerifiedStatus verified_status_from_string(const std::string& s);

// Opaque identity token issued by the vouching authority.
struct IdentityId {
    std::string id;
    IdentityKind kind = IdentityKind::consumer;

    void validate() const;

    friend bool operator==(const IdentityId& a, const IdentityId& b) {
        return a.id == b.id && a.kind == b.kind;
    }
    // Ids are globally unique, so the token alone orders identities.
    friend bool operator<(const IdentityId& a, const IdentityId& b) { return a.id < b.id; }
};

struct QualityDimension {
    Side side = Side::qos;
    Dimension dimension = Dimension::performance;
    std::string metric;

    void validate() const;
};

// One normalized observation about a counterparty. score 1.0 is the best
// possible observation; negative events map to low scores, never below 0.
struct FeedbackEvent {
    IdentityId observer;
    IdentityId subject;
    QualityDimension dimension;
    double score = 0.0;   // [0,1]
    double weight = 1.0;  // (0,1]
    Timestamp timestamp = 0;
    std::string note;

    void validate() const;
};

struct ReviewText {
    std::string text;
    std::vector<std::string> tags;  // deduplicated, sorted lexicographically

    void validate() const;
};

struct Rating {
    IdentityId rater;
    IdentityId ratee;
    double value = 0.0;  // [0,1]
    Timestamp timestamp = 0;
    ReviewText review;

    void validate() const;
};

struct AggregateRating {
    IdentityId ratee;
    std::optional<double> mean;  // absent iff count == 0
    std::uint64_t count = 0;

    void validate() const;
};

// Ledger entry proving two identities actually communicated.
// Direction-agnostic: (a,b) and (b,a) are the same pair.
struct InteractionRecord {
    IdentityId a;
    IdentityId b;
    std::uint64_t packets = 1;
    Timestamp timestamp = 0;

    void validate() const;
};

// A shared, individually verifiable security event.
struct SpecificRecord {
    IdentityId reporter;
    IdentityId subject;
    RecordKind kind = RecordKind::dos_alert;
    std::map<std::string, std::string> detail;  // e.g. src, dst, count, window
    Timestamp timestamp = 0;
    VerifiedStatus verified = VerifiedStatus::unchecked;

    void validate() const;
};

// Constraints the vouching authority checks before certifying a record.
// src/dst are exact values or the "*" wildcard (empty also means any).
struct PatternParams {
    std::uint64_t min_count = 1;
    std::uint64_t window = 1;
    std::string src = "*";
    std::string dst = "*";
};

struct EvidencePattern {
    IdentityId owner;
    RecordKind kind = RecordKind::traffic_burst;
    PatternParams params;

    void validate() const;
};

// min(1, max(0, x)); rejects non-finite input.
double clamp_rating(double x);

// True iff the dimension belongs to the side (QoS and QoC never mix).
bool validate_dimension(Side side, Dimension dimension);

void to_json(json& j, const IdentityId& v);
void from_json(const json& j, IdentityId& v);
void to_json(json& j, const QualityDimension& v);
void from_json(const json& j, QualityDimension& v);
void to_json(json& j, const FeedbackEvent& v);
void from_json(const json& j, FeedbackEvent& v);
void to_json(json& j, const ReviewText& v);
void from_json(const json& j, ReviewText& v);
void to_json(json& j, const Rating& v);
void from_json(const json& j, Rating& v);
void to_json(json& j, const AggregateRating& v);
void from_json(const json& j, AggregateRating& v);
void to_json(json& j, const InteractionRecord& v);
void from_json(const json& j, InteractionRecord& v);
void to_json(json& j, const SpecificRecord& v);
void from_json(const json& j, SpecificRecord& v);
void to_json(json& j, const EvidencePattern& v);
void from_json(const json& j, EvidencePattern& v);

}  // namespace qox
