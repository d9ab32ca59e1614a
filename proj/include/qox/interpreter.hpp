// The Quality Interpreter: loads a component/mapping configuration,
// converts raw sensor output into feedback events, computes time-decayed
// ratings with machine-generated reviews, and maps ratings to executor
// actions. Pure functions over immutable inputs; callers own the per-subject
// event stores.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qox/adapters.hpp"
#include "qox/model.hpp"

namespace qox {

enum class ComponentKind { service, executor, sensor };

std::string to_string(ComponentKind k);
ComponentKind component_kind_from_string(const std::string& s);

struct Component {
    std::string name;
    std::string address;
    ComponentKind kind = ComponentKind::sensor;
    std::string description;
    std::vector<std::string> tasks;
};

enum class Cmp { lt, le, gt, ge, eq };

std::string to_string(Cmp c);
Cmp cmp_from_string(const std::string& s);
bool cmp_eval(Cmp c, double lhs, double rhs);

// What a mapping rule matches on. Rules are ordered; for feedback mapping
// the first match wins, for rating-to-action mapping every holding rule
// contributes.
struct MatchDimension {
    Dimension dimension;
};
struct MatchSignature {
    std::int64_t sig_id;
};
struct MatchPriority {
    Cmp cmp;
    std::int64_t value;
};
struct MatchRating {
    Cmp cmp;
    double value;
};
using RuleMatch = std::variant<MatchDimension, MatchSignature, MatchPriority, MatchRating>;

// Action labels: "assign_pool:<pool>", "redirect:<target>", "block",
// "alert_admin".
struct MappingRule {
    RuleMatch match;
    std::optional<double> score;   // [0,1], required for feedback matches
    std::optional<double> weight;  // (0,1], required for feedback matches
    std::optional<std::string> action;

    void validate() const;
};

enum class ActionKind { assign_pool, block, redirect, alert_admin };

std::string to_string(ActionKind k);

struct ActionDirective {
    ActionKind kind = ActionKind::alert_admin;
    IdentityId subject;
    std::map<std::string, std::string> params;
};

struct InterpreterConfig {
    std::vector<Component> components;
    std::vector<MappingRule> mapping;
    Timestamp decay_half_life = 3600;
    double prior_value = 0.5;
    double prior_weight = 1.0;
    // Catch-all for feedback no rule matches: mildly negative.
    double default_score = 0.25;
    double default_weight = 0.5;
    // Identity context for the batch pipeline: who observes, and how alert
    // source addresses map to subjects. Unmapped addresses fall back to
    // unknown_subject.
    IdentityId observer{"observer", IdentityKind::provider};
    IdentityId unknown_subject{"unknown", IdentityKind::consumer};
    std::map<std::string, IdentityId> addresses;

    void validate() const;
};

// Parses and validates one JSON configuration document, filling defaults
// for absent optional fields.
InterpreterConfig load_config(const std::string& document);

void to_json(json& j, const InterpreterConfig& v);

// A sampled QoS/QoC metric bound to the identities it is about.
struct MetricSample {
    IdentityId observer;
    IdentityId subject;
    QualityDimension dimension;
    double value = 0.0;
    Timestamp timestamp = 0;
};

// A parsed IDS alert bound to the identities it is about.
struct AlertObservation {
    NormalizedAlert alert;
    IdentityId observer;
    IdentityId subject;
};

using Observation = std::variant<AlertObservation, MetricSample>;

// First matching rule supplies score and weight; the catch-all default
// guarantees a result. The event note carries the raw message text.
FeedbackEvent apply_mapping(const Observation& raw, std::span<const MappingRule> rules,
                            double default_score, double default_weight);
FeedbackEvent apply_mapping(const Observation& raw, const InterpreterConfig& config);

// Decayed, prior-smoothed weighted mean over one subject's events:
//   value = (prior_value*prior_weight + sum(score_i*weight_i*d_i))
//         / (prior_weight + sum(weight_i*d_i)),  d_i = 2^-((now-t_i)/half_life)
// clamped to [0,1]. Events must all be observer->subject pairs matching
// rater/ratee with timestamps <= now. The result is invariant under
// permutation of the event list.
Rating compute_rating(const IdentityId& rater, const IdentityId& ratee,
                      std::span<const FeedbackEvent> events, Timestamp now,
                      const InterpreterConfig& config);

// Deterministic template "rating=<value> events=<n>; " followed by the
// distinct non-empty event notes in timestamp order, joined by "; ".
// Tags are the deduplicated sorted tokens of all notes.
ReviewText generate_review(std::span<const FeedbackEvent> events, double rating_value);

// Tokenization for tags: lowercase, split on non-alphanumeric, drop tokens
// shorter than 3 characters.
std::vector<std::string> tokenize_note(const std::string& note);

// Every rule whose rating-threshold condition holds contributes one
// directive, in rule order. Rules without a rating match are ignored.
std::vector<ActionDirective> map_rating_to_actions(const Rating& rating,
                                                   std::span<const MappingRule> rules);

}  // namespace qox
