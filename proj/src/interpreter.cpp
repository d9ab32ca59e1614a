#include "qox/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

namespace qox {

namespace {

std::string format_value_2dp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void require(bool ok, const char* code, const std::string& message) {
    if (!ok) throw Error(code, message);
}

struct ObservationView {
    const IdentityId* observer;
    const IdentityId* subject;
    QualityDimension dimension;
    Timestamp timestamp;
    std::string note;
    const NormalizedAlert* alert;  // null for metric samples
};

ObservationView view_of(const Observation& raw) {
    if (const auto* a = std::get_if<AlertObservation>(&raw)) {
        return {&a->observer, &a->subject,
                QualityDimension{Side::qoc, Dimension::threat, "ids_alert"},
                a->alert.timestamp, a->alert.message, &a->alert};
    }
    const auto& m = std::get<MetricSample>(raw);
    return {&m.observer, &m.subject, m.dimension, m.timestamp, m.dimension.metric, nullptr};
}

bool rule_matches(const MappingRule& rule, const ObservationView& obs) {
    if (const auto* d = std::get_if<MatchDimension>(&rule.match))
        return d->dimension == obs.dimension.dimension;
    if (const auto* s = std::get_if<MatchSignature>(&rule.match))
        return obs.alert != nullptr && obs.alert->sig_id == s->sig_id;
    if (const auto* p = std::get_if<MatchPriority>(&rule.match))
        return obs.alert != nullptr &&
               cmp_eval(p->cmp, static_cast<double>(obs.alert->priority),
                        static_cast<double>(p->value));
    return false;  // rating matches never apply to raw observations
}

std::pair<ActionKind, std::optional<std::string>> parse_action_label(const std::string& label) {
    const auto colon = label.find(':');
    const std::string head = label.substr(0, colon);
    std::optional<std::string> arg;
    if (colon != std::string::npos) arg = label.substr(colon + 1);
    if (head == "assign_pool") {
        require(arg.has_value() && !arg->empty(), errc::validation_error,
                "action \"assign_pool\" requires a pool label");
        return {ActionKind::assign_pool, arg};
    }
    if (head == "redirect") {
        require(arg.has_value() && !arg->empty(), errc::validation_error,
                "action \"redirect\" requires a target");
        return {ActionKind::redirect, arg};
    }
    if (head == "block" || head == "alert_admin") {
        require(!arg.has_value(), errc::validation_error,
                "action \"" + head + "\" takes no argument");
        return {head == "block" ? ActionKind::block : ActionKind::alert_admin, std::nullopt};
    }
    throw Error(errc::validation_error, "unknown action label \"" + label + "\"");
}

// Total order on event content so sums and review text do not depend on
// input order.
bool event_before(const FeedbackEvent& x, const FeedbackEvent& y) {
    return std::tie(x.timestamp, x.note, x.score, x.weight) <
           std::tie(y.timestamp, y.note, y.score, y.weight);
}

std::vector<const FeedbackEvent*> sorted_view(std::span<const FeedbackEvent> events) {
    std::vector<const FeedbackEvent*> ordered;
    ordered.reserve(events.size());
    for (const auto& e : events) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(),
              [](const FeedbackEvent* x, const FeedbackEvent* y) {
                  return event_before(*x, *y);
              });
    return ordered;
}

}  // namespace

std::string to_string(ComponentKind k) {
    switch (k) {
        case ComponentKind::service: return "service";
        case ComponentKind::executor: return "executor";
        case ComponentKind::sensor: return "sensor";
    }
    throw Error(errc::invalid_value, "corrupt component kind");
}

ComponentKind component_kind_from_string(const std::string& s) {
    if (s == "service") return ComponentKind::service;
    if (s == "executor") return ComponentKind::executor;
    if (s == "sensor") return ComponentKind::sensor;
    throw Error(errc::validation_error, "unknown component kind \"" + s + "\"");
}

std::string to_string(Cmp c) {
    switch (c) {
        case Cmp::lt: return "lt";
        case Cmp::le: return "le";
        case Cmp::gt: return "gt";
        case Cmp::ge: return "ge";
        case Cmp::eq: return "eq";
    }
    throw Error(errc::invalid_value, "corrupt comparator");
}

Cmp cmp_from_string(const std::string& s) {
    if (s == "lt") return Cmp::lt;
    if (s == "le") return Cmp::le;
    if (s == "gt") return Cmp::gt;
    if (s == "ge") return Cmp::ge;
    if (s == "eq") return Cmp::eq;
    throw Error(errc::validation_error, "unknown comparator \"" + s + "\"");
}

bool cmp_eval(Cmp c, double lhs, double rhs) {
    switch (c) {
        case Cmp::lt: return lhs < rhs;
        case Cmp::le: return lhs <= rhs;
        case Cmp::gt: return lhs > rhs;
        case Cmp::ge: return lhs >= rhs;
        case Cmp::eq: return lhs == rhs;
    }
    return false;
}

std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::assign_pool: return "assign_pool";
        case ActionKind::block: return "block";
        case ActionKind::redirect: return "redirect";
        case ActionKind::alert_admin: return "alert_admin";
    }
    throw Error(errc::invalid_value, "corrupt action kind");
}

void MappingRule::validate() const {
    if (score) {
        require(std::isfinite(*score) && *score >= 0.0 && *score <= 1.0,
                errc::validation_error, "rule score out of range [0,1]");
    }
    if (weight) {
        require(std::isfinite(*weight) && *weight > 0.0 && *weight <= 1.0,
                errc::validation_error, "rule weight out of range (0,1]");
    }
    if (std::holds_alternative<MatchRating>(match)) {
        require(action.has_value(), errc::validation_error,
                "rating-threshold rule requires an action label");
    } else {
        require(score.has_value() && weight.has_value(), errc::validation_error,
                "feedback rule requires score and weight");
    }
    if (action) parse_action_label(*action);
}

void InterpreterConfig::validate() const {
    std::set<std::string> names;
    for (const auto& c : components) {
        require(!c.name.empty(), errc::validation_error, "component name must be non-empty");
        require(names.insert(c.name).second, errc::validation_error,
                "duplicate component name \"" + c.name + "\"");
    }
    for (const auto& r : mapping) r.validate();
    require(decay_half_life > 0, errc::validation_error, "decay_half_life must be > 0");
    require(std::isfinite(prior_value) && prior_value >= 0.0 && prior_value <= 1.0,
            errc::validation_error, "prior_value out of range [0,1]");
    require(std::isfinite(prior_weight) && prior_weight > 0.0, errc::validation_error,
            "prior_weight must be > 0");
    require(std::isfinite(default_score) && default_score >= 0.0 && default_score <= 1.0,
            errc::validation_error, "default_score out of range [0,1]");
    require(std::isfinite(default_weight) && default_weight > 0.0 && default_weight <= 1.0,
            errc::validation_error, "default_weight out of range (0,1]");
    observer.validate();
    unknown_subject.validate();
    require(observer.id != unknown_subject.id, errc::validation_error,
            "observer and unknown_subject identities must differ");
}

namespace {

RuleMatch parse_match(const json& m) {
    int present = static_cast<int>(m.contains("dimension")) +
                  static_cast<int>(m.contains("sig_id")) +
                  static_cast<int>(m.contains("priority")) +
                  static_cast<int>(m.contains("rating"));
    require(present == 1, errc::validation_error,
            "rule match needs exactly one of dimension/sig_id/priority/rating");
    if (m.contains("dimension"))
        return MatchDimension{dimension_from_string(m.at("dimension").get<std::string>())};
    if (m.contains("sig_id")) return MatchSignature{m.at("sig_id").get<std::int64_t>()};
    if (m.contains("priority")) {
        const json& p = m.at("priority");
        return MatchPriority{cmp_from_string(p.at("cmp").get<std::string>()),
                             p.at("value").get<std::int64_t>()};
    }
    const json& r = m.at("rating");
    return MatchRating{cmp_from_string(r.at("cmp").get<std::string>()),
                       r.at("value").get<double>()};
}

json match_to_json(const RuleMatch& match) {
    if (const auto* d = std::get_if<MatchDimension>(&match))
        return json{{"dimension", to_string(d->dimension)}};
    if (const auto* s = std::get_if<MatchSignature>(&match))
        return json{{"sig_id", s->sig_id}};
    if (const auto* p = std::get_if<MatchPriority>(&match))
        return json{{"priority", json{{"cmp", to_string(p->cmp)}, {"value", p->value}}}};
    const auto& r = std::get<MatchRating>(match);
    return json{{"rating", json{{"cmp", to_string(r.cmp)}, {"value", r.value}}}};
}

}  // namespace

InterpreterConfig load_config(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error(errc::parse_error, e.what());
    }
    try {
        InterpreterConfig config;
        for (const json& c : doc.value("components", json::array())) {
            Component component;
            component.name = c.at("name").get<std::string>();
            component.address = c.value("address", "");
            component.kind = component_kind_from_string(c.at("kind").get<std::string>());
            component.description = c.value("description", "");
            component.tasks = c.value("tasks", std::vector<std::string>{});
            config.components.push_back(std::move(component));
        }
        for (const json& r : doc.value("mapping", json::array())) {
            MappingRule rule;
            rule.match = parse_match(r.at("match"));
            if (r.contains("score")) rule.score = r.at("score").get<double>();
            if (r.contains("weight")) rule.weight = r.at("weight").get<double>();
            if (r.contains("action")) rule.action = r.at("action").get<std::string>();
            config.mapping.push_back(std::move(rule));
        }
        config.decay_half_life = doc.value("decay_half_life", Timestamp{3600});
        config.prior_value = doc.value("prior_value", 0.5);
        config.prior_weight = doc.value("prior_weight", 1.0);
        config.default_score = doc.value("default_score", 0.25);
        config.default_weight = doc.value("default_weight", 0.5);
        if (doc.contains("observer")) config.observer = doc.at("observer").get<IdentityId>();
        if (doc.contains("unknown_identity"))
            config.unknown_subject = doc.at("unknown_identity").get<IdentityId>();
        if (doc.contains("addresses"))
            config.addresses =
                doc.at("addresses").get<std::map<std::string, IdentityId>>();
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw Error(errc::validation_error, e.what());
    }
}

void to_json(json& j, const InterpreterConfig& v) {
    json components = json::array();
    for (const auto& c : v.components) {
        components.push_back(json{{"name", c.name},
                                  {"address", c.address},
                                  {"kind", to_string(c.kind)},
                                  {"description", c.description},
                                  {"tasks", c.tasks}});
    }
    json mapping = json::array();
    for (const auto& r : v.mapping) {
        json rule{{"match", match_to_json(r.match)}};
        if (r.score) rule["score"] = *r.score;
        if (r.weight) rule["weight"] = *r.weight;
        if (r.action) rule["action"] = *r.action;
        mapping.push_back(std::move(rule));
    }
    j = json{{"components", components},
             {"mapping", mapping},
             {"decay_half_life", v.decay_half_life},
             {"prior_value", v.prior_value},
             {"prior_weight", v.prior_weight},
             {"default_score", v.default_score},
             {"default_weight", v.default_weight},
             {"observer", v.observer},
             {"unknown_identity", v.unknown_subject},
             {"addresses", v.addresses}};
}

FeedbackEvent apply_mapping(const Observation& raw, std::span<const MappingRule> rules,
                            double default_score, double default_weight) {
    const ObservationView obs = view_of(raw);
    double score = default_score;
    double weight = default_weight;
    for (const auto& rule : rules) {
        if (!rule.score || !rule.weight) continue;
        if (rule_matches(rule, obs)) {
            score = *rule.score;
            weight = *rule.weight;
            break;
        }
    }
    FeedbackEvent event{*obs.observer, *obs.subject, obs.dimension,
                        score,         weight,       obs.timestamp, obs.note};
    event.validate();
    return event;
}

FeedbackEvent apply_mapping(const Observation& raw, const InterpreterConfig& config) {
    return apply_mapping(raw, config.mapping, config.default_score, config.default_weight);
}

Rating compute_rating(const IdentityId& rater, const IdentityId& ratee,
                      std::span<const FeedbackEvent> events, Timestamp now,
                      const InterpreterConfig& config) {
    for (const auto& e : events) {
        require(e.subject.id == ratee.id, errc::invalid_value,
                "mixed-subject event list: expected subject \"" + ratee.id + "\", got \"" +
                    e.subject.id + "\"");
        require(e.observer.id == rater.id, errc::invalid_value,
                "mixed-observer event list: expected observer \"" + rater.id + "\", got \"" +
                    e.observer.id + "\"");
        require(e.timestamp <= now, errc::invalid_value,
                "event timestamp is in the future");
    }
    const auto ordered = sorted_view(events);
    double numerator = config.prior_value * config.prior_weight;
    double denominator = config.prior_weight;
    for (const auto* e : ordered) {
        const double age = static_cast<double>(now - e->timestamp);
        const double decay = std::exp2(-age / static_cast<double>(config.decay_half_life));
        numerator += e->score * e->weight * decay;
        denominator += e->weight * decay;
    }
    const double value = clamp_rating(numerator / denominator);
    return Rating{rater, ratee, value, now, generate_review(events, value)};
}

ReviewText generate_review(std::span<const FeedbackEvent> events, double rating_value) {
    const auto ordered = sorted_view(events);
    ReviewText review;
    review.text = "rating=" + format_value_2dp(rating_value) +
                  " events=" + std::to_string(events.size()) + "; ";
    std::set<std::string> seen_notes;
    std::set<std::string> tags;
    bool first = true;
    for (const auto* e : ordered) {
        for (auto& token : tokenize_note(e->note)) tags.insert(std::move(token));
        if (e->note.empty() || !seen_notes.insert(e->note).second) continue;
        if (!first) review.text += "; ";
        review.text += e->note;
        first = false;
    }
    review.tags.assign(tags.begin(), tags.end());
    return review;
}

std::vector<std::string> tokenize_note(const std::string& note) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 3) tokens.push_back(current);
        current.clear();
    };
    for (const char raw : note) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<ActionDirective> map_rating_to_actions(const Rating& rating,
                                                   std::span<const MappingRule> rules) {
    std::vector<ActionDirective> directives;
    for (const auto& rule : rules) {
        const auto* threshold = std::get_if<MatchRating>(&rule.match);
        if (threshold == nullptr || !rule.action) continue;
        if (!cmp_eval(threshold->cmp, rating.value, threshold->value)) continue;
        auto [kind, arg] = parse_action_label(*rule.action);
        ActionDirective directive{kind, rating.ratee, {}};
        if (kind == ActionKind::assign_pool) directive.params["pool"] = *arg;
        if (kind == ActionKind::redirect) directive.params["target"] = *arg;
        directives.push_back(std::move(directive));
    }
    return directives;
}

}  // namespace qox
