#include "qox/model.hpp"

#include <cmath>

namespace qox {

namespace {

[[noreturn]] void bad_enum(const char* what, const std::string& s) {
    throw Error(errc::invalid_value, std::string("unknown ") + what + " \"" + s + "\"");
}

void require(bool ok, const char* code, const std::string& message) {
    if (!ok) throw Error(code, message);
}

void require_unit(double x, const char* field) {
    require(std::isfinite(x) && x >= 0.0 && x <= 1.0, errc::validation_error,
            std::string(field) + " must lie in [0,1]");
}

}  // namespace

std::string to_string(IdentityKind k) {
    switch (k) {
        case IdentityKind::provider: return "provider";
        case IdentityKind::consumer: return "consumer";
    }
    throw Error(errc::invalid_value, "corrupt identity kind");
}

std::string to_string(Side s) {
    switch (s) {
        case Side::qos: return "qos";
        case Side::qoc: return "qoc";
    }
    throw Error(errc::invalid_value, "corrupt side");
}

std::string to_string(Dimension d) {
    switch (d) {
        case Dimension::performance: return "performance";
        case Dimension::dependability: return "dependability";
        case Dimension::cost: return "cost";
        case Dimension::purchase_power: return "purchase_power";
        case Dimension::code_efficiency: return "code_efficiency";
        case Dimension::threat: return "threat";
    }
    throw Error(errc::invalid_value, "corrupt dimension");
}

std::string to_string(RecordKind k) {
    switch (k) {
        case RecordKind::traffic_burst: return "traffic_burst";
        case RecordKind::crash: return "crash";
        case RecordKind::packet_sent: return "packet_sent";
        case RecordKind::port_scan: return "port_scan";
        case RecordKind::dos_alert: return "dos_alert";
    }
    throw Error(errc::invalid_value, "corrupt record kind");
}

std::string to_string(VerifiedStatus v) {
    switch (v) {
        case VerifiedStatus::unchecked: return "unchecked";
        case VerifiedStatus::verified: return "verified";
        case VerifiedStatus::unverifiable: return "unverifiable";
    }
    throw Error(errc::invalid_value, "corrupt verified status");
}

IdentityKind identity_kind_from_string(const std::string& s) {
    if (s == "provider") return IdentityKind::provider;
    if (s == "consumer") return IdentityKind::consumer;
    bad_enum("identity kind", s);
}

Side side_from_string(const std::string& s) {
    if (s == "qos") return Side::qos;
    if (s == "qoc") return Side::qoc;
    bad_enum("side", s);
}

Dimension dimension_from_string(const std::string& s) {
    if (s == "performance") return Dimension::performance;
    if (s == "dependability") return Dimension::dependability;
    if (s == "cost") return Dimension::cost;
    if (s == "purchase_power") return Dimension::purchase_power;
    if (s == "code_efficiency") return Dimension::code_efficiency;
    if (s == "threat") return Dimension::threat;
    bad_enum("dimension", s);
}

RecordKind record_kind_from_string(const std::string& s) {
    if (s == "traffic_burst") return RecordKind::traffic_burst;
    if (s == "crash") return RecordKind::crash;
    if (s == "packet_sent") return RecordKind::packet_sent;
    if (s == "port_scan") return RecordKind::port_scan;
    if (s == "dos_alert") return RecordKind::dos_alert;
    bad_enum("record kind", s);
}

VerifiedStatus verified_status_from_string(const std::string& s) {
    if (s == "unchecked") return VerifiedStatus::unchecked;
    if (s == "verified") return VerifiedStatus::verified;
    if (s == "unverifiable") return VerifiedStatus::unverifiable;
    bad_enum("verified status", s);
}

void IdentityId::validate() const {
    require(!id.empty(), errc::validation_error, "identity id must be non-empty");
}

void QualityDimension::validate() const {
    require(validate_dimension(side, dimension), errc::validation_error,
            "dimension " + to_string(dimension) + " does not belong to side " + to_string(side));
}

void FeedbackEvent::validate() const {
    observer.validate();
    subject.validate();
    dimension.validate();
    require_unit(score, "score");
    require(std::isfinite(weight) && weight > 0.0 && weight <= 1.0, errc::validation_error,
            "weight must lie in (0,1]");
    require(observer.id != subject.id, errc::validation_error,
            "observer and subject must differ");
}

void ReviewText::validate() const {
    for (std::size_t i = 1; i < tags.size(); ++i) {
        require(tags[i - 1] < tags[i], errc::validation_error,
                "tags must be deduplicated and sorted");
    }
}

void Rating::validate() const {
    rater.validate();
    ratee.validate();
    require_unit(value, "value");
    require(rater.id != ratee.id, errc::validation_error, "rater and ratee must differ");
    review.validate();
}

void AggregateRating::validate() const {
    ratee.validate();
    require(mean.has_value() == (count > 0), errc::validation_error,
            "mean must be absent iff count is zero");
    if (mean) require_unit(*mean, "mean");
}

void InteractionRecord::validate() const {
    a.validate();
    b.validate();
    require(packets >= 1, errc::validation_error, "packets must be >= 1");
    require(a.id != b.id, errc::validation_error, "interaction endpoints must differ");
}

void SpecificRecord::validate() const {
    reporter.validate();
    subject.validate();
}

void EvidencePattern::validate() const {
    owner.validate();
    require(params.min_count >= 1, errc::invalid_pattern, "min_count must be >= 1");
    require(params.window > 0, errc::invalid_pattern, "window must be > 0");
}

double clamp_rating(double x) {
    if (!std::isfinite(x)) throw Error(errc::invalid_value, "non-finite rating value");
    return std::min(1.0, std::max(0.0, x));
}

bool validate_dimension(Side side, Dimension dimension) {
    switch (dimension) {
        case Dimension::performance:
        case Dimension::dependability:
        case Dimension::cost:
            return side == Side::qos;
        case Dimension::purchase_power:
        case Dimension::code_efficiency:
        case Dimension::threat:
            return side == Side::qoc;
    }
    return false;
}

void to_json(json& j, const IdentityId& v) {
    j = json{{"id", v.id}, {"kind", to_string(v.kind)}};
}

void from_json(const json& j, IdentityId& v) {
    v.id = j.at("id").get<std::string>();
    v.kind = identity_kind_from_string(j.at("kind").get<std::string>());
    v.validate();
}

void to_json(json& j, const QualityDimension& v) {
    j = json{{"side", to_string(v.side)},
             {"dimension", to_string(v.dimension)},
             {"metric", v.metric}};
}

void from_json(const json& j, QualityDimension& v) {
    v.side = side_from_string(j.at("side").get<std::string>());
    v.dimension = dimension_from_string(j.at("dimension").get<std::string>());
    v.metric = j.at("metric").get<std::string>();
    v.validate();
}

void to_json(json& j, const FeedbackEvent& v) {
    j = json{{"observer", v.observer}, {"subject", v.subject},
             {"dimension", v.dimension}, {"score", v.score},
             {"weight", v.weight},      {"timestamp", v.timestamp},
             {"note", v.note}};
}

void from_json(const json& j, FeedbackEvent& v) {
    v.observer = j.at("observer").get<IdentityId>();
    v.subject = j.at("subject").get<IdentityId>();
    v.dimension = j.at("dimension").get<QualityDimension>();
    v.score = j.at("score").get<double>();
    v.weight = j.at("weight").get<double>();
    v.timestamp = j.at("timestamp").get<Timestamp>();
    v.note = j.at("note").get<std::string>();
    v.validate();
}

void to_json(json& j, const ReviewText& v) {
    j = json{{"text", v.text}, {"tags", v.tags}};
}

void from_json(const json& j, ReviewText& v) {
    v.text = j.at("text").get<std::string>();
    v.tags = j.at("tags").get<std::vector<std::string>>();
    v.validate();
}

void to_json(json& j, const Rating& v) {
    j = json{{"rater", v.rater}, {"ratee", v.ratee},
             {"value", v.value}, {"timestamp", v.timestamp},
             {"review", v.review}};
}

void from_json(const json& j, Rating& v) {
    v.rater = j.at("rater").get<IdentityId>();
    v.ratee = j.at("ratee").get<IdentityId>();
    v.value = j.at("value").get<double>();
    v.timestamp = j.at("timestamp").get<Timestamp>();
    v.review = j.at("review").get<ReviewText>();
    v.validate();
}

void to_json(json& j, const AggregateRating& v) {
    j = json{{"ratee", v.ratee}, {"count", v.count}};
    if (v.mean) j["mean"] = *v.mean;
}

void from_json(const json& j, AggregateRating& v) {
    v.ratee = j.at("ratee").get<IdentityId>();
    v.count = j.at("count").get<std::uint64_t>();
    v.mean = j.contains("mean") ? std::optional<double>(j.at("mean").get<double>())
                                : std::nullopt;
    v.validate();
}

void to_json(json& j, const InteractionRecord& v) {
    j = json{{"a", v.a}, {"b", v.b}, {"packets", v.packets}, {"timestamp", v.timestamp}};
}

void from_json(const json& j, InteractionRecord& v) {
    v.a = j.at("a").get<IdentityId>();
    v.b = j.at("b").get<IdentityId>();
    v.packets = j.at("packets").get<std::uint64_t>();
    v.timestamp = j.at("timestamp").get<Timestamp>();
    v.validate();
}

void to_json(json& j, const SpecificRecord& v) {
    j = json{{"reporter", v.reporter}, {"subject", v.subject},
             {"kind", to_string(v.kind)}, {"detail", v.detail},
             {"timestamp", v.timestamp}, {"verified", to_string(v.verified)}};
}

void from_json(const json& j, SpecificRecord& v) {
    v.reporter = j.at("reporter").get<IdentityId>();
    v.subject = j.at("subject").get<IdentityId>();
    v.kind = record_kind_from_string(j.at("kind").get<std::string>());
    v.detail = j.at("detail").get<std::map<std::string, std::string>>();
    v.timestamp = j.at("timestamp").get<Timestamp>();
    v.verified = verified_status_from_string(j.at("verified").get<std::string>());
    v.validate();
}

void to_json(json& j, const EvidencePattern& v) {
    j = json{{"owner", v.owner},
             {"kind", to_string(v.kind)},
             {"params", json{{"min_count", v.params.min_count},
                             {"window", v.params.window},
                             {"src", v.params.src},
                             {"dst", v.params.dst}}}};
}

void from_json(const json& j, EvidencePattern& v) {
    v.owner = j.at("owner").get<IdentityId>();
    v.kind = record_kind_from_string(j.at("kind").get<std::string>());
    const json& p = j.at("params");
    v.params.min_count = p.at("min_count").get<std::uint64_t>();
    v.params.window = p.at("window").get<std::uint64_t>();
    v.params.src = p.value("src", "*");
    v.params.dst = p.value("dst", "*");
    v.validate();
}

}  // namespace qox
