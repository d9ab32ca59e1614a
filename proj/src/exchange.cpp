#include "qox/exchange.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>

namespace qox {

void to_json(json& j, const SentimentAlert& v) {
    j = json{{"subject", v.subject},
             {"old_mean", v.old_mean},
             {"new_mean", v.new_mean},
             {"timestamp", v.timestamp}};
}

void from_json(const json& j, SentimentAlert& v) {
    v.subject = j.at("subject").get<IdentityId>();
    v.old_mean = j.at("old_mean").get<double>();
    v.new_mean = j.at("new_mean").get<double>();
    v.timestamp = j.at("timestamp").get<Timestamp>();
}

Exchange::Exchange(VouchingView& vouching, ExchangeOptions options)
    : vouching_(vouching), options_(options) {}

void Exchange::submit_rating(const Rating& rating) {
    rating.validate();
    if (options_.vouching_enabled) {
        if (!vouching_.is_registered(rating.rater))
            throw Error(errc::unknown_identity,
                        "rater \"" + rating.rater.id + "\" is not registered");
        if (!vouching_.is_registered(rating.ratee))
            throw Error(errc::unknown_identity,
                        "ratee \"" + rating.ratee.id + "\" is not registered");
        if (!vouching_.has_interacted(rating.rater, rating.ratee, options_.min_packets))
            throw Error(errc::not_vouched,
                        "no qualifying interaction between \"" + rating.rater.id +
                            "\" and \"" + rating.ratee.id + "\"");
    }
    std::unique_lock lock(mutex_);
    auto& per_rater = ratings_[rating.ratee.id];
    if (const auto it = per_rater.find(rating.rater.id); it != per_rater.end()) {
        if (rating.timestamp < it->second.timestamp)
            throw Error(errc::stale_timestamp,
                        "a newer rating from this rater is already stored");
        it->second = rating;
    } else {
        per_rater.emplace(rating.rater.id, rating);
    }
    note_mean_change_locked(rating.ratee, mean_for_locked(rating.ratee.id),
                            rating.timestamp);
}

std::optional<double> Exchange::mean_for_locked(const std::string& ratee_id,
                                                std::uint64_t* count) const {
    double sum = 0.0;
    std::uint64_t n = 0;
    // The inner map is keyed by rater id, so the sum always runs in
    // rater-id order: deterministic and equal to a brute-force recount.
    if (const auto it = ratings_.find(ratee_id); it != ratings_.end()) {
        for (const auto& [rater_id, rating] : it->second) {
            sum += rating.value;
            ++n;
        }
    }
    if (count != nullptr) *count = n;
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

void Exchange::note_mean_change_locked(const IdentityId& subject,
                                       std::optional<double> new_mean, Timestamp t) {
    if (!new_mean) return;
    for (auto& watch : watches_) {
        if (watch.subject.id != subject.id) continue;
        if (!watch.last_seen_mean) {
            watch.last_seen_mean = *new_mean;  // first observation, no drop yet
            continue;
        }
        if (*watch.last_seen_mean - *new_mean >= watch.threshold_drop) {
            pending_alerts_.push_back(
                SentimentAlert{watch.subject, *watch.last_seen_mean, *new_mean, t});
            watch.last_seen_mean = *new_mean;
        }
    }
}

AggregateRating Exchange::get_aggregate(const IdentityId& ratee) const {
    if (options_.vouching_enabled && !vouching_.is_registered(ratee))
        throw Error(errc::unknown_identity,
                    "ratee \"" + ratee.id + "\" is not registered");
    std::shared_lock lock(mutex_);
    AggregateRating aggregate;
    aggregate.ratee = ratee;
    aggregate.mean = mean_for_locked(ratee.id, &aggregate.count);
    return aggregate;
}

std::vector<Rating> Exchange::list_reviews(const IdentityId& ratee) const {
    if (options_.vouching_enabled && !vouching_.is_registered(ratee))
        throw Error(errc::unknown_identity,
                    "ratee \"" + ratee.id + "\" is not registered");
    std::shared_lock lock(mutex_);
    std::vector<Rating> reviews;
    if (const auto it = ratings_.find(ratee.id); it != ratings_.end())
        for (const auto& [rater_id, rating] : it->second) reviews.push_back(rating);
    std::stable_sort(reviews.begin(), reviews.end(), [](const Rating& x, const Rating& y) {
        if (x.timestamp != y.timestamp) return x.timestamp > y.timestamp;
        return x.rater.id < y.rater.id;
    });
    return reviews;
}

std::vector<std::string> Exchange::extract_common_tags(const IdentityId& ratee,
                                                       std::uint64_t min_support) const {
    if (min_support < 1) throw Error(errc::invalid_value, "min_support must be >= 1");
    const auto reviews = list_reviews(ratee);
    std::map<std::string, std::uint64_t> counts;
    for (const auto& rating : reviews) {
        // tags are already distinct within one review
        for (const auto& tag : rating.review.tags) ++counts[tag];
    }
    std::vector<std::pair<std::string, std::uint64_t>> qualifying;
    for (const auto& [tag, count] : counts)
        if (count >= min_support) qualifying.emplace_back(tag, count);
    std::sort(qualifying.begin(), qualifying.end(),
              [](const auto& x, const auto& y) {
                  if (x.second != y.second) return x.second > y.second;
                  return x.first < y.first;
              });
    std::vector<std::string> tags;
    tags.reserve(qualifying.size());
    for (auto& [tag, count] : qualifying) tags.push_back(std::move(tag));
    return tags;
}

VerifiedStatus Exchange::submit_record(SpecificRecord record) {
    record.validate();
    if (options_.vouching_enabled && !vouching_.is_registered(record.reporter))
        throw Error(errc::unknown_identity,
                    "reporter \"" + record.reporter.id + "\" is not registered");
    // Status transitions exactly once: unchecked -> verified | unverifiable.
    const VerifiedStatus status = options_.vouching_enabled
                                      ? vouching_.verify_record(record)
                                      : VerifiedStatus::unverifiable;
    record.verified = status;
    std::unique_lock lock(mutex_);
    records_.push_back(std::move(record));
    return status;
}

std::vector<SpecificRecord> Exchange::query_records(const RecordFilter& filter) const {
    std::shared_lock lock(mutex_);
    std::vector<SpecificRecord> out;
    for (const auto& record : records_) {
        if (record.verified != VerifiedStatus::verified && !filter.include_unverified)
            continue;
        if (filter.subject && record.subject.id != filter.subject->id) continue;
        if (filter.kind && record.kind != *filter.kind) continue;
        if (filter.since && record.timestamp < *filter.since) continue;
        out.push_back(record);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SpecificRecord& x, const SpecificRecord& y) {
                         return x.timestamp < y.timestamp;
                     });
    return out;
}

std::vector<IdentityId> Exchange::discover(std::span<const IdentityId> catalog,
                                           double min_rating) const {
    std::shared_lock lock(mutex_);
    struct Entry {
        const IdentityId* provider;
        double mean;
    };
    std::vector<Entry> rated;
    std::vector<const IdentityId*> unrated;
    for (const auto& provider : catalog) {
        const auto mean = mean_for_locked(provider.id);
        if (mean) {
            if (*mean >= min_rating) rated.push_back({&provider, *mean});
        } else {
            unrated.push_back(&provider);
        }
    }
    std::sort(rated.begin(), rated.end(), [](const Entry& x, const Entry& y) {
        if (x.mean != y.mean) return x.mean > y.mean;
        return x.provider->id < y.provider->id;
    });
    std::sort(unrated.begin(), unrated.end(),
              [](const IdentityId* x, const IdentityId* y) { return x->id < y->id; });
    std::vector<IdentityId> out;
    out.reserve(rated.size() + unrated.size());
    for (const auto& entry : rated) out.push_back(*entry.provider);
    if (min_rating == 0.0)
        for (const auto* provider : unrated) out.push_back(*provider);
    return out;
}

void Exchange::watch_rating(const IdentityId& subject, double threshold_drop) {
    if (!(std::isfinite(threshold_drop) && threshold_drop > 0.0 && threshold_drop <= 1.0))
        throw Error(errc::invalid_value, "threshold_drop must lie in (0,1]");
    if (options_.vouching_enabled && !vouching_.is_registered(subject))
        throw Error(errc::unknown_identity,
                    "subject \"" + subject.id + "\" is not registered");
    std::unique_lock lock(mutex_);
    watches_.push_back(Watch{subject, threshold_drop, mean_for_locked(subject.id)});
}

std::vector<SentimentAlert> Exchange::drain_alerts() {
    std::unique_lock lock(mutex_);
    std::vector<SentimentAlert> out;
    out.swap(pending_alerts_);
    return out;
}

bool Exchange::audit_all_vouched() {
    // Snapshot first; the vouching round-trip must not run under our lock.
    std::vector<std::pair<IdentityId, IdentityId>> pairs;
    {
        std::shared_lock lock(mutex_);
        for (const auto& [ratee_id, per_rater] : ratings_)
            for (const auto& [rater_id, rating] : per_rater)
                pairs.emplace_back(rating.rater, rating.ratee);
    }
    for (const auto& [rater, ratee] : pairs) {
        if (!vouching_.is_registered(rater) || !vouching_.is_registered(ratee))
            return false;
        if (!vouching_.has_interacted(rater, ratee, options_.min_packets)) return false;
    }
    return true;
}

std::size_t Exchange::rating_count() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& [ratee_id, per_rater] : ratings_) n += per_rater.size();
    return n;
}

}  // namespace qox
