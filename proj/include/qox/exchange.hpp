// The information exchange: accepts ratings and specific records (gated by
// the vouching authority), serves aggregates, reviews, common tags, record
// queries, discovery, and sentiment watch alerts.
//
// Concurrency contract: submissions for the same (rater, ratee) key are
// serialized; reads observe a consistent snapshot, never a partially
// applied submission; watch alert emission is serialized per subject.

#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qox/model.hpp"

namespace qox {

// How the exchange sees the vouching authority. The exchange never shares
// memory with it; implementations go through the request/response envelope
// so the two services can be co-located or split.
class VouchingView {
public:
    virtual ~VouchingView() = default;
    virtual bool is_registered(const IdentityId& identity) = 0;
    virtual bool has_interacted(const IdentityId& a, const IdentityId& b,
                                std::uint64_t min_packets) = 0;
    virtual VerifiedStatus verify_record(const SpecificRecord& record) = 0;
};

struct ExchangeOptions {
    std::uint64_t min_packets = 1;  // packets required before a pair may rate
    // When false the exchange skips registration and interaction checks on
    // submission (the unguarded baseline the sybil scenarios compare
    // against).
    bool vouching_enabled = true;
};

struct RecordFilter {
    std::optional<IdentityId> subject;
    std::optional<RecordKind> kind;
    std::optional<Timestamp> since;
    bool include_unverified = false;
};

struct SentimentAlert {
    IdentityId subject;
    double old_mean = 0.0;
    double new_mean = 0.0;
    Timestamp timestamp = 0;
};

void to_json(json& j, const SentimentAlert& v);
void from_json(const json& j, SentimentAlert& v);

class Exchange {
public:
    Exchange(VouchingView& vouching, ExchangeOptions options = {});

    // Stores the rating iff the pair is registered and vouched; replaces
    // any older rating by the same rater. Throws Error with code
    // unknown_identity, not_vouched, or stale_timestamp.
    void submit_rating(const Rating& rating);

    // Unweighted arithmetic mean over all live ratings for the ratee.
    AggregateRating get_aggregate(const IdentityId& ratee) const;

    // Live ratings with reviews, timestamp descending, ties by rater id
    // ascending.
    std::vector<Rating> list_reviews(const IdentityId& ratee) const;

    // Tags appearing in >= min_support distinct live reviews, sorted by
    // (descending count, ascending tag).
    std::vector<std::string> extract_common_tags(const IdentityId& ratee,
                                                 std::uint64_t min_support) const;

    // Appends the record with the vouching authority's verdict; returns the
    // assigned status. Unverifiable records are stored but flagged.
    VerifiedStatus submit_record(SpecificRecord record);

    // Matching records in timestamp order; unverifiable ones excluded
    // unless the filter opts in.
    std::vector<SpecificRecord> query_records(const RecordFilter& filter) const;

    // Providers with aggregate mean >= min_rating, mean descending, ties by
    // id ascending. Unrated providers are dropped when min_rating > 0 and
    // appended last when min_rating == 0.
    std::vector<IdentityId> discover(std::span<const IdentityId> catalog,
                                     double min_rating) const;

    // Registers a sentiment watch; an alert fires whenever the subject's
    // mean has dropped by >= threshold_drop since the last emission (the
    // baseline moves only when an alert fires).
    void watch_rating(const IdentityId& subject, double threshold_drop);

    // Returns and clears the alerts emitted since the previous drain.
    std::vector<SentimentAlert> drain_alerts();

    // Audit sweep: every live rating's pair has a qualifying ledger
    // interaction.
    bool audit_all_vouched();

    std::size_t rating_count() const;

private:
    std::optional<double> mean_for_locked(const std::string& ratee_id,
                                          std::uint64_t* count = nullptr) const;
    void note_mean_change_locked(const IdentityId& subject,
                                 std::optional<double> new_mean, Timestamp t);

    VouchingView& vouching_;
    ExchangeOptions options_;

    struct Watch {
        IdentityId subject;
        double threshold_drop;
        std::optional<double> last_seen_mean;
    };

    mutable std::shared_mutex mutex_;
    // ratee id -> (rater id -> latest rating); one live rating per pair
    std::map<std::string, std::map<std::string, Rating>> ratings_;
    std::vector<SpecificRecord> records_;  // append-only
    std::vector<Watch> watches_;
    std::vector<SentimentAlert> pending_alerts_;
};

}  // namespace qox
