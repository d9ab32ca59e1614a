// The cloud-provider vouching authority: issues unique identities against
// opaque credentials, keeps the interaction ledger its network visibility
// would produce, answers has-interacted queries, and verifies shared
// records against pre-registered evidence patterns.

#pragma once

#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "qox/model.hpp"

namespace qox {

// Opaque registration token; stands in for credit-card-backed identity
// verification.
struct Credential {
    std::string token;
};

using PatternId = std::uint64_t;

class VouchingAuthority {
public:
    // Same credential twice returns the same identity (re-login), never a
    // second one; the originally registered kind sticks.
    IdentityId register_identity(const Credential& credential, IdentityKind kind);

    void record_interaction(const IdentityId& a, const IdentityId& b,
                            std::uint64_t packets, Timestamp t);

    // True iff the cumulative packet count of the unordered pair reaches
    // min_packets. Symmetric in (a,b), monotone under ledger growth.
    bool has_interacted(const IdentityId& a, const IdentityId& b,
                        std::uint64_t min_packets) const;

    PatternId register_evidence_pattern(const IdentityId& owner,
                                        const EvidencePattern& pattern);

    // verified iff some pattern of the reporter matches the record's kind
    // and src/dst detail, and the ledger shows >= min_count packets between
    // the subject and the reporter (or the pattern's dst target) within the
    // closed window [t - window, t]. Pure in (record, patterns, ledger).
    VerifiedStatus verify_record(const SpecificRecord& record) const;

    bool is_registered(const IdentityId& identity) const;

    // Introspection for audits: a snapshot of the ledger and counts.
    std::vector<InteractionRecord> ledger_snapshot() const;
    std::size_t identity_count() const;
    std::size_t credential_count() const;

private:
    const IdentityId& require_registered(const std::string& id) const;

    mutable std::shared_mutex mutex_;
    std::map<std::string, IdentityId> identities_by_credential_;
    std::map<std::string, IdentityId> identities_by_id_;
    std::vector<InteractionRecord> ledger_;
    // unordered pair (min id, max id) -> cumulative packets, maintained
    // atomically with the ledger append
    std::map<std::pair<std::string, std::string>, std::uint64_t> pair_packets_;
    std::map<std::string, std::vector<std::pair<PatternId, EvidencePattern>>> patterns_;
    std::uint64_t next_identity_serial_ = 1;
    PatternId next_pattern_id_ = 1;
};

}  // namespace qox
