#include "qox/vouching.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

namespace qox {

namespace {

std::pair<std::string, std::string> unordered_pair(const std::string& a,
                                                   const std::string& b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

bool wildcard_matches(const std::string& constraint, const SpecificRecord& record,
                      const char* key) {
    if (constraint.empty() || constraint == "*") return true;
    const auto it = record.detail.find(key);
    return it != record.detail.end() && it->second == constraint;
}

std::string make_identity_token(IdentityKind kind, std::uint64_t serial) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%c-%06llu", kind == IdentityKind::provider ? 'p' : 'c',
                  static_cast<unsigned long long>(serial));
    return buf;
}

}  // namespace

IdentityId VouchingAuthority::register_identity(const Credential& credential,
                                                IdentityKind kind) {
    if (credential.token.empty())
        throw Error(errc::empty_credential, "credential token must be non-empty");
    std::unique_lock lock(mutex_);
    if (const auto it = identities_by_credential_.find(credential.token);
        it != identities_by_credential_.end()) {
        return it->second;  // re-login, never a second identity
    }
    IdentityId identity{make_identity_token(kind, next_identity_serial_++), kind};
    identities_by_credential_.emplace(credential.token, identity);
    identities_by_id_.emplace(identity.id, identity);
    return identity;
}

const IdentityId& VouchingAuthority::require_registered(const std::string& id) const {
    const auto it = identities_by_id_.find(id);
    if (it == identities_by_id_.end())
        throw Error(errc::unknown_identity, "identity \"" + id + "\" is not registered");
    return it->second;
}

void VouchingAuthority::record_interaction(const IdentityId& a, const IdentityId& b,
                                           std::uint64_t packets, Timestamp t) {
    if (packets < 1) throw Error(errc::invalid_value, "packets must be >= 1");
    if (a.id == b.id)
        throw Error(errc::self_interaction, "cannot record a self-interaction");
    std::unique_lock lock(mutex_);
    require_registered(a.id);
    require_registered(b.id);
    ledger_.push_back(InteractionRecord{a, b, packets, t});
    pair_packets_[unordered_pair(a.id, b.id)] += packets;
}

bool VouchingAuthority::has_interacted(const IdentityId& a, const IdentityId& b,
                                       std::uint64_t min_packets) const {
    std::shared_lock lock(mutex_);
    require_registered(a.id);
    require_registered(b.id);
    const auto it = pair_packets_.find(unordered_pair(a.id, b.id));
    const std::uint64_t total = it == pair_packets_.end() ? 0 : it->second;
    return total >= min_packets;
}

PatternId VouchingAuthority::register_evidence_pattern(const IdentityId& owner,
                                                       const EvidencePattern& pattern) {
    EvidencePattern stored = pattern;
    stored.owner = owner;
    stored.validate();
    std::unique_lock lock(mutex_);
    require_registered(owner.id);
    const PatternId id = next_pattern_id_++;
    patterns_[owner.id].emplace_back(id, std::move(stored));
    return id;
}

VerifiedStatus VouchingAuthority::verify_record(const SpecificRecord& record) const {
    std::shared_lock lock(mutex_);
    require_registered(record.reporter.id);
    const auto pit = patterns_.find(record.reporter.id);
    if (pit == patterns_.end()) return VerifiedStatus::unverifiable;

    for (const auto& [pattern_id, pattern] : pit->second) {
        if (pattern.kind != record.kind) continue;
        if (!wildcard_matches(pattern.params.src, record, "src")) continue;
        if (!wildcard_matches(pattern.params.dst, record, "dst")) continue;

        // Counterparties whose traffic with the subject can evidence the
        // record: the reporter, or the identity the pattern's dst names.
        std::vector<std::string> counterparties{record.reporter.id};
        if (pattern.params.dst != "*" && !pattern.params.dst.empty() &&
            identities_by_id_.count(pattern.params.dst) &&
            pattern.params.dst != record.reporter.id) {
            counterparties.push_back(pattern.params.dst);
        }

        const Timestamp window_end = record.timestamp;
        const Timestamp window_start =
            record.timestamp >= pattern.params.window
                ? record.timestamp - pattern.params.window
                : 0;
        for (const auto& counterparty : counterparties) {
            if (counterparty == record.subject.id) continue;
            std::uint64_t total = 0;
            for (const auto& entry : ledger_) {
                const bool pair_matches =
                    (entry.a.id == record.subject.id && entry.b.id == counterparty) ||
                    (entry.b.id == record.subject.id && entry.a.id == counterparty);
                if (!pair_matches) continue;
                if (entry.timestamp < window_start || entry.timestamp > window_end)
                    continue;
                total += entry.packets;
            }
            if (total >= pattern.params.min_count) return VerifiedStatus::verified;
        }
    }
    return VerifiedStatus::unverifiable;
}

bool VouchingAuthority::is_registered(const IdentityId& identity) const {
    std::shared_lock lock(mutex_);
    const auto it = identities_by_id_.find(identity.id);
    return it != identities_by_id_.end() && it->second.kind == identity.kind;
}

std::vector<InteractionRecord> VouchingAuthority::ledger_snapshot() const {
    std::shared_lock lock(mutex_);
    return ledger_;
}

std::size_t VouchingAuthority::identity_count() const {
    std::shared_lock lock(mutex_);
    return identities_by_id_.size();
}

std::size_t VouchingAuthority::credential_count() const {
    std::shared_lock lock(mutex_);
    return identities_by_credential_.size();
}

}  // namespace qox
