// Shim toolkit: sensor-side parsing of fast-alert lines into normalized
// alerts, and executor-side emission of load-balancer pools, flow rules,
// and broker catalog orderings. All operations are pure and reentrant.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qox/model.hpp"

namespace qox {

// One alert per line:
//   MM/DD-HH:MM:SS.ffffff [**] [GID:SID:REV] MESSAGE [**]
//     [Classification: TEXT] [Priority: N] {PROTO} SRC -> DST
// The Classification group is optional; SRC/DST are dotted quads with an
// optional :PORT suffix, kept verbatim. Alert timestamps carry no year, so
// they map to seconds within a (non-leap) year; cross-year windows are
// unsupported. gid/rev/usec/classification are kept so that formatting a
// parsed alert reproduces the input byte for byte.
struct NormalizedAlert {
    std::int64_t sig_id = 0;  // the SID field
    std::string message;
    std::int64_t priority = 0;
    std::string proto;
    std::string src;
    std::string dst;
    Timestamp timestamp = 0;  // seconds within year

    std::int64_t gid = 1;
    std::int64_t rev = 0;
    std::uint32_t usec = 0;
    std::optional<std::string> classification;

    void validate() const;
};

// Parse failure carrying the byte offset where the line first diverges
// from the grammar.
class AlertParseError : public Error {
public:
    AlertParseError(std::size_t offset, const std::string& expected);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

NormalizedAlert parse_alert_line(std::string_view line);

// Inverse of parse_alert_line: format(parse(x)) == x for grammar-valid x.
std::string format_alert_line(const NormalizedAlert& alert);

// Pool boundary table: thresholds strictly ascending, labels distinct.
// A value below the first threshold maps to the base label; a value equal
// to a threshold belongs to that (higher) pool.
struct PoolBoundary {
    double threshold = 0.0;
    std::string label;
};

struct PoolTable {
    std::string base_label;
    std::vector<PoolBoundary> boundaries;
};

std::string assign_pool(double rating_value, const PoolTable& table);

struct PoolAssignment {
    IdentityId client;
    std::string pool;
};

// Deterministic text form: one "pool <label>" stanza per label (labels
// sorted), backends in given order, then "client <id> -> <label>" lines
// sorted by client id. Identical inputs yield byte-identical output.
std::string emit_lb_config(std::span<const PoolAssignment> assignments,
                           const std::map<std::string, std::vector<std::string>>& pools);

enum class FlowAction { allow, block, redirect };

std::string to_string(FlowAction a);

struct FlowRule {
    std::string match_src;  // client identity token
    FlowAction action = FlowAction::allow;
    std::optional<std::string> redirect_target;  // present iff action == redirect
    int priority = 0;
};

struct FlowPolicy {
    double block_below = 0.0;
    double redirect_below = 0.0;
    std::string redirect_pool;
};

// value < block_below -> block (priority 100);
// block_below <= value < redirect_below -> redirect (priority 50);
// otherwise no rule. Rules come out sorted by client id.
std::vector<FlowRule> emit_flow_rules(const std::map<IdentityId, double>& ratings,
                                      const FlowPolicy& policy);

struct CatalogEntry {
    IdentityId provider;
    std::string service_name;
    std::string version;
};

// Same contract as the exchange's discover, applied to catalog entries:
// keep entries whose provider mean >= min_rating, sort by mean descending,
// tie-break provider id (then name, version) ascending. Unrated providers
// are dropped when min_rating > 0 and appended last when min_rating == 0.
std::vector<CatalogEntry> filter_sort_catalog(
    std::span<const CatalogEntry> services,
    const std::map<IdentityId, AggregateRating>& aggregates, double min_rating);

}  // namespace qox
