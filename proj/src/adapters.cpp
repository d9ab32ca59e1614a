#include "qox/adapters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace qox {

namespace {

// Cumulative days before each month, non-leap year.
constexpr int kDaysBefore[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
constexpr int kDaysInMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
constexpr Timestamp kSecondsPerYear = 365ULL * 86400ULL;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class LineScanner {
public:
    explicit LineScanner(std::string_view line) : line_(line) {}

    std::size_t pos() const { return pos_; }
    bool at_end() const { return pos_ >= line_.size(); }

    bool peek_literal(std::string_view lit) const {
        return line_.substr(pos_, lit.size()) == lit;
    }

    void expect(std::string_view lit) {
        for (std::size_t i = 0; i < lit.size(); ++i) {
            if (pos_ + i >= line_.size() || line_[pos_ + i] != lit[i]) {
                fail(pos_ + i, "\"" + std::string(lit) + "\"");
            }
        }
        pos_ += lit.size();
    }

    // Exactly n digits; range-checked against [lo, hi] with the error
    // anchored at the field start.
    std::int64_t fixed_digits(int n, std::int64_t lo, std::int64_t hi, const char* what) {
        const std::size_t start = pos_;
        std::int64_t value = 0;
        for (int i = 0; i < n; ++i) {
            if (pos_ >= line_.size() || !is_digit(line_[pos_])) fail(pos_, "digit");
            value = value * 10 + (line_[pos_] - '0');
            ++pos_;
        }
        if (value < lo || value > hi) fail(start, what);
        return value;
    }

    // One or more digits, capped to keep arithmetic safe.
    std::int64_t integer(const char* what) {
        const std::size_t start = pos_;
        if (at_end() || !is_digit(line_[pos_])) fail(pos_, what);
        std::int64_t value = 0;
        while (!at_end() && is_digit(line_[pos_])) {
            value = value * 10 + (line_[pos_] - '0');
            if (value > 99999999999LL) fail(start, what);
            ++pos_;
        }
        return value;
    }

    // Text up to (not including) the next occurrence of `stop`; non-empty.
    std::string text_until(std::string_view stop, const char* what) {
        const std::size_t found = line_.find(stop, pos_);
        if (found == std::string_view::npos) fail(line_.size(), stop.data());
        if (found == pos_) fail(pos_, what);
        std::string out(line_.substr(pos_, found - pos_));
        pos_ = found;
        return out;
    }

    // Dotted quad with optional :PORT, returned verbatim.
    std::string address() {
        const std::size_t start = pos_;
        for (int octet = 0; octet < 4; ++octet) {
            if (octet > 0) expect(".");
            const std::size_t octet_start = pos_;
            int digits = 0;
            long value = 0;
            while (!at_end() && is_digit(line_[pos_]) && digits < 3) {
                value = value * 10 + (line_[pos_] - '0');
                ++pos_;
                ++digits;
            }
            if (digits == 0) fail(pos_, "address octet");
            if (value > 255) fail(octet_start, "address octet in [0,255]");
        }
        if (!at_end() && line_[pos_] == ':') {
            ++pos_;
            const std::size_t port_start = pos_;
            int digits = 0;
            long value = 0;
            while (!at_end() && is_digit(line_[pos_]) && digits < 5) {
                value = value * 10 + (line_[pos_] - '0');
                ++pos_;
                ++digits;
            }
            if (digits == 0) fail(pos_, "port");
            if (value > 65535) fail(port_start, "port in [0,65535]");
        }
        return std::string(line_.substr(start, pos_ - start));
    }

    std::string proto_token() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) ||
                             line_[pos_] == '-' || line_[pos_] == '_')) {
            ++pos_;
        }
        if (pos_ == start) fail(pos_, "protocol token");
        return std::string(line_.substr(start, pos_ - start));
    }

    void expect_end() {
        if (!at_end()) fail(pos_, "end of line");
    }

    [[noreturn]] void fail(std::size_t offset, const std::string& expected) const {
        throw AlertParseError(offset, expected);
    }

private:
    std::string_view line_;
    std::size_t pos_ = 0;
};

std::string two_digits(std::int64_t v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02lld", static_cast<long long>(v));
    return buf;
}

}  // namespace

AlertParseError::AlertParseError(std::size_t offset, const std::string& expected)
    : Error(errc::parse_error,
            "offset " + std::to_string(offset) + ": expected " + expected),
      offset_(offset) {}

void NormalizedAlert::validate() const {
    if (src.empty() || dst.empty())
        throw Error(errc::validation_error, "alert src/dst must be non-empty");
    if (priority < 0) throw Error(errc::validation_error, "alert priority must be >= 0");
}

NormalizedAlert parse_alert_line(std::string_view line) {
    LineScanner s(line);
    NormalizedAlert a;

    const std::int64_t month = s.fixed_digits(2, 1, 12, "month in [01,12]");
    s.expect("/");
    const std::int64_t day =
        s.fixed_digits(2, 1, kDaysInMonth[month - 1], "day valid for month");
    s.expect("-");
    const std::int64_t hour = s.fixed_digits(2, 0, 23, "hour in [00,23]");
    s.expect(":");
    const std::int64_t minute = s.fixed_digits(2, 0, 59, "minute in [00,59]");
    s.expect(":");
    const std::int64_t second = s.fixed_digits(2, 0, 59, "second in [00,59]");
    s.expect(".");
    a.usec = static_cast<std::uint32_t>(s.fixed_digits(6, 0, 999999, "microseconds"));

    const std::int64_t day_of_year = kDaysBefore[month - 1] + (day - 1);
    a.timestamp = static_cast<Timestamp>(day_of_year * 86400 + hour * 3600 +
                                         minute * 60 + second);

    s.expect(" [**] [");
    a.gid = s.integer("generator id");
    s.expect(":");
    a.sig_id = s.integer("signature id");
    s.expect(":");
    a.rev = s.integer("revision");
    s.expect("] ");
    a.message = s.text_until(" [**]", "alert message");
    s.expect(" [**] ");
    if (s.peek_literal("[Classification: ")) {
        s.expect("[Classification: ");
        a.classification = s.text_until("]", "classification text");
        s.expect("] ");
    }
    s.expect("[Priority: ");
    a.priority = s.integer("priority");
    s.expect("] {");
    a.proto = s.proto_token();
    s.expect("} ");
    a.src = s.address();
    s.expect(" -> ");
    a.dst = s.address();
    s.expect_end();
    return a;
}

std::string format_alert_line(const NormalizedAlert& alert) {
    if (alert.timestamp >= kSecondsPerYear)
        throw Error(errc::invalid_value, "alert timestamp exceeds one year");
    const auto day_of_year = static_cast<int>(alert.timestamp / 86400);
    const auto seconds = static_cast<int>(alert.timestamp % 86400);
    int month = 11;
    while (month > 0 && kDaysBefore[month] > day_of_year) --month;
    const int day = day_of_year - kDaysBefore[month] + 1;

    std::string out;
    out += two_digits(month + 1);
    out += '/';
    out += two_digits(day);
    out += '-';
    out += two_digits(seconds / 3600);
    out += ':';
    out += two_digits((seconds / 60) % 60);
    out += ':';
    out += two_digits(seconds % 60);
    char usec_buf[8];
    std::snprintf(usec_buf, sizeof usec_buf, "%06u", alert.usec);
    out += '.';
    out += usec_buf;
    out += " [**] [";
    out += std::to_string(alert.gid);
    out += ':';
    out += std::to_string(alert.sig_id);
    out += ':';
    out += std::to_string(alert.rev);
    out += "] ";
    out += alert.message;
    out += " [**] ";
    if (alert.classification) {
        out += "[Classification: ";
        out += *alert.classification;
        out += "] ";
    }
    out += "[Priority: ";
    out += std::to_string(alert.priority);
    out += "] {";
    out += alert.proto;
    out += "} ";
    out += alert.src;
    out += " -> ";
    out += alert.dst;
    return out;
}

std::string assign_pool(double rating_value, const PoolTable& table) {
    for (std::size_t i = 1; i < table.boundaries.size(); ++i) {
        if (!(table.boundaries[i - 1].threshold < table.boundaries[i].threshold))
            throw Error(errc::config_error, "pool boundaries must be sorted ascending");
    }
    std::vector<std::string> labels{table.base_label};
    for (const auto& b : table.boundaries) labels.push_back(b.label);
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
        throw Error(errc::config_error, "pool labels must be distinct");

    const std::string* chosen = &table.base_label;
    for (const auto& b : table.boundaries) {
        if (rating_value >= b.threshold) chosen = &b.label;
    }
    return *chosen;
}

std::string emit_lb_config(std::span<const PoolAssignment> assignments,
                           const std::map<std::string, std::vector<std::string>>& pools) {
    for (const auto& a : assignments) {
        if (!pools.count(a.pool))
            throw Error(errc::config_error, "unknown pool label \"" + a.pool + "\"");
    }
    std::string out;
    for (const auto& [label, backends] : pools) {
        out += "pool " + label + "\n";
        for (const auto& backend : backends) out += "  server " + backend + "\n";
    }
    std::vector<const PoolAssignment*> ordered;
    ordered.reserve(assignments.size());
    for (const auto& a : assignments) ordered.push_back(&a);
    std::sort(ordered.begin(), ordered.end(),
              [](const PoolAssignment* x, const PoolAssignment* y) {
                  return x->client.id < y->client.id;
              });
    for (const auto* a : ordered)
        out += "client " + a->client.id + " -> " + a->pool + "\n";
    return out;
}

std::string to_string(FlowAction a) {
    switch (a) {
        case FlowAction::allow: return "allow";
        case FlowAction::block: return "block";
        case FlowAction::redirect: return "redirect";
    }
    throw Error(errc::invalid_value, "corrupt flow action");
}

std::vector<FlowRule> emit_flow_rules(const std::map<IdentityId, double>& ratings,
                                      const FlowPolicy& policy) {
    if (!(policy.block_below <= policy.redirect_below))
        throw Error(errc::config_error, "block_below must not exceed redirect_below");
    std::vector<FlowRule> rules;
    for (const auto& [client, value] : ratings) {
        if (value < policy.block_below) {
            rules.push_back({client.id, FlowAction::block, std::nullopt, 100});
        } else if (value < policy.redirect_below) {
            rules.push_back({client.id, FlowAction::redirect, policy.redirect_pool, 50});
        }
    }
    return rules;  // map iteration is already client-id ascending
}

std::vector<CatalogEntry> filter_sort_catalog(
    std::span<const CatalogEntry> services,
    const std::map<IdentityId, AggregateRating>& aggregates, double min_rating) {
    struct Keyed {
        const CatalogEntry* entry;
        double mean;
    };
    std::vector<Keyed> rated;
    std::vector<const CatalogEntry*> unrated;
    for (const auto& entry : services) {
        auto it = aggregates.find(entry.provider);
        if (it != aggregates.end() && it->second.mean) {
            if (*it->second.mean >= min_rating) rated.push_back({&entry, *it->second.mean});
        } else {
            unrated.push_back(&entry);
        }
    }
    auto entry_key = [](const CatalogEntry& e) {
        return std::tie(e.provider.id, e.service_name, e.version);
    };
    std::sort(rated.begin(), rated.end(), [&](const Keyed& x, const Keyed& y) {
        if (x.mean != y.mean) return x.mean > y.mean;
        return entry_key(*x.entry) < entry_key(*y.entry);
    });
    std::sort(unrated.begin(), unrated.end(),
              [&](const CatalogEntry* x, const CatalogEntry* y) {
                  return entry_key(*x) < entry_key(*y);
              });
    std::vector<CatalogEntry> out;
    out.reserve(rated.size() + unrated.size());
    for (const auto& k : rated) out.push_back(*k.entry);
    if (min_rating == 0.0)
        for (const auto* e : unrated) out.push_back(*e);
    return out;
}

}  // namespace qox
