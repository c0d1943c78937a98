#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "celds/domain.hpp"

namespace celds {

enum class StoreKind : std::uint8_t { DATA, EVENT, META };

std::string_view to_string(StoreKind k);

/// One append-only row. Which fields are meaningful depends on `kind`.
struct StoreRecord {
    StoreKind store = StoreKind::EVENT;
    std::int64_t step = 0;
    std::string kind;    // e.g. "metrics", "session_aborted", "dismissal"
    std::string node;    // node name or empty
    std::string subject; // agent name or empty
    std::string detail;
    std::optional<NodeMetrics> metrics;
    std::optional<Diagnosis> diagnosis;

    friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

/// The data, event and meta storages of a middleware component.
class Stores {
public:
    void append(StoreRecord record);
    void append(const std::vector<StoreRecord>& records);

    const std::vector<StoreRecord>& data() const { return data_; }
    const std::vector<StoreRecord>& events() const { return events_; }
    const std::vector<StoreRecord>& meta() const { return meta_; }

    /// Records of `store` about `node` with step in [from, to]. Unknown nodes give an empty result.
    std::vector<StoreRecord> query(StoreKind store, const std::string& node, std::int64_t from = std::numeric_limits<std::int64_t>::min(),
                                   std::int64_t to = std::numeric_limits<std::int64_t>::max()) const;

    /// Metric history logged for a node, oldest first.
    std::vector<NodeMetrics> metric_history(NodeId node) const;

    /// One JSON object per line, all three stores in append order.
    void write(std::ostream& out) const;

private:
    std::vector<StoreRecord> data_;
    std::vector<StoreRecord> events_;
    std::vector<StoreRecord> meta_;
};

} // namespace celds
