#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "celds/domain.hpp"
#include "celds/value.hpp"

namespace celds {

enum class MergePolicy : std::uint8_t {
    Exclusive, // distinct values for one location conflict
    Additive,  // values are integer deltas, summed
};

struct Update {
    Location location;
    Value value;
    MergePolicy policy = MergePolicy::Exclusive;
    std::string agent; // who produced it, for conflict reports

    friend bool operator==(const Update&, const Update&) = default;
};

/// Two writes of distinct values to one exclusive location within a single step.
class ConflictError : public std::runtime_error {
public:
    ConflictError(Location location, Value first, std::string first_agent, Value second, std::string second_agent);

    const Location& location() const { return location_; }
    const Value& first() const { return first_; }
    const Value& second() const { return second_; }
    const std::string& first_agent() const { return first_agent_; }
    const std::string& second_agent() const { return second_agent_; }

private:
    Location location_;
    Value first_;
    Value second_;
    std::string first_agent_;
    std::string second_agent_;
};

/// Merged effect on one location: either an absolute value or an accumulated delta.
struct MergedUpdate {
    MergePolicy policy = MergePolicy::Exclusive;
    Value value;
    friend bool operator==(const MergedUpdate&, const MergedUpdate&) = default;
};

/// Every write produced by one step, plus the sessions the step creates.
class UpdateSet {
public:
    void add(Location location, Value value, std::string agent = {});
    void add_additive(Location location, std::int64_t delta, std::string agent = {});
    void add(Update update);
    void extend(AdaptationSession session); // new agents
    void append(const UpdateSet& other);

    const std::vector<Update>& entries() const { return entries_; }
    const std::vector<AdaptationSession>& created_sessions() const { return created_; }
    bool empty() const { return entries_.empty() && created_.empty(); }

    /// Merges entries per location. Throws ConflictError on an exclusive clash or on mixed policies.
    std::map<Location, MergedUpdate> merge() const;

private:
    std::vector<Update> entries_;
    std::vector<AdaptationSession> created_;
};

} // namespace celds
