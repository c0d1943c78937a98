#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "celds/domain.hpp"
#include "celds/update_set.hpp"
#include "celds/value.hpp"

namespace celds {

/// Who may write a function's locations.
enum class FunctionKind : std::uint8_t {
    Monitored,  // environment only
    Controlled, // machine only
    Shared,     // both
    Derived,    // computed from other locations, never written
};

std::string_view to_string(FunctionKind k);

/// Agent domains that function arguments and property quantifiers range over.
enum class Domain : std::uint8_t { Self, Node, Monitor, Heartbeat, Leader, Controller, Action, Session };

struct FunctionInfo {
    std::string_view name;
    Domain domain;
    FunctionKind kind;
    MergePolicy policy;
};

const FunctionInfo* find_function(std::string_view name);
const std::vector<FunctionInfo>& all_functions();

/// Domain by the names used in properties: Monitor, Leader, Node, Controller/ActionController, Action, ...
std::optional<Domain> parse_domain(std::string_view name);

/// Agent names currently in `domain`, in id order.
std::vector<std::string> domain_members(const WorldState& world, Domain domain);

/// Current value of a location. Throws ContractViolation for unknown functions or agents.
Value read_location(const WorldState& world, const Location& loc, const Config& cfg);

/// Whether the agent named by the location's argument exists, so that a read would succeed.
bool location_available(const WorldState& world, const Location& loc);

/// Writes one location. Throws ContractViolation on unknown locations, derived functions or ill-typed values.
void write_location(WorldState& world, const Location& loc, const Value& value);

/// Applies a merged update set in place. Additive entries add their delta to the current value.
void apply_updates(WorldState& world, const std::map<Location, MergedUpdate>& merged,
                   const std::vector<AdaptationSession>& created);

/// Every stored (non-derived) location of the world, sorted.
std::vector<Location> enumerate_locations(const WorldState& world);

/// Canonical text of the world: one `location=value` line per stored location, sorted.
std::string encode_world(const WorldState& world);

/// Stable 64-bit content hash of encode_world, as 16 hex digits.
std::string world_digest(const WorldState& world);

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace celds
