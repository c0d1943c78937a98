#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "celds/domain.hpp"
#include "celds/middleware.hpp"

namespace celds {

/// Values the environment may take in a state, per agent situation. Agents in any other situation
/// see the default MonitorEnvironment.
struct ChoiceDomain {
    std::vector<std::optional<std::int64_t>> heartbeat; // WAIT_FOR_RESPONSE; nullopt = no response yet
    std::vector<NodeMetrics> measurements;               // COLLECT_DATA
    std::vector<bool> repository;                        // RETRIEVE_DATA
    std::vector<bool> outcomes;                          // ACTION_RUNNING controllers

    /// {latency 5, latency 21}, {normal, critical}, {available, not}, {success}.
    static ChoiceDomain standard();
};

struct StateKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const { return static_cast<std::size_t>(k.hi ^ (k.lo * 31)); }
};

StateKey state_key(const WorldState& world);

/// Every successor of `state`: one middleware step, then each combination of environment values
/// allowed for the new agent states. The step counter stays at 0. Throws ExplorationError when a
/// step conflicts or breaks a contract, or when a needed choice set is empty.
std::vector<WorldState> successors(const WorldState& state, const MiddlewareContext& ctx,
                                   const ChoiceDomain& choices);

/// Copy of `world` at step 0 with environment values not read by any agent reset to defaults.
WorldState canonical_state(WorldState world);

/// Breadth-first reachable states. States at depth == bound are recorded but not expanded.
struct ReachabilityGraph {
    int bound = 0;
    std::vector<WorldState> states;
    std::vector<StateKey> keys;
    std::vector<int> depth;
    std::vector<std::int64_t> parent; // -1 for the initial state
    std::vector<std::vector<std::size_t>> succ;
    std::vector<bool> expanded;
    std::size_t transitions = 0;

    std::size_t size() const { return states.size(); }
    /// Initial state first.
    std::vector<std::size_t> path_to(std::size_t state) const;
};

struct ExploreOptions {
    MiddlewareContext ctx;
    ChoiceDomain choices = ChoiceDomain::standard();
    int bound = 12;
};

ReachabilityGraph explore_serial(const WorldState& initial, const ExploreOptions& opts);

/// Same graph as explore_serial, state numbering included; each BFS level is expanded in parallel.
ReachabilityGraph explore_parallel(const WorldState& initial, const ExploreOptions& opts);

} // namespace celds
