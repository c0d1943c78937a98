#pragma once

#include <functional>
#include <span>
#include <vector>

#include "celds/adaptation.hpp"
#include "celds/domain.hpp"
#include "celds/monitor_engine.hpp"
#include "celds/stores.hpp"
#include "celds/update_set.hpp"

namespace celds {

/// Updates plus the store rows a rule wants appended if the step commits.
struct RuleOutput {
    UpdateSet updates;
    std::vector<StoreRecord> records;

    void append(const RuleOutput& other);
};

/// Tops `node` up to `k` monitors, taking the lowest unassigned, non-dismissed ids of `pool`.
/// No updates once the node has k monitors. Throws AssignmentError if the pool is too small.
UpdateSet assign_monitors_to_node(const WorldState& world, NodeId node, std::span<const MonitorId> pool, int k);

/// Same, with the world's unassigned monitors as the pool.
UpdateSet assign_monitors_to_node(const WorldState& world, NodeId node, int k);

/// Creates the node's leader once. `monitors` is the node's monitor set as of this step.
/// Throws ElectionError when the set is empty.
UpdateSet elect_leader(const WorldState& world, NodeId node, std::span<const MonitorId> monitors);
UpdateSet elect_leader(const WorldState& world, NodeId node);

/// IDLE_LEADER -> EVALUATE for every node with a monitor raising trigger_gossip.
UpdateSet route_gossip(const WorldState& world);

/// Dismisses assigned monitors whose confidence is strictly below the minimum.
RuleOutput dismiss_low_confidence(const WorldState& world, const Config& cfg, std::int64_t step = 0);

/// Tally in EVALUATE, assessment, confidence update and reset in ASSESS.
RuleOutput step_leader(const LeaderAgent& leader, const WorldState& world, const Config& cfg, std::int64_t step);

/// Assessment the leader reaches from its recorded tally.
Diagnosis leader_assessment(const LeaderAgent& leader, const WorldState& world, const Config& cfg);

/// Updates turning `before` into `after`, field by field.
UpdateSet monitor_updates(const MonitorAgent& before, const MonitorAgent& after);

struct MiddlewareContext {
    Config cfg;
    const CaseRepository* repository = nullptr; // no repository: problems are escalated
    const Stores* stores = nullptr;
    MonitorTransition monitor_rule = &step_monitor;
};

/// The whole middleware program for one step, evaluated on the frozen `world`.
/// Throws ContractViolation when the middleware is stopped.
RuleOutput middleware_step(const WorldState& world, const MiddlewareContext& ctx);

} // namespace celds
