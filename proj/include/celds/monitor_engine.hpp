#pragma once

#include <optional>
#include <vector>

#include "celds/domain.hpp"
#include "celds/stores.hpp"

namespace celds {

/// OK, LATE (latency above max_latency) or MISSING (no response by the observation step).
HeartbeatResult evaluate_heartbeat(const Heartbeat& hb, std::int64_t max_latency);

/// FAILED for a late or missing heartbeat, CRITICAL on any resource threshold breach, else NORMAL.
/// Bandwidth is logged but never thresholded. Throws ContractViolation for OK without metrics.
Diagnosis assign_diagnosis(const std::optional<NodeMetrics>& metrics, HeartbeatResult hb_result, const Config& cfg);

/// Past metrics for the monitor's node, or nullopt (the unavailable marker) when the repository is down.
/// Throws ContractViolation unless the monitor is in RETRIEVE_DATA.
std::optional<std::vector<NodeMetrics>> retrieve_history(const MonitorAgent& monitor, const Stores* store,
                                                         bool repository_available);

/// The heartbeat as observed by a waiting monitor: its pending probe plus the environment's answer.
Heartbeat observed_heartbeat(const MonitorAgent& monitor, const MonitorEnvironment& env);

/// Verdict a monitor in WAIT_FOR_RESPONSE reaches this step, or nullopt if it keeps waiting.
/// A missing response becomes MISSING once heartbeat_wait_steps observations went unanswered.
std::optional<HeartbeatResult> heartbeat_verdict(const MonitorAgent& monitor, const MonitorEnvironment& env,
                                                 const Config& cfg);

/// True when the waiting monitor gives up on its heartbeat this step (late or missing).
bool heartbeat_timeout(const MonitorAgent& monitor, const MonitorEnvironment& env, const Config& cfg);

/// True when the monitor's next transition reports a problem.
bool is_problem_discovered(const MonitorAgent& monitor, const MonitorEnvironment& env, const Config& cfg);

struct MonitorStep {
    MonitorAgent next;
    std::vector<StoreRecord> records;
};

/// One state transition of the monitor cycle
/// ACTIVE -> WAIT_FOR_RESPONSE -> {COLLECT_DATA | REPORT_PROBLEM} -> ... -> LOG_DATA -> ACTIVE.
/// Throws ContractViolation for an unassigned monitor.
MonitorStep step_monitor(const MonitorAgent& monitor, const MonitorEnvironment& env, const Stores* store,
                         const Config& cfg, std::int64_t step);

/// Signature shared by the production transition and test mutants.
using MonitorTransition = MonitorStep (*)(const MonitorAgent&, const MonitorEnvironment&, const Stores*,
                                          const Config&, std::int64_t);

} // namespace celds
