#include "celds/monitor_engine.hpp"

#include "celds/errors.hpp"

namespace celds {

HeartbeatResult evaluate_heartbeat(const Heartbeat& hb, std::int64_t max_latency)
{
    if (!hb.response_arrived)
        return HeartbeatResult::MISSING;
    if (hb.latency && *hb.latency > max_latency)
        return HeartbeatResult::LATE;
    return HeartbeatResult::OK;
}

Diagnosis assign_diagnosis(const std::optional<NodeMetrics>& metrics, HeartbeatResult hb_result, const Config& cfg)
{
    if (hb_result != HeartbeatResult::OK)
        return Diagnosis::FAILED;
    if (!metrics)
        throw ContractViolation("assign_diagnosis: heartbeat OK but no measurements");
    if (metrics->cpu_usage >= cfg.critical_cpu || metrics->memory_usage >= cfg.critical_memory ||
        metrics->storage_usage >= cfg.critical_storage)
        return Diagnosis::CRITICAL;
    return Diagnosis::NORMAL;
}

std::optional<std::vector<NodeMetrics>> retrieve_history(const MonitorAgent& monitor, const Stores* store,
                                                         bool repository_available)
{
    if (monitor.state != MonitorState::RETRIEVE_DATA)
        throw ContractViolation("retrieve_history: " + monitor.id.name() + " is not in RETRIEVE_DATA");
    if (!repository_available)
        return std::nullopt;
    if (!store || !monitor.assigned_node)
        return std::vector<NodeMetrics>{};
    return store->metric_history(*monitor.assigned_node);
}

Heartbeat observed_heartbeat(const MonitorAgent& monitor, const MonitorEnvironment& env)
{
    Heartbeat hb = monitor.pending_heartbeat.value_or(Heartbeat{monitor.assigned_node.value_or(NodeId{}), 0, false, std::nullopt});
    hb.response_arrived = env.response_arrived;
    hb.latency = env.response_arrived ? env.latency : std::nullopt;
    return hb;
}

std::optional<HeartbeatResult> heartbeat_verdict(const MonitorAgent& monitor, const MonitorEnvironment& env,
                                                 const Config& cfg)
{
    if (monitor.state != MonitorState::WAIT_FOR_RESPONSE)
        return std::nullopt;
    const HeartbeatResult r = evaluate_heartbeat(observed_heartbeat(monitor, env), cfg.max_latency);
    if (r == HeartbeatResult::MISSING && monitor.heartbeat_wait + 1 < cfg.heartbeat_wait_steps)
        return std::nullopt;
    return r;
}

bool heartbeat_timeout(const MonitorAgent& monitor, const MonitorEnvironment& env, const Config& cfg)
{
    auto verdict = heartbeat_verdict(monitor, env, cfg);
    return verdict && *verdict != HeartbeatResult::OK;
}

bool is_problem_discovered(const MonitorAgent& monitor, const MonitorEnvironment& env, const Config& cfg)
{
    switch (monitor.state) {
    case MonitorState::WAIT_FOR_RESPONSE:
        return heartbeat_timeout(monitor, env, cfg);
    case MonitorState::ASSIGN_DIAGNOSIS:
        return monitor.current_measurements &&
               assign_diagnosis(monitor.current_measurements, HeartbeatResult::OK, cfg) != Diagnosis::NORMAL;
    default:
        return false;
    }
}

MonitorStep step_monitor(const MonitorAgent& monitor, const MonitorEnvironment& env, const Stores* store,
                         const Config& cfg, std::int64_t step)
{
    if (!monitor.assigned_node)
        throw ContractViolation("step_monitor: " + monitor.id.name() + " is not assigned to a node");

    MonitorStep out{monitor, {}};
    MonitorAgent& next = out.next;
    switch (monitor.state) {
    case MonitorState::ACTIVE:
        next.pending_heartbeat = Heartbeat{*monitor.assigned_node, step, false, std::nullopt};
        next.heartbeat_wait = 0;
        next.state = MonitorState::WAIT_FOR_RESPONSE;
        break;

    case MonitorState::WAIT_FOR_RESPONSE: {
        auto verdict = heartbeat_verdict(monitor, env, cfg);
        if (!verdict) {
            next.heartbeat_wait = monitor.heartbeat_wait + 1;
        } else if (*verdict == HeartbeatResult::OK) {
            next.state = MonitorState::COLLECT_DATA;
        } else {
            next.diagnosis = Diagnosis::FAILED;
            next.trigger_gossip = true;
            next.state = MonitorState::REPORT_PROBLEM;
        }
        break;
    }

    case MonitorState::COLLECT_DATA:
        // Measurements not published yet: poll again next step.
        if (env.measurements) {
            next.current_measurements = env.measurements;
            next.state = MonitorState::RETRIEVE_DATA;
        }
        break;

    case MonitorState::RETRIEVE_DATA: {
        auto history = retrieve_history(monitor, store, env.repository_available);
        next.retrieved_history =
            history ? std::optional<std::int64_t>(static_cast<std::int64_t>(history->size())) : std::nullopt;
        next.state = MonitorState::ASSIGN_DIAGNOSIS;
        break;
    }

    case MonitorState::ASSIGN_DIAGNOSIS: {
        const Diagnosis d = assign_diagnosis(monitor.current_measurements, HeartbeatResult::OK, cfg);
        next.diagnosis = d;
        if (d == Diagnosis::NORMAL) {
            next.state = MonitorState::LOG_DATA;
        } else {
            next.trigger_gossip = true;
            next.state = MonitorState::REPORT_PROBLEM;
        }
        break;
    }

    case MonitorState::REPORT_PROBLEM:
        next.state = MonitorState::LOG_DATA;
        break;

    case MonitorState::LOG_DATA: {
        StoreRecord row;
        row.store = StoreKind::DATA;
        row.step = step;
        row.kind = "metrics";
        row.node = monitor.assigned_node->name();
        row.subject = monitor.id.name();
        row.metrics = monitor.current_measurements;
        row.diagnosis = monitor.diagnosis;
        out.records.push_back(std::move(row));

        next.trigger_gossip = false;
        next.current_measurements.reset();
        next.pending_heartbeat.reset();
        next.retrieved_history.reset();
        next.heartbeat_wait = 0;
        next.state = MonitorState::ACTIVE;
        break;
    }
    }
    return out;
}

} // namespace celds
