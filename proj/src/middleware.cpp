#include "celds/middleware.hpp"

#include <algorithm>
#include <set>

#include "celds/errors.hpp"
#include "celds/leader_engine.hpp"

namespace celds {

namespace {

Location at(std::string_view function, std::string argument)
{
    return Location{std::string(function), std::move(argument)};
}

Value sym(std::string_view s)
{
    return Symbol{std::string(s)};
}

IdList names(std::span<const MonitorId> ids)
{
    IdList out;
    for (MonitorId m : ids)
        out.push_back(m.name());
    return out;
}

std::vector<MonitorId> free_pool(const WorldState& world)
{
    std::vector<MonitorId> out;
    for (const auto& m : world.monitors)
        if (!m.assigned_node && !m.dismissed)
            out.push_back(m.id);
    return out;
}

StoreRecord record(StoreKind store, std::int64_t step, std::string kind, std::string node, std::string subject,
                   std::string detail = {})
{
    StoreRecord r;
    r.store = store;
    r.step = step;
    r.kind = std::move(kind);
    r.node = std::move(node);
    r.subject = std::move(subject);
    r.detail = std::move(detail);
    return r;
}

template <typename T>
Value opt_value(const std::optional<T>& v)
{
    return v ? Value{*v} : Value{Undef{}};
}

} // namespace

void RuleOutput::append(const RuleOutput& other)
{
    updates.append(other.updates);
    records.insert(records.end(), other.records.begin(), other.records.end());
}

UpdateSet assign_monitors_to_node(const WorldState& world, NodeId node, std::span<const MonitorId> pool, int k)
{
    if (!world.find(node))
        throw ContractViolation("assign_monitors_to_node: unknown node " + node.name());
    UpdateSet u;
    std::vector<MonitorId> list = world.monitors_of(node);
    if (static_cast<int>(list.size()) >= k)
        return u;
    std::vector<MonitorId> candidates;
    for (MonitorId m : pool) {
        const MonitorAgent* agent = world.find(m);
        if (agent && !agent->assigned_node && !agent->dismissed)
            candidates.push_back(m);
    }
    std::sort(candidates.begin(), candidates.end());
    const std::size_t needed = static_cast<std::size_t>(k) - list.size();
    if (candidates.size() < needed)
        throw AssignmentError("not enough unassigned monitors for " + node.name() + ": need " +
                              std::to_string(needed) + ", have " + std::to_string(candidates.size()));
    list.insert(list.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(needed));
    u.add(at("assigned_monitors", node.name()), names(list), "middleware");
    return u;
}

UpdateSet assign_monitors_to_node(const WorldState& world, NodeId node, int k)
{
    const auto pool = free_pool(world);
    return assign_monitors_to_node(world, node, pool, k);
}

UpdateSet elect_leader(const WorldState& world, NodeId node, std::span<const MonitorId> monitors)
{
    UpdateSet u;
    if (world.has_leader.count(node))
        return u;
    if (monitors.empty())
        throw ElectionError("cannot elect a leader for " + node.name() + ": no monitors assigned");
    u.add(at("has_leader", node.name()), Symbol{leader_for(node).name()}, "middleware");
    return u;
}

UpdateSet elect_leader(const WorldState& world, NodeId node)
{
    const auto monitors = world.monitors_of(node);
    return elect_leader(world, node, monitors);
}

UpdateSet route_gossip(const WorldState& world)
{
    UpdateSet u;
    for (const auto& m : world.monitors) {
        if (!m.trigger_gossip || m.dismissed)
            continue;
        if (!m.assigned_node)
            throw ContractViolation("route_gossip: " + m.id.name() + " raised gossip without a node");
        auto it = world.has_leader.find(*m.assigned_node);
        if (it == world.has_leader.end())
            continue;
        const LeaderAgent* leader = world.find(it->second);
        if (leader && leader->state == LeaderState::IDLE_LEADER)
            u.add(at("leader_state", leader->id.name()), sym("EVALUATE"), m.id.name());
    }
    return u;
}

RuleOutput dismiss_low_confidence(const WorldState& world, const Config& cfg, std::int64_t step)
{
    RuleOutput out;
    for (const auto& [node, list] : world.assigned_monitors) {
        std::vector<MonitorId> kept;
        std::vector<MonitorId> gone;
        for (MonitorId id : list) {
            const MonitorAgent* m = world.find(id);
            if (m && m->confidence_degree < cfg.min_confidence_degree)
                gone.push_back(id);
            else
                kept.push_back(id);
        }
        if (gone.empty())
            continue;
        out.updates.add(at("assigned_monitors", node.name()), names(kept), "middleware");
        for (MonitorId id : gone) {
            out.updates.add(at("dismissed", id.name()), true, "middleware");
            char buf[32];
            std::snprintf(buf, sizeof buf, "confidence %.2f", world.find(id)->confidence_degree);
            out.records.push_back(record(StoreKind::META, step, "dismissal", node.name(), id.name(), buf));
            out.records.push_back(record(StoreKind::META, step, "replacement_request", node.name(), id.name()));
        }
    }
    return out;
}

Diagnosis leader_assessment(const LeaderAgent& leader, const WorldState& world, const Config& cfg)
{
    if (!cfg.weighted_diagnosis)
        return assess_node(leader.failed_diagnoses, leader.critical_diagnoses, leader.normal_diagnoses);
    std::vector<std::pair<Diagnosis, double>> votes;
    for (const auto& b : leader.ballots) {
        const MonitorAgent* m = world.find(b.monitor);
        votes.emplace_back(b.diagnosis, m ? m->confidence_degree : 0.0);
    }
    return assess_node_weighted(votes);
}

RuleOutput step_leader(const LeaderAgent& leader, const WorldState& world, const Config& cfg, std::int64_t step)
{
    RuleOutput out;
    auto& u = out.updates;
    const std::string agent = leader.id.name();

    if (leader.state == LeaderState::EVALUATE) {
        std::vector<MonitorAgent> monitors;
        for (MonitorId id : world.monitors_of(leader.node))
            if (const MonitorAgent* m = world.find(id))
                monitors.push_back(*m);
        const DiagnosisTally t = tally_diagnoses(leader, monitors);
        IdList ballots;
        for (const auto& b : t.ballots)
            ballots.push_back(b.monitor.name() + ":" + std::string(to_string(b.diagnosis)));
        u.add(at("failed_diagnoses", agent), t.failed, agent);
        u.add(at("critical_diagnoses", agent), t.critical, agent);
        u.add(at("normal_diagnoses", agent), t.normal, agent);
        u.add(at("ballots", agent), ballots, agent);
        u.add(at("leader_state", agent), sym("ASSESS"), agent);
        return out;
    }

    if (leader.state == LeaderState::ASSESS) {
        const Diagnosis d = leader_assessment(leader, world, cfg);
        u.add(at("assessment", agent), sym(to_string(d)), agent);

        StoreRecord row = record(StoreKind::EVENT, step, "assessment", leader.node.name(), agent,
                                 std::to_string(leader.failed_diagnoses) + "," +
                                     std::to_string(leader.critical_diagnoses) + "," +
                                     std::to_string(leader.normal_diagnoses));
        row.diagnosis = d;
        out.records.push_back(row);
        if (leader.failed_diagnoses + leader.critical_diagnoses + leader.normal_diagnoses == 0)
            out.records.push_back(record(StoreKind::EVENT, step, "insufficient_data", leader.node.name(), agent,
                                         "no monitor reported a diagnosis"));

        for (const auto& b : leader.ballots) {
            const MonitorAgent* m = world.find(b.monitor);
            if (!m)
                continue;
            const double c = update_confidence(b.diagnosis, d, m->confidence_degree, cfg);
            if (c != m->confidence_degree)
                u.add(at("confidence_degree", m->id.name()), c, agent);
        }

        LeaderAgent assessed = leader;
        assessed.assessment = d;
        const LeaderAgent reset = reset_counters(assessed);
        u.add(at("failed_diagnoses", agent), reset.failed_diagnoses, agent);
        u.add(at("critical_diagnoses", agent), reset.critical_diagnoses, agent);
        u.add(at("normal_diagnoses", agent), reset.normal_diagnoses, agent);
        u.add(at("ballots", agent), IdList{}, agent);
        u.add(at("leader_state", agent), sym(to_string(reset.state)), agent);
    }
    return out;
}

UpdateSet monitor_updates(const MonitorAgent& before, const MonitorAgent& after)
{
    if (before.id != after.id || before.assigned_node != after.assigned_node)
        throw ContractViolation("monitor transition changed the identity or node of " + before.id.name());
    UpdateSet u;
    const std::string agent = before.id.name();
    auto put = [&](std::string_view f, Value v) { u.add(at(f, agent), std::move(v), agent); };
    if (before.state != after.state)
        put("monitor_state", sym(to_string(after.state)));
    if (before.diagnosis != after.diagnosis)
        put("diagnosis", after.diagnosis ? sym(to_string(*after.diagnosis)) : Value{Undef{}});
    if (before.trigger_gossip != after.trigger_gossip)
        put("trigger_gossip", after.trigger_gossip);
    if (before.confidence_degree != after.confidence_degree)
        put("confidence_degree", after.confidence_degree);
    if (before.current_measurements != after.current_measurements)
        put("current_measurements", opt_value(after.current_measurements));
    if (before.pending_heartbeat != after.pending_heartbeat)
        put("heartbeat_sent_at", after.pending_heartbeat ? Value{after.pending_heartbeat->sent_at} : Value{Undef{}});
    if (before.heartbeat_wait != after.heartbeat_wait)
        put("heartbeat_wait", std::int64_t{after.heartbeat_wait});
    if (before.retrieved_history != after.retrieved_history)
        put("retrieved_history", opt_value(after.retrieved_history));
    if (before.dismissed != after.dismissed)
        put("dismissed", after.dismissed);
    return u;
}

RuleOutput middleware_step(const WorldState& world, const MiddlewareContext& ctx)
{
    if (world.middleware_state != MiddlewareState::EXECUTING)
        throw ContractViolation("middleware_step: middleware is " + std::string(to_string(world.middleware_state)));
    const Config& cfg = ctx.cfg;
    const std::int64_t step = world.step;
    RuleOutput out;

    // Dismissal first: nodes losing monitors this step are topped up on the next one.
    RuleOutput dismissal = dismiss_low_confidence(world, cfg, step);
    std::set<std::string> dismissing;
    for (const auto& e : dismissal.updates.entries())
        if (e.location.function == "assigned_monitors")
            dismissing.insert(e.location.argument);
    out.append(dismissal);

    // Assignment and election, computed jointly so two nodes never claim the same monitor.
    std::vector<MonitorId> pool = free_pool(world);
    std::size_t next_free = 0;
    for (const auto& node : world.nodes) {
        std::vector<MonitorId> list = world.monitors_of(node.id);
        if (!dismissing.count(node.id.name()) && static_cast<int>(list.size()) < cfg.redundancy_k) {
            const std::size_t needed = static_cast<std::size_t>(cfg.redundancy_k) - list.size();
            const std::size_t available = pool.size() - next_free;
            const bool initial = !world.has_leader.count(node.id);
            if (initial && available < needed)
                throw AssignmentError("not enough unassigned monitors for " + node.id.name() + ": need " +
                                      std::to_string(needed) + ", have " + std::to_string(available));
            const std::size_t take = std::min(needed, available);
            if (take > 0) {
                std::vector<MonitorId> added(pool.begin() + static_cast<std::ptrdiff_t>(next_free),
                                             pool.begin() + static_cast<std::ptrdiff_t>(next_free + take));
                next_free += take;
                list.insert(list.end(), added.begin(), added.end());
                out.updates.add(at("assigned_monitors", node.id.name()), names(list), "middleware");
                if (!initial)
                    for (MonitorId m : added)
                        out.records.push_back(record(StoreKind::META, step, "replacement", node.id.name(), m.name()));
            }
        }
        if (!list.empty())
            out.updates.append(elect_leader(world, node.id, list));
    }

    out.updates.append(route_gossip(world));

    for (const auto& m : world.monitors) {
        if (!m.assigned_node || m.dismissed)
            continue;
        MonitorStep s = ctx.monitor_rule(m, world.env(m.id), ctx.stores, cfg, step);
        out.updates.append(monitor_updates(m, s.next));
        out.records.insert(out.records.end(), s.records.begin(), s.records.end());
    }

    std::uint32_t next_session = world.next_session;
    std::uint32_t next_controller = world.next_controller;
    for (const auto& leader : world.leaders) {
        out.append(step_leader(leader, world, cfg, step));

        if (leader.state != LeaderState::ASSESS)
            continue;
        const Diagnosis d = leader_assessment(leader, world, cfg);
        if (d == Diagnosis::NORMAL)
            continue;
        const bool busy = std::any_of(world.sessions.begin(), world.sessions.end(), [&](const AdaptationSession& s) {
            return s.node == leader.node && s.status == SessionStatus::RUNNING;
        });
        if (busy)
            continue;
        const NodeProfile* profile = world.find(leader.node);
        std::optional<CaseMatch> match;
        if (ctx.repository && profile)
            match = retrieve_case(profile->characteristics, *ctx.repository, cfg);
        if (!match) {
            out.records.push_back(record(StoreKind::EVENT, step, "escalation", leader.node.name(), leader.id.name(),
                                         "no applicable case for " + std::string(to_string(d))));
            continue;
        }
        if (areas_overlap(world, match->adaptation_case.solution)) {
            out.records.push_back(record(StoreKind::EVENT, step, "escalation", leader.node.name(), leader.id.name(),
                                         "area of inference held by a running session"));
            continue;
        }
        AdaptationSession session =
            instantiate_solution(match->adaptation_case.solution, SessionId{next_session}, leader.node,
                                 ControllerId{next_controller}, match->adaptation_case.id, step);
        next_session += 1;
        next_controller += static_cast<std::uint32_t>(session.number_of_controllers());
        char buf[64];
        std::snprintf(buf, sizeof buf, "case %lld similarity %.3f", static_cast<long long>(session.case_id),
                      match->similarity);
        out.records.push_back(
            record(StoreKind::EVENT, step, "session_started", leader.node.name(), session.id.name(), buf));
        out.updates.extend(std::move(session));
    }
    if (next_session != world.next_session) {
        out.updates.add(at("next_session", "self"), std::int64_t{next_session}, "middleware");
        out.updates.add(at("next_controller", "self"), std::int64_t{next_controller}, "middleware");
    }

    for (const auto& s : world.sessions) {
        for (const auto& c : s.controllers) {
            ControllerStep cs = step_controller(c, s, world, cfg, step);
            out.updates.append(cs.updates);
            out.records.insert(out.records.end(), cs.records.begin(), cs.records.end());
        }
        ControllerStep ss = step_session(s, step);
        out.updates.append(ss.updates);
        out.records.insert(out.records.end(), ss.records.begin(), ss.records.end());
    }
    return out;
}

} // namespace celds
