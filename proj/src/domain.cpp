#include "celds/domain.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace celds {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view text)
{
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == text)
            return static_cast<Enum>(i);
    return std::nullopt;
}

constexpr std::array<std::string_view, 3> kDiagnosis{"NORMAL", "CRITICAL", "FAILED"};
constexpr std::array<std::string_view, 7> kMonitorState{
    "ACTIVE",         "WAIT_FOR_RESPONSE", "COLLECT_DATA", "RETRIEVE_DATA",
    "ASSIGN_DIAGNOSIS", "REPORT_PROBLEM",  "LOG_DATA",
};
constexpr std::array<std::string_view, 3> kLeaderState{"IDLE_LEADER", "EVALUATE", "ASSESS"};
constexpr std::array<std::string_view, 8> kControllerState{
    "WAITING_NOTIFICATION",        "NOTIFICATION_RECEIVED", "ASSESS_NOTIFICATION",
    "WAITING_FOR_ACKNOWLEDGEMENT", "ACTION_RUNNING",        "CONTROLLER_ACKNOW_FAILED",
    "READY_FOR_REMOVAL",           "TERMINATED",
};
constexpr std::array<std::string_view, 3> kNotificationKind{"ACTION_STARTING", "ACTION_COMPLETED", "ACTION_FAILED"};
constexpr std::array<std::string_view, 3> kSessionStatus{"RUNNING", "COMPLETED", "ABORTED"};
constexpr std::array<std::string_view, 2> kMiddlewareState{"EXECUTING", "STOPPED"};
constexpr std::array<std::string_view, 3> kHeartbeatResult{"OK", "LATE", "MISSING"};

bool in_percent(double v) { return v >= 0 && v <= 100; }

} // namespace

std::string_view to_string(Diagnosis d) { return kDiagnosis[static_cast<std::size_t>(d)]; }
std::string_view to_string(MonitorState s) { return kMonitorState[static_cast<std::size_t>(s)]; }
std::string_view to_string(LeaderState s) { return kLeaderState[static_cast<std::size_t>(s)]; }
std::string_view to_string(ControllerState s) { return kControllerState[static_cast<std::size_t>(s)]; }
std::string_view to_string(NotificationKind k) { return kNotificationKind[static_cast<std::size_t>(k)]; }
std::string_view to_string(SessionStatus s) { return kSessionStatus[static_cast<std::size_t>(s)]; }
std::string_view to_string(MiddlewareState s) { return kMiddlewareState[static_cast<std::size_t>(s)]; }
std::string_view to_string(HeartbeatResult r) { return kHeartbeatResult[static_cast<std::size_t>(r)]; }

std::optional<Diagnosis> parse_diagnosis(std::string_view t) { return lookup<Diagnosis>(kDiagnosis, t); }
std::optional<MonitorState> parse_monitor_state(std::string_view t) { return lookup<MonitorState>(kMonitorState, t); }
std::optional<LeaderState> parse_leader_state(std::string_view t) { return lookup<LeaderState>(kLeaderState, t); }
std::optional<ControllerState> parse_controller_state(std::string_view t)
{
    return lookup<ControllerState>(kControllerState, t);
}
std::optional<NotificationKind> parse_notification_kind(std::string_view t)
{
    return lookup<NotificationKind>(kNotificationKind, t);
}
std::optional<SessionStatus> parse_session_status(std::string_view t) { return lookup<SessionStatus>(kSessionStatus, t); }
std::optional<MiddlewareState> parse_middleware_state(std::string_view t)
{
    return lookup<MiddlewareState>(kMiddlewareState, t);
}

bool NodeMetrics::valid() const
{
    return latency >= 0 && bandwidth >= 0 && in_percent(cpu_usage) && in_percent(storage_usage) &&
           in_percent(memory_usage);
}

std::vector<std::string> Config::violations() const
{
    std::vector<std::string> out;
    if (redundancy_k < 1)
        out.push_back("redundancy_k must be >= 1");
    if (max_latency < 0)
        out.push_back("max_latency must be >= 0");
    auto unit = [&](double v, const char* name) {
        if (!(v >= 0 && v <= 1))
            out.push_back(std::string(name) + " must lie in [0,1]");
    };
    unit(min_confidence_degree, "min_confidence_degree");
    unit(confidence_reward, "confidence_reward");
    unit(confidence_penalty, "confidence_penalty");
    unit(similarity_threshold, "similarity_threshold");
    auto percent = [&](double v, const char* name) {
        if (!in_percent(v))
            out.push_back(std::string(name) + " must lie in [0,100]");
    };
    percent(critical_cpu, "critical_cpu");
    percent(critical_memory, "critical_memory");
    percent(critical_storage, "critical_storage");
    if (exploration_bound < 0)
        out.push_back("exploration_bound must be >= 0");
    if (heartbeat_wait_steps < 1)
        out.push_back("heartbeat_wait_steps must be >= 1");
    if (ack_wait_steps < 1)
        out.push_back("ack_wait_steps must be >= 1");
    return out;
}

bool is_known_feature(std::string_view name)
{
    return std::find(std::begin(kFeatureNames), std::end(kFeatureNames), name) != std::end(kFeatureNames);
}

std::vector<std::string> ProblemDescriptor::violations() const
{
    std::vector<std::string> out;
    for (const auto& [name, value] : features) {
        if (!is_known_feature(name))
            out.push_back("unknown feature '" + name + "'");
        if (const auto* num = std::get_if<NumericFeature>(&value)) {
            if (!(num->max > num->min))
                out.push_back("feature '" + name + "' has an empty range");
            else if (num->value < num->min || num->value > num->max)
                out.push_back("feature '" + name + "' outside its declared range");
        }
    }
    return out;
}

//
// WorkflowSchema
//

WorkflowSchema::WorkflowSchema(std::vector<ActionSpec> actions,
                               std::vector<std::pair<std::string, std::string>> dependencies,
                               std::set<std::string> inference_area)
    : actions_(std::move(actions)), dependencies_(std::move(dependencies)), inference_area_(std::move(inference_area))
{
    std::set<std::string> seen;
    for (const auto& a : actions_)
        if (!seen.insert(a.id).second)
            throw std::invalid_argument("duplicate action id '" + a.id + "'");
    for (const auto& [from, to] : dependencies_) {
        if (!seen.count(from) || !seen.count(to))
            throw std::invalid_argument("dependency references unknown action '" + (seen.count(from) ? to : from) + "'");
    }

    // Kahn's algorithm; leftover vertices sit on a cycle.
    const std::size_t n = actions_.size();
    std::vector<int> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        indegree[i] = static_cast<int>(predecessors(i).size());
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0)
            ready.push_back(i);
    std::size_t visited = 0;
    while (!ready.empty()) {
        const std::size_t v = ready.back();
        ready.pop_back();
        ++visited;
        for (std::size_t s : successors(v))
            if (--indegree[s] == 0)
                ready.push_back(s);
    }
    if (visited != n)
        throw std::invalid_argument("workflow dependencies contain a cycle");
}

std::optional<std::size_t> WorkflowSchema::index_of(std::string_view action_id) const
{
    for (std::size_t i = 0; i < actions_.size(); ++i)
        if (actions_[i].id == action_id)
            return i;
    return std::nullopt;
}

std::vector<std::size_t> WorkflowSchema::predecessors(std::size_t action) const
{
    std::vector<std::size_t> out;
    for (const auto& [from, to] : dependencies_)
        if (to == actions_.at(action).id)
            out.push_back(*index_of(from));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> WorkflowSchema::successors(std::size_t action) const
{
    std::vector<std::size_t> out;
    for (const auto& [from, to] : dependencies_)
        if (from == actions_.at(action).id)
            out.push_back(*index_of(to));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const ControllerAgent* AdaptationSession::find(ControllerId c) const
{
    for (const auto& ctl : controllers)
        if (ctl.id == c)
            return &ctl;
    return nullptr;
}

//
// WorldState lookups
//

MonitorAgent* WorldState::find(MonitorId m)
{
    auto it = std::lower_bound(monitors.begin(), monitors.end(), m,
                               [](const MonitorAgent& a, MonitorId id) { return a.id < id; });
    return it != monitors.end() && it->id == m ? &*it : nullptr;
}

const MonitorAgent* WorldState::find(MonitorId m) const { return const_cast<WorldState*>(this)->find(m); }

LeaderAgent* WorldState::find(LeaderId l)
{
    auto it = std::lower_bound(leaders.begin(), leaders.end(), l,
                               [](const LeaderAgent& a, LeaderId id) { return a.id < id; });
    return it != leaders.end() && it->id == l ? &*it : nullptr;
}

const LeaderAgent* WorldState::find(LeaderId l) const { return const_cast<WorldState*>(this)->find(l); }

const NodeProfile* WorldState::find(NodeId n) const
{
    for (const auto& p : nodes)
        if (p.id == n)
            return &p;
    return nullptr;
}

ControllerAgent* WorldState::find(ControllerId c)
{
    for (auto& s : sessions)
        for (auto& ctl : s.controllers)
            if (ctl.id == c)
                return &ctl;
    return nullptr;
}

const ControllerAgent* WorldState::find(ControllerId c) const { return const_cast<WorldState*>(this)->find(c); }

AdaptationSession* WorldState::session_of(ControllerId c)
{
    for (auto& s : sessions)
        for (auto& ctl : s.controllers)
            if (ctl.id == c)
                return &s;
    return nullptr;
}

const AdaptationSession* WorldState::session_of(ControllerId c) const
{
    return const_cast<WorldState*>(this)->session_of(c);
}

AdaptationSession* WorldState::find(SessionId s)
{
    for (auto& session : sessions)
        if (session.id == s)
            return &session;
    return nullptr;
}

const AdaptationSession* WorldState::find(SessionId s) const { return const_cast<WorldState*>(this)->find(s); }

const MonitorEnvironment& WorldState::env(MonitorId m) const
{
    static const MonitorEnvironment kDefault{};
    auto it = environment.find(m);
    return it == environment.end() ? kDefault : it->second;
}

std::vector<MonitorId> WorldState::monitors_of(NodeId node) const
{
    auto it = assigned_monitors.find(node);
    return it == assigned_monitors.end() ? std::vector<MonitorId>{} : it->second;
}

WorldState make_world(int nodes, int pool_size, double confidence)
{
    WorldState w;
    for (int i = 1; i <= nodes; ++i)
        w.nodes.push_back(NodeProfile{NodeId{static_cast<std::uint32_t>(i)}, {}});
    for (int i = 1; i <= pool_size; ++i) {
        MonitorAgent m;
        m.id = MonitorId{static_cast<std::uint32_t>(i)};
        m.confidence_degree = confidence;
        w.monitors.push_back(m);
    }
    return w;
}

//
// Invariants
//

std::vector<Violation> validate_world(const WorldState& world)
{
    std::vector<Violation> out;
    auto add = [&](std::string subject, std::string message) {
        out.push_back(Violation{std::move(subject), std::move(message)});
    };

    for (std::size_t i = 1; i < world.monitors.size(); ++i)
        if (!(world.monitors[i - 1].id < world.monitors[i].id))
            add(world.monitors[i].id.name(), "monitor ids not unique and sorted");
    for (std::size_t i = 1; i < world.leaders.size(); ++i)
        if (!(world.leaders[i - 1].id < world.leaders[i].id))
            add(world.leaders[i].id.name(), "leader ids not unique and sorted");

    for (const auto& m : world.monitors) {
        const std::string name = m.id.name();
        if (!(m.confidence_degree >= 0 && m.confidence_degree <= 1))
            add(name, "confidence_degree outside [0,1]");
        if (m.trigger_gossip && (!m.diagnosis || *m.diagnosis == Diagnosis::NORMAL))
            add(name, "trigger_gossip set without a non-NORMAL diagnosis");
        if (m.current_measurements && !m.current_measurements->valid())
            add(name, "measurements out of range");
        if (m.assigned_node) {
            auto list = world.monitors_of(*m.assigned_node);
            if (std::find(list.begin(), list.end(), m.id) == list.end())
                add(name, "assigned node does not list the monitor");
        }
    }

    for (const auto& [node, list] : world.assigned_monitors) {
        if (!world.find(node))
            add(node.name(), "unknown node has assigned monitors");
        std::set<MonitorId> unique(list.begin(), list.end());
        if (unique.size() != list.size())
            add(node.name(), "duplicate monitor assignment");
        for (MonitorId m : list) {
            const MonitorAgent* agent = world.find(m);
            if (!agent)
                add(node.name(), "assigned monitor " + m.name() + " does not exist");
            else if (agent->assigned_node != node)
                add(m.name(), "monitor listed on " + node.name() + " but assigned elsewhere");
        }
    }

    std::set<NodeId> led;
    for (const auto& [node, leader] : world.has_leader) {
        if (!led.insert(node).second)
            add(node.name(), "more than one leader");
        const LeaderAgent* agent = world.find(leader);
        if (!agent)
            add(leader.name(), "leader of " + node.name() + " does not exist");
        else if (agent->node != node)
            add(leader.name(), "leader node mismatch");
    }

    for (const auto& l : world.leaders) {
        const std::string name = l.id.name();
        if (l.failed_diagnoses < 0 || l.critical_diagnoses < 0 || l.normal_diagnoses < 0)
            add(name, "negative diagnosis counter");
        if (l.state == LeaderState::IDLE_LEADER &&
            (l.failed_diagnoses != 0 || l.critical_diagnoses != 0 || l.normal_diagnoses != 0))
            add(name, "counters not reset in IDLE_LEADER");
        const auto total = l.failed_diagnoses + l.critical_diagnoses + l.normal_diagnoses;
        if (total > static_cast<std::int64_t>(world.monitors_of(l.node).size()) &&
            total > static_cast<std::int64_t>(l.ballots.size()))
            add(name, "more diagnoses than assigned monitors");
    }

    for (const auto& [m, env] : world.environment)
        if (env.measurements && !env.measurements->valid())
            add(m.name(), "environment measurements out of range");

    for (const auto& s : world.sessions) {
        const std::string name = s.id.name();
        if (s.controllers.size() != s.schema.actions().size())
            add(name, "controller count differs from schema size");
        for (const auto& c : s.controllers) {
            if (c.acknowledged_controllers < 0 ||
                c.acknowledged_controllers > static_cast<std::int64_t>(s.number_of_controllers()))
                add(c.id.name(), "acknowledged_controllers out of range");
            if (c.pending_notification && c.pending_notification->sender &&
                !s.find(*c.pending_notification->sender))
                add(c.id.name(), "notification sender outside the session");
        }
    }
    return out;
}

} // namespace celds
