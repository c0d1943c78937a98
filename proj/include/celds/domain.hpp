#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace celds {

//
// Identifiers
//

/// Opaque agent identifier. Rendered as `<prefix>_<index>`, e.g. `monitor_3`.
/// Ordering follows the numeric index so `monitor_10` sorts after `monitor_2`.
template <typename Tag>
struct Id {
    std::uint32_t index = 0;

    friend auto operator<=>(const Id&, const Id&) = default;

    std::string name() const { return std::string(Tag::prefix) + "_" + std::to_string(index); }

    static std::optional<Id> parse(std::string_view text)
    {
        const std::string_view prefix = Tag::prefix;
        if (text.size() <= prefix.size() + 1 || text.substr(0, prefix.size()) != prefix ||
            text[prefix.size()] != '_')
            return std::nullopt;
        std::uint32_t value = 0;
        for (char ch : text.substr(prefix.size() + 1)) {
            if (ch < '0' || ch > '9')
                return std::nullopt;
            value = value * 10 + static_cast<std::uint32_t>(ch - '0');
        }
        return Id{value};
    }
};

struct NodeTag { static constexpr std::string_view prefix = "node"; };
struct MonitorTag { static constexpr std::string_view prefix = "monitor"; };
struct HeartbeatTag { static constexpr std::string_view prefix = "heartbeat"; };
struct LeaderTag { static constexpr std::string_view prefix = "leader"; };
struct ControllerTag { static constexpr std::string_view prefix = "controller"; };
struct ActionTag { static constexpr std::string_view prefix = "action"; };
struct SessionTag { static constexpr std::string_view prefix = "session"; };

using NodeId = Id<NodeTag>;
using MonitorId = Id<MonitorTag>;
using HeartbeatId = Id<HeartbeatTag>;
using LeaderId = Id<LeaderTag>;
using ControllerId = Id<ControllerTag>;
using ActionId = Id<ActionTag>;
using SessionId = Id<SessionTag>;

// Each monitor owns exactly one heartbeat channel; a leader is derived from its node.
inline HeartbeatId heartbeat_of(MonitorId m) { return HeartbeatId{m.index}; }
inline MonitorId monitor_of(HeartbeatId h) { return MonitorId{h.index}; }
inline LeaderId leader_for(NodeId n) { return LeaderId{n.index}; }
inline ActionId action_of(ControllerId c) { return ActionId{c.index}; }
inline ControllerId controller_of(ActionId a) { return ControllerId{a.index}; }

//
// Enumerations
//

/// Ordered by pessimism: NORMAL < CRITICAL < FAILED.
enum class Diagnosis : std::uint8_t { NORMAL = 0, CRITICAL = 1, FAILED = 2 };

enum class MonitorState : std::uint8_t {
    ACTIVE,
    WAIT_FOR_RESPONSE,
    COLLECT_DATA,
    RETRIEVE_DATA,
    ASSIGN_DIAGNOSIS,
    REPORT_PROBLEM,
    LOG_DATA,
};

enum class LeaderState : std::uint8_t { IDLE_LEADER, EVALUATE, ASSESS };

enum class ControllerState : std::uint8_t {
    WAITING_NOTIFICATION,
    NOTIFICATION_RECEIVED,
    ASSESS_NOTIFICATION,
    WAITING_FOR_ACKNOWLEDGEMENT,
    ACTION_RUNNING,
    CONTROLLER_ACKNOW_FAILED,
    READY_FOR_REMOVAL,
    TERMINATED,
};

enum class NotificationKind : std::uint8_t { ACTION_STARTING, ACTION_COMPLETED, ACTION_FAILED };

enum class SessionStatus : std::uint8_t { RUNNING, COMPLETED, ABORTED };

enum class MiddlewareState : std::uint8_t { EXECUTING, STOPPED };

enum class HeartbeatResult : std::uint8_t { OK, LATE, MISSING };

std::string_view to_string(Diagnosis d);
std::string_view to_string(MonitorState s);
std::string_view to_string(LeaderState s);
std::string_view to_string(ControllerState s);
std::string_view to_string(NotificationKind k);
std::string_view to_string(SessionStatus s);
std::string_view to_string(MiddlewareState s);
std::string_view to_string(HeartbeatResult r);

std::optional<Diagnosis> parse_diagnosis(std::string_view text);
std::optional<MonitorState> parse_monitor_state(std::string_view text);
std::optional<LeaderState> parse_leader_state(std::string_view text);
std::optional<ControllerState> parse_controller_state(std::string_view text);
std::optional<NotificationKind> parse_notification_kind(std::string_view text);
std::optional<SessionStatus> parse_session_status(std::string_view text);
std::optional<MiddlewareState> parse_middleware_state(std::string_view text);

// Strictly more pessimistic.
inline bool more_pessimistic(Diagnosis a, Diagnosis b)
{
    return static_cast<int>(a) > static_cast<int>(b);
}

//
// Measurements
//

struct NodeMetrics {
    std::int64_t latency = 0;   // time units
    double cpu_usage = 0;       // percent
    double storage_usage = 0;   // percent
    double memory_usage = 0;    // percent
    double bandwidth = 0;       // throughput units

    friend bool operator==(const NodeMetrics&, const NodeMetrics&) = default;
    friend auto operator<=>(const NodeMetrics&, const NodeMetrics&) = default;

    bool valid() const;
};

/// A heartbeat probe as observed by its monitor.
struct Heartbeat {
    NodeId target;
    std::int64_t sent_at = 0;
    bool response_arrived = false;
    std::optional<std::int64_t> latency; // meaningful only when response_arrived

    friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

//
// Configuration
//

struct Config {
    int redundancy_k = 3;
    std::int64_t max_latency = 20;
    double min_confidence_degree = 0.5;
    double confidence_reward = 0.05;
    double confidence_penalty = 0.10;
    double similarity_threshold = 0.7;
    double critical_cpu = 85;
    double critical_memory = 85;
    double critical_storage = 90;
    int exploration_bound = 12;
    bool weighted_diagnosis = false;
    int heartbeat_wait_steps = 3;
    int ack_wait_steps = 3;

    friend bool operator==(const Config&, const Config&) = default;

    /// Human-readable reasons the configuration is out of range; empty when valid.
    std::vector<std::string> violations() const;
};

//
// Agents
//

struct MonitorAgent {
    MonitorId id;
    std::optional<NodeId> assigned_node;
    MonitorState state = MonitorState::ACTIVE;
    std::optional<Diagnosis> diagnosis;
    bool trigger_gossip = false;
    double confidence_degree = 1.0;
    std::optional<NodeMetrics> current_measurements;
    std::optional<Heartbeat> pending_heartbeat;
    int heartbeat_wait = 0;                       // steps already spent without a response
    std::optional<std::int64_t> retrieved_history; // nullopt: repository unavailable or not queried
    bool dismissed = false;

    friend bool operator==(const MonitorAgent&, const MonitorAgent&) = default;
};

/// One defined diagnosis counted by a leader during a tally.
struct Ballot {
    MonitorId monitor;
    Diagnosis diagnosis;
    friend bool operator==(const Ballot&, const Ballot&) = default;
};

struct LeaderAgent {
    LeaderId id;
    NodeId node;
    LeaderState state = LeaderState::IDLE_LEADER;
    std::int64_t failed_diagnoses = 0;
    std::int64_t critical_diagnoses = 0;
    std::int64_t normal_diagnoses = 0;
    std::optional<Diagnosis> assessment;
    std::vector<Ballot> ballots; // recorded at tally, cleared on reset

    friend bool operator==(const LeaderAgent&, const LeaderAgent&) = default;
};

//
// Case-based adaptation
//

struct NumericFeature {
    double value = 0;
    double min = 0;
    double max = 1;
    friend bool operator==(const NumericFeature&, const NumericFeature&) = default;
};

struct CategoricalFeature {
    std::string value;
    friend bool operator==(const CategoricalFeature&, const CategoricalFeature&) = default;
};

using FeatureValue = std::variant<NumericFeature, CategoricalFeature>;

/// Feature names used by the problem descriptors of adaptation cases.
inline constexpr std::string_view kFeatureNames[] = {
    "response_time", "price", "portability", "region", "availability", "input_bandwidth", "output_bandwidth",
};

bool is_known_feature(std::string_view name);

struct ProblemDescriptor {
    std::map<std::string, FeatureValue> features;

    friend bool operator==(const ProblemDescriptor&, const ProblemDescriptor&) = default;
    std::vector<std::string> violations() const;
};

struct ActionSpec {
    std::string id; // schema-local
    std::string capability;
    std::map<std::string, std::string> parameters;
    friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

/// Actions plus "second starts after first completes" dependencies. Always acyclic.
class WorkflowSchema {
public:
    WorkflowSchema() = default;

    /// Throws std::invalid_argument on duplicate ids, unknown ids in dependencies, or cycles.
    WorkflowSchema(std::vector<ActionSpec> actions, std::vector<std::pair<std::string, std::string>> dependencies,
                   std::set<std::string> inference_area = {});

    const std::vector<ActionSpec>& actions() const { return actions_; }
    const std::vector<std::pair<std::string, std::string>>& dependencies() const { return dependencies_; }
    const std::set<std::string>& inference_area() const { return inference_area_; }
    bool empty() const { return actions_.empty(); }

    std::optional<std::size_t> index_of(std::string_view action_id) const;
    std::vector<std::size_t> predecessors(std::size_t action) const;
    std::vector<std::size_t> successors(std::size_t action) const;

    friend bool operator==(const WorkflowSchema&, const WorkflowSchema&) = default;

private:
    std::vector<ActionSpec> actions_;
    std::vector<std::pair<std::string, std::string>> dependencies_;
    std::set<std::string> inference_area_;
};

struct CaseOutcome {
    std::int64_t enacted_at = 0;
    bool succeeded = false;
    friend bool operator==(const CaseOutcome&, const CaseOutcome&) = default;
};

struct AdaptationCase {
    std::int64_t id = 0;
    ProblemDescriptor problem;
    WorkflowSchema solution;
    std::vector<CaseOutcome> outcome_history;
    friend bool operator==(const AdaptationCase&, const AdaptationCase&) = default;
};

struct Notification {
    NotificationKind kind = NotificationKind::ACTION_STARTING;
    std::optional<ControllerId> sender; // nullopt: session-start signal

    friend bool operator==(const Notification&, const Notification&) = default;
};

struct ControllerAgent {
    ControllerId id;
    ActionId action;
    std::size_t schema_index = 0; // position of the action in the session schema
    ControllerState state = ControllerState::WAITING_NOTIFICATION;
    std::int64_t acknowledged_controllers = 0;
    std::optional<Notification> pending_notification;
    std::optional<NotificationKind> broadcasting; // what the controller waits acknowledgements for
    int ack_wait = 0;
    bool trigger_execute = false;
    bool action_completed = false;
    bool unresponsive = false; // never acknowledges (fault model)

    friend bool operator==(const ControllerAgent&, const ControllerAgent&) = default;
};

struct AdaptationSession {
    SessionId id;
    NodeId node;
    std::int64_t case_id = 0; // 0: none
    WorkflowSchema schema;
    std::vector<ControllerAgent> controllers;
    SessionStatus status = SessionStatus::RUNNING;
    std::int64_t started_at = 0;

    std::size_t number_of_controllers() const { return controllers.size(); }
    const ControllerAgent* find(ControllerId c) const;

    friend bool operator==(const AdaptationSession&, const AdaptationSession&) = default;
};

//
// Nodes and the world
//

struct NodeProfile {
    NodeId id;
    ProblemDescriptor characteristics; // static features fed to case retrieval
    friend bool operator==(const NodeProfile&, const NodeProfile&) = default;
};

/// Values written by the environment (monitored locations), per monitor.
struct MonitorEnvironment {
    bool response_arrived = false;
    std::optional<std::int64_t> latency;
    std::optional<NodeMetrics> measurements;
    bool repository_available = true;
    friend bool operator==(const MonitorEnvironment&, const MonitorEnvironment&) = default;
};

/// Full valuation of every location. `step` is bookkeeping only and is not part of the digest.
struct WorldState {
    std::int64_t step = 0;
    MiddlewareState middleware_state = MiddlewareState::EXECUTING;
    std::vector<NodeProfile> nodes;
    std::map<NodeId, std::vector<MonitorId>> assigned_monitors;
    std::map<NodeId, LeaderId> has_leader;
    std::vector<MonitorAgent> monitors; // sorted by id
    std::vector<LeaderAgent> leaders;   // sorted by id
    std::map<MonitorId, MonitorEnvironment> environment;
    std::map<ActionId, bool> action_outcome; // monitored: true = success
    std::vector<AdaptationSession> sessions;
    std::uint32_t next_controller = 1;
    std::uint32_t next_session = 1;

    friend bool operator==(const WorldState&, const WorldState&) = default;

    MonitorAgent* find(MonitorId m);
    const MonitorAgent* find(MonitorId m) const;
    LeaderAgent* find(LeaderId l);
    const LeaderAgent* find(LeaderId l) const;
    const NodeProfile* find(NodeId n) const;
    ControllerAgent* find(ControllerId c);
    const ControllerAgent* find(ControllerId c) const;
    AdaptationSession* session_of(ControllerId c);
    const AdaptationSession* session_of(ControllerId c) const;
    AdaptationSession* find(SessionId s);
    const AdaptationSession* find(SessionId s) const;

    const MonitorEnvironment& env(MonitorId m) const;

    /// Monitors assigned to `node`, in assignment order.
    std::vector<MonitorId> monitors_of(NodeId node) const;
};

/// A world with `nodes` nodes and a pool of `pool_size` unassigned monitors, all at `confidence`.
WorldState make_world(int nodes, int pool_size, double confidence = 1.0);

struct Violation {
    std::string subject; // agent or location name
    std::string message;
    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every type invariant of the domain model. Violations are returned, never thrown.
std::vector<Violation> validate_world(const WorldState& world);

} // namespace celds
