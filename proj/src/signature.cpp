#include "celds/signature.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "celds/errors.hpp"
#include "celds/monitor_engine.hpp"
#include "json.hpp"

namespace celds {

namespace {

[[noreturn]] void bad_location(const Location& loc, const std::string& why)
{
    throw ContractViolation("location " + loc.name() + ": " + why);
}

template <typename IdT>
IdT parse_id(const Location& loc)
{
    auto id = IdT::parse(loc.argument);
    if (!id)
        bad_location(loc, "bad argument");
    return *id;
}

MonitorId monitor_arg(const Location& loc)
{
    if (auto m = MonitorId::parse(loc.argument))
        return *m;
    if (auto h = HeartbeatId::parse(loc.argument))
        return monitor_of(*h);
    bad_location(loc, "expected a monitor or heartbeat");
}

template <typename W>
auto& monitor_ref(W& world, const Location& loc)
{
    auto* m = world.find(monitor_arg(loc));
    if (!m)
        bad_location(loc, "no such monitor");
    return *m;
}

template <typename W>
auto& leader_ref(W& world, const Location& loc)
{
    auto* l = world.find(parse_id<LeaderId>(loc));
    if (!l)
        bad_location(loc, "no such leader");
    return *l;
}

template <typename W>
auto& controller_ref(W& world, const Location& loc)
{
    ControllerId c;
    if (auto a = ActionId::parse(loc.argument))
        c = controller_of(*a);
    else
        c = parse_id<ControllerId>(loc);
    auto* ctl = world.find(c);
    if (!ctl)
        bad_location(loc, "no such controller");
    return *ctl;
}

template <typename W>
auto& session_ref(W& world, const Location& loc)
{
    auto* s = world.find(parse_id<SessionId>(loc));
    if (!s)
        bad_location(loc, "no such session");
    return *s;
}

NodeId node_arg(const WorldState& world, const Location& loc)
{
    NodeId n = parse_id<NodeId>(loc);
    if (!world.find(n))
        bad_location(loc, "no such node");
    return n;
}

void self_arg(const Location& loc)
{
    if (loc.argument != "self" && !loc.argument.empty())
        bad_location(loc, "expected self");
}

// Value helpers

template <typename E>
Value sym(E e)
{
    return Symbol{std::string(to_string(e))};
}

template <typename E>
Value opt_sym(const std::optional<E>& e)
{
    return e ? sym(*e) : Value{Undef{}};
}

template <typename IdT>
Value opt_id(const std::optional<IdT>& id)
{
    return id ? Value{Symbol{id->name()}} : Value{Undef{}};
}

bool as_bool(const Location& loc, const Value& v)
{
    if (const auto* b = std::get_if<bool>(&v))
        return *b;
    bad_location(loc, "expected a boolean, got " + to_string(v));
}

std::int64_t as_int(const Location& loc, const Value& v)
{
    if (const auto* i = std::get_if<std::int64_t>(&v))
        return *i;
    bad_location(loc, "expected an integer, got " + to_string(v));
}

std::optional<std::int64_t> as_opt_int(const Location& loc, const Value& v)
{
    if (std::holds_alternative<Undef>(v))
        return std::nullopt;
    return as_int(loc, v);
}

double as_real(const Location& loc, const Value& v)
{
    if (auto n = as_number(v))
        return *n;
    bad_location(loc, "expected a number, got " + to_string(v));
}

const std::string& as_symbol(const Location& loc, const Value& v)
{
    if (const auto* s = std::get_if<Symbol>(&v))
        return s->name;
    bad_location(loc, "expected a symbol, got " + to_string(v));
}

template <typename E>
E as_enum(const Location& loc, const Value& v, std::optional<E> (*parse)(std::string_view))
{
    auto e = parse(as_symbol(loc, v));
    if (!e)
        bad_location(loc, "unknown constant " + to_string(v));
    return *e;
}

template <typename E>
std::optional<E> as_opt_enum(const Location& loc, const Value& v, std::optional<E> (*parse)(std::string_view))
{
    if (std::holds_alternative<Undef>(v))
        return std::nullopt;
    return as_enum(loc, v, parse);
}

std::optional<NodeMetrics> as_opt_metrics(const Location& loc, const Value& v)
{
    if (std::holds_alternative<Undef>(v))
        return std::nullopt;
    if (const auto* m = std::get_if<NodeMetrics>(&v)) {
        if (!m->valid())
            bad_location(loc, "measurements out of range");
        return *m;
    }
    bad_location(loc, "expected a measurement list, got " + to_string(v));
}

Value notification_value(const std::optional<Notification>& n)
{
    if (!n)
        return Undef{};
    return IdList{std::string(to_string(n->kind)), n->sender ? n->sender->name() : std::string("session")};
}

std::optional<Notification> as_notification(const Location& loc, const Value& v)
{
    if (std::holds_alternative<Undef>(v))
        return std::nullopt;
    const auto* l = std::get_if<IdList>(&v);
    if (!l || l->size() != 2)
        bad_location(loc, "expected [KIND, sender]");
    auto kind = parse_notification_kind((*l)[0]);
    if (!kind)
        bad_location(loc, "unknown notification kind");
    Notification n{*kind, std::nullopt};
    if ((*l)[1] != "session") {
        auto sender = ControllerId::parse((*l)[1]);
        if (!sender)
            bad_location(loc, "bad notification sender");
        n.sender = *sender;
    }
    return n;
}

std::string schema_text(const WorkflowSchema& s)
{
    nlohmann::ordered_json j;
    j["actions"] = nlohmann::ordered_json::array();
    for (const auto& a : s.actions())
        j["actions"].push_back({{"id", a.id}, {"capability", a.capability}, {"parameters", a.parameters}});
    j["dependencies"] = s.dependencies();
    j["area"] = s.inference_area();
    return j.dump();
}

struct Entry {
    FunctionInfo info;
    std::function<Value(const WorldState&, const Location&, const Config&)> read;
    std::function<void(WorldState&, const Location&, const Value&)> write; // empty: read-only
};

const std::vector<Entry>& registry()
{
    using K = FunctionKind;
    using D = Domain;
    constexpr auto X = MergePolicy::Exclusive;

    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        auto add = [&](std::string_view name, D d, K k, auto read, auto write, MergePolicy p = MergePolicy::Exclusive) {
            e.push_back(Entry{FunctionInfo{name, d, k, p}, read, write});
        };
        auto read_only = nullptr;

        // Middleware
        add("middleware_state", D::Self, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { self_arg(l); return sym(w.middleware_state); },
            [](WorldState& w, const Location& l, const Value& v) {
                self_arg(l);
                w.middleware_state = as_enum(l, v, parse_middleware_state);
            });
        add("next_controller", D::Self, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                self_arg(l);
                return Value{static_cast<std::int64_t>(w.next_controller)};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                self_arg(l);
                w.next_controller = static_cast<std::uint32_t>(as_int(l, v));
            });
        add("next_session", D::Self, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                self_arg(l);
                return Value{static_cast<std::int64_t>(w.next_session)};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                self_arg(l);
                w.next_session = static_cast<std::uint32_t>(as_int(l, v));
            });

        // Nodes
        add("assigned_monitors", D::Node, K::Shared,
            [](const WorldState& w, const Location& l, const Config&) {
                IdList out;
                for (MonitorId m : w.monitors_of(node_arg(w, l)))
                    out.push_back(m.name());
                return Value{out};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                const NodeId node = node_arg(w, l);
                const auto* list = std::get_if<IdList>(&v);
                if (!list)
                    bad_location(l, "expected a monitor list");
                std::vector<MonitorId> ids;
                for (const auto& name : *list) {
                    auto id = MonitorId::parse(name);
                    const MonitorAgent* m = id ? w.find(*id) : nullptr;
                    if (!m)
                        bad_location(l, "unknown monitor " + name);
                    if (m->assigned_node && *m->assigned_node != node)
                        bad_location(l, name + " is assigned to " + m->assigned_node->name());
                    ids.push_back(*id);
                }
                for (MonitorId old : w.monitors_of(node))
                    if (std::find(ids.begin(), ids.end(), old) == ids.end())
                        w.find(old)->assigned_node.reset();
                for (MonitorId m : ids)
                    w.find(m)->assigned_node = node;
                if (ids.empty())
                    w.assigned_monitors.erase(node);
                else
                    w.assigned_monitors[node] = ids;
            });
        add("has_leader", D::Node, K::Shared,
            [](const WorldState& w, const Location& l, const Config&) {
                auto it = w.has_leader.find(node_arg(w, l));
                return it == w.has_leader.end() ? Value{Undef{}} : Value{Symbol{it->second.name()}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                const NodeId node = node_arg(w, l);
                if (std::holds_alternative<Undef>(v)) {
                    w.has_leader.erase(node);
                    return;
                }
                auto id = LeaderId::parse(as_symbol(l, v));
                if (!id)
                    bad_location(l, "expected a leader");
                if (const LeaderAgent* existing = w.find(*id); existing && existing->node != node)
                    bad_location(l, id->name() + " leads " + existing->node.name());
                if (!w.find(*id)) {
                    LeaderAgent leader;
                    leader.id = *id;
                    leader.node = node;
                    auto pos = std::lower_bound(w.leaders.begin(), w.leaders.end(), *id,
                                                [](const LeaderAgent& a, LeaderId x) { return a.id < x; });
                    w.leaders.insert(pos, leader);
                }
                w.has_leader[node] = *id;
            });

        // Monitors
        add("monitor_state", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return sym(monitor_ref(w, l).state); },
            [](WorldState& w, const Location& l, const Value& v) {
                monitor_ref(w, l).state = as_enum(l, v, parse_monitor_state);
            });
        add("assigned_node", D::Monitor, K::Derived,
            [](const WorldState& w, const Location& l, const Config&) {
                return opt_id(monitor_ref(w, l).assigned_node);
            },
            read_only);
        add("diagnosis", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return opt_sym(monitor_ref(w, l).diagnosis); },
            [](WorldState& w, const Location& l, const Value& v) {
                monitor_ref(w, l).diagnosis = as_opt_enum(l, v, parse_diagnosis);
            });
        add("trigger_gossip", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return Value{monitor_ref(w, l).trigger_gossip}; },
            [](WorldState& w, const Location& l, const Value& v) { monitor_ref(w, l).trigger_gossip = as_bool(l, v); });
        add("confidence_degree", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{monitor_ref(w, l).confidence_degree};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                monitor_ref(w, l).confidence_degree = as_real(l, v);
            });
        add("current_measurements", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                const auto& m = monitor_ref(w, l).current_measurements;
                return m ? Value{*m} : Value{Undef{}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                monitor_ref(w, l).current_measurements = as_opt_metrics(l, v);
            });
        add("heartbeat_sent_at", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                const auto& hb = monitor_ref(w, l).pending_heartbeat;
                return hb ? Value{hb->sent_at} : Value{Undef{}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                auto& m = monitor_ref(w, l);
                auto at = as_opt_int(l, v);
                if (!at)
                    m.pending_heartbeat.reset();
                else
                    m.pending_heartbeat = Heartbeat{m.assigned_node.value_or(NodeId{}), *at, false, std::nullopt};
            });
        add("heartbeat_wait", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{static_cast<std::int64_t>(monitor_ref(w, l).heartbeat_wait)};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                monitor_ref(w, l).heartbeat_wait = static_cast<int>(as_int(l, v));
            });
        add("retrieved_history", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                const auto& h = monitor_ref(w, l).retrieved_history;
                return h ? Value{*h} : Value{Undef{}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                monitor_ref(w, l).retrieved_history = as_opt_int(l, v);
            });
        add("dismissed", D::Monitor, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return Value{monitor_ref(w, l).dismissed}; },
            [](WorldState& w, const Location& l, const Value& v) { monitor_ref(w, l).dismissed = as_bool(l, v); });
        add("heartbeat_timeout", D::Monitor, K::Derived,
            [](const WorldState& w, const Location& l, const Config& cfg) {
                const auto& m = monitor_ref(w, l);
                return Value{heartbeat_timeout(m, w.env(m.id), cfg)};
            },
            read_only);
        add("is_problem_discovered", D::Monitor, K::Derived,
            [](const WorldState& w, const Location& l, const Config& cfg) {
                const auto& m = monitor_ref(w, l);
                return Value{is_problem_discovered(m, w.env(m.id), cfg)};
            },
            read_only);

        // Environment of the monitors
        add("heartbeat_response_arrived", D::Heartbeat, K::Monitored,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{w.env(monitor_ref(w, l).id).response_arrived};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                w.environment[monitor_ref(w, l).id].response_arrived = as_bool(l, v);
            });
        add("heartbeat_latency", D::Heartbeat, K::Monitored,
            [](const WorldState& w, const Location& l, const Config&) {
                const auto& lat = w.env(monitor_ref(w, l).id).latency;
                return lat ? Value{*lat} : Value{Undef{}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                auto lat = as_opt_int(l, v);
                if (lat && *lat < 0)
                    bad_location(l, "negative latency");
                w.environment[monitor_ref(w, l).id].latency = lat;
            });
        add("monitor_measurements", D::Monitor, K::Monitored,
            [](const WorldState& w, const Location& l, const Config&) {
                const auto& m = w.env(monitor_ref(w, l).id).measurements;
                return m ? Value{*m} : Value{Undef{}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                w.environment[monitor_ref(w, l).id].measurements = as_opt_metrics(l, v);
            });
        add("is_repository_available", D::Monitor, K::Monitored,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{w.env(monitor_ref(w, l).id).repository_available};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                w.environment[monitor_ref(w, l).id].repository_available = as_bool(l, v);
            });

        // Leaders
        add("leader_state", D::Leader, K::Shared,
            [](const WorldState& w, const Location& l, const Config&) { return sym(leader_ref(w, l).state); },
            [](WorldState& w, const Location& l, const Value& v) {
                leader_ref(w, l).state = as_enum(l, v, parse_leader_state);
            });
        add("failed_diagnoses", D::Leader, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return Value{leader_ref(w, l).failed_diagnoses}; },
            [](WorldState& w, const Location& l, const Value& v) { leader_ref(w, l).failed_diagnoses = as_int(l, v); });
        add("critical_diagnoses", D::Leader, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{leader_ref(w, l).critical_diagnoses};
            },
            [](WorldState& w, const Location& l, const Value& v) { leader_ref(w, l).critical_diagnoses = as_int(l, v); });
        add("normal_diagnoses", D::Leader, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return Value{leader_ref(w, l).normal_diagnoses}; },
            [](WorldState& w, const Location& l, const Value& v) { leader_ref(w, l).normal_diagnoses = as_int(l, v); });
        add("assessment", D::Leader, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return opt_sym(leader_ref(w, l).assessment); },
            [](WorldState& w, const Location& l, const Value& v) {
                leader_ref(w, l).assessment = as_opt_enum(l, v, parse_diagnosis);
            });
        add("ballots", D::Leader, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                IdList out;
                for (const auto& b : leader_ref(w, l).ballots)
                    out.push_back(b.monitor.name() + ":" + std::string(to_string(b.diagnosis)));
                return Value{out};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                const auto* list = std::get_if<IdList>(&v);
                if (!list)
                    bad_location(l, "expected a ballot list");
                std::vector<Ballot> ballots;
                for (const auto& item : *list) {
                    const auto colon = item.find(':');
                    auto m = MonitorId::parse(item.substr(0, colon));
                    auto d = colon == std::string::npos ? std::nullopt : parse_diagnosis(item.substr(colon + 1));
                    if (!m || !d)
                        bad_location(l, "bad ballot " + item);
                    ballots.push_back(Ballot{*m, *d});
                }
                leader_ref(w, l).ballots = std::move(ballots);
            });
        add("reporting_monitors", D::Leader, K::Derived,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{static_cast<std::int64_t>(leader_ref(w, l).ballots.size())};
            },
            read_only);

        // Action controllers
        add("controller_state", D::Controller, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return sym(controller_ref(w, l).state); },
            [](WorldState& w, const Location& l, const Value& v) {
                controller_ref(w, l).state = as_enum(l, v, parse_controller_state);
            });
        add("acknowledged_controllers", D::Controller, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{controller_ref(w, l).acknowledged_controllers};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                controller_ref(w, l).acknowledged_controllers = as_int(l, v);
            },
            MergePolicy::Additive);
        add("pending_notification", D::Controller, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return notification_value(controller_ref(w, l).pending_notification);
            },
            [](WorldState& w, const Location& l, const Value& v) {
                controller_ref(w, l).pending_notification = as_notification(l, v);
            });
        add("broadcasting", D::Controller, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return opt_sym(controller_ref(w, l).broadcasting);
            },
            [](WorldState& w, const Location& l, const Value& v) {
                controller_ref(w, l).broadcasting = as_opt_enum(l, v, parse_notification_kind);
            });
        add("ack_wait", D::Controller, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{static_cast<std::int64_t>(controller_ref(w, l).ack_wait)};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                controller_ref(w, l).ack_wait = static_cast<int>(as_int(l, v));
            });
        add("unresponsive", D::Controller, K::Shared,
            [](const WorldState& w, const Location& l, const Config&) { return Value{controller_ref(w, l).unresponsive}; },
            [](WorldState& w, const Location& l, const Value& v) { controller_ref(w, l).unresponsive = as_bool(l, v); });
        add("trigger_execute", D::Action, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{controller_ref(w, l).trigger_execute};
            },
            [](WorldState& w, const Location& l, const Value& v) { controller_ref(w, l).trigger_execute = as_bool(l, v); });
        add("action_completed", D::Action, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{controller_ref(w, l).action_completed};
            },
            [](WorldState& w, const Location& l, const Value& v) { controller_ref(w, l).action_completed = as_bool(l, v); });
        add("action_outcome", D::Action, K::Monitored,
            [](const WorldState& w, const Location& l, const Config&) {
                auto it = w.action_outcome.find(parse_id<ActionId>(l));
                if (it == w.action_outcome.end())
                    return Value{Undef{}};
                return Value{Symbol{it->second ? "SUCCESS" : "FAILURE"}};
            },
            [](WorldState& w, const Location& l, const Value& v) {
                const ActionId a = parse_id<ActionId>(l);
                if (std::holds_alternative<Undef>(v)) {
                    w.action_outcome.erase(a);
                    return;
                }
                const std::string& s = as_symbol(l, v);
                if (s != "SUCCESS" && s != "FAILURE")
                    bad_location(l, "expected SUCCESS or FAILURE");
                w.action_outcome[a] = s == "SUCCESS";
            });

        // Sessions
        add("session_status", D::Session, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return sym(session_ref(w, l).status); },
            [](WorldState& w, const Location& l, const Value& v) {
                session_ref(w, l).status = as_enum(l, v, parse_session_status);
            });
        add("session_node", D::Session, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{Symbol{session_ref(w, l).node.name()}};
            },
            read_only);
        add("session_case", D::Session, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return Value{session_ref(w, l).case_id}; },
            read_only);
        add("session_started_at", D::Session, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) { return Value{session_ref(w, l).started_at}; },
            read_only);
        add("session_schema", D::Session, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                return Value{Symbol{schema_text(session_ref(w, l).schema)}};
            },
            read_only);
        add("session_controllers", D::Session, K::Controlled,
            [](const WorldState& w, const Location& l, const Config&) {
                IdList out;
                for (const auto& c : session_ref(w, l).controllers)
                    out.push_back(c.id.name());
                return Value{out};
            },
            read_only);
        (void)X;
        return e;
    }();
    return entries;
}

const Entry* find_entry(std::string_view name)
{
    for (const auto& e : registry())
        if (e.info.name == name)
            return &e;
    return nullptr;
}

} // namespace

std::string_view to_string(FunctionKind k)
{
    switch (k) {
    case FunctionKind::Monitored: return "monitored";
    case FunctionKind::Controlled: return "controlled";
    case FunctionKind::Shared: return "shared";
    case FunctionKind::Derived: return "derived";
    }
    return "?";
}

const FunctionInfo* find_function(std::string_view name)
{
    const Entry* e = find_entry(name);
    return e ? &e->info : nullptr;
}

const std::vector<FunctionInfo>& all_functions()
{
    static const std::vector<FunctionInfo> infos = [] {
        std::vector<FunctionInfo> out;
        for (const auto& e : registry())
            out.push_back(e.info);
        return out;
    }();
    return infos;
}

std::optional<Domain> parse_domain(std::string_view name)
{
    if (name == "Node") return Domain::Node;
    if (name == "Monitor") return Domain::Monitor;
    if (name == "Heartbeat") return Domain::Heartbeat;
    if (name == "Leader") return Domain::Leader;
    if (name == "Controller" || name == "ActionController") return Domain::Controller;
    if (name == "Action") return Domain::Action;
    if (name == "Session") return Domain::Session;
    return std::nullopt;
}

std::vector<std::string> domain_members(const WorldState& world, Domain domain)
{
    std::vector<std::string> out;
    switch (domain) {
    case Domain::Self: out.push_back("self"); break;
    case Domain::Node:
        for (const auto& n : world.nodes)
            out.push_back(n.id.name());
        break;
    case Domain::Monitor:
        for (const auto& m : world.monitors)
            out.push_back(m.id.name());
        break;
    case Domain::Heartbeat:
        for (const auto& m : world.monitors)
            out.push_back(heartbeat_of(m.id).name());
        break;
    case Domain::Leader:
        for (const auto& l : world.leaders)
            out.push_back(l.id.name());
        break;
    case Domain::Controller:
        for (const auto& s : world.sessions)
            for (const auto& c : s.controllers)
                out.push_back(c.id.name());
        break;
    case Domain::Action:
        for (const auto& s : world.sessions)
            for (const auto& c : s.controllers)
                out.push_back(c.action.name());
        break;
    case Domain::Session:
        for (const auto& s : world.sessions)
            out.push_back(s.id.name());
        break;
    }
    return out;
}

Value read_location(const WorldState& world, const Location& loc, const Config& cfg)
{
    const Entry* e = find_entry(loc.function);
    if (!e)
        throw ContractViolation("unknown function '" + loc.function + "'");
    return e->read(world, loc, cfg);
}

bool location_available(const WorldState& world, const Location& loc)
{
    const Entry* e = find_entry(loc.function);
    if (!e)
        return false;
    const std::string& a = loc.argument;
    switch (e->info.domain) {
    case Domain::Self: return true;
    case Domain::Node: {
        auto n = NodeId::parse(a);
        return n && world.find(*n);
    }
    case Domain::Monitor:
    case Domain::Heartbeat: {
        auto m = MonitorId::parse(a);
        if (!m)
            if (auto h = HeartbeatId::parse(a))
                m = monitor_of(*h);
        return m && world.find(*m);
    }
    case Domain::Leader: {
        auto l = LeaderId::parse(a);
        return l && world.find(*l);
    }
    case Domain::Controller:
    case Domain::Action: {
        std::optional<ControllerId> c = ControllerId::parse(a);
        if (!c)
            if (auto act = ActionId::parse(a))
                c = controller_of(*act);
        return c && world.find(*c);
    }
    case Domain::Session: {
        auto s = SessionId::parse(a);
        return s && world.find(*s);
    }
    }
    return false;
}

void write_location(WorldState& world, const Location& loc, const Value& value)
{
    const Entry* e = find_entry(loc.function);
    if (!e)
        throw ContractViolation("unknown function '" + loc.function + "'");
    if (!e->write)
        throw ContractViolation("location " + loc.name() + " is read-only");
    e->write(world, loc, value);
}

void apply_updates(WorldState& world, const std::map<Location, MergedUpdate>& merged,
                   const std::vector<AdaptationSession>& created)
{
    for (const auto& s : created)
        world.sessions.push_back(s);
    std::sort(world.sessions.begin(), world.sessions.end(),
              [](const AdaptationSession& a, const AdaptationSession& b) { return a.id < b.id; });

    // Node lists first so monitor back-references are consistent before other writes.
    for (const auto& [loc, u] : merged)
        if (loc.function == "assigned_monitors" || loc.function == "has_leader")
            write_location(world, loc, u.value);
    static const Config kUnused{};
    for (const auto& [loc, u] : merged) {
        if (loc.function == "assigned_monitors" || loc.function == "has_leader")
            continue;
        if (u.policy == MergePolicy::Additive) {
            const auto current = std::get<std::int64_t>(read_location(world, loc, kUnused));
            write_location(world, loc, Value{current + std::get<std::int64_t>(u.value)});
        } else {
            write_location(world, loc, u.value);
        }
    }
}

std::vector<Location> enumerate_locations(const WorldState& world)
{
    std::vector<Location> out;
    for (const auto& e : registry()) {
        if (e.info.kind == FunctionKind::Derived)
            continue;
        for (auto& member : domain_members(world, e.info.domain))
            out.push_back(Location{std::string(e.info.name), std::move(member)});
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string encode_world(const WorldState& world)
{
    static const Config kUnused{};
    std::string out;
    out.reserve(4096);
    for (const auto& loc : enumerate_locations(world)) {
        out += loc.function;
        out += '(';
        out += loc.argument;
        out += ")=";
        out += to_string(read_location(world, loc, kUnused));
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string world_digest(const WorldState& world)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(encode_world(world))));
    return buf;
}

} // namespace celds
