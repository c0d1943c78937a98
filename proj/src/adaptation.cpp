#include "celds/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "celds/errors.hpp"
#include "json.hpp"

namespace celds {

using nlohmann::ordered_json;

namespace {

bool same_shape(const ProblemDescriptor& a, const ProblemDescriptor& b)
{
    if (a.features.size() != b.features.size())
        return false;
    for (const auto& [name, fa] : a.features) {
        auto it = b.features.find(name);
        if (it == b.features.end() || fa.index() != it->second.index())
            return false;
        if (const auto* na = std::get_if<NumericFeature>(&fa)) {
            const auto& nb = std::get<NumericFeature>(it->second);
            if (na->min != nb.min || na->max != nb.max)
                return false;
        }
    }
    return true;
}

double agreement(const FeatureValue& a, const FeatureValue& b)
{
    if (const auto* ca = std::get_if<CategoricalFeature>(&a))
        return ca->value == std::get<CategoricalFeature>(b).value ? 1.0 : 0.0;
    const auto& na = std::get<NumericFeature>(a);
    const auto& nb = std::get<NumericFeature>(b);
    const double range = na.max - na.min;
    if (range <= 0)
        return na.value == nb.value ? 1.0 : 0.0;
    return std::clamp(1.0 - std::abs(na.value - nb.value) / range, 0.0, 1.0);
}

std::int64_t last_success(const AdaptationCase& c)
{
    std::int64_t best = -1;
    for (const auto& o : c.outcome_history)
        if (o.succeeded)
            best = std::max(best, o.enacted_at);
    return best;
}

ordered_json problem_json(const ProblemDescriptor& p)
{
    ordered_json j = ordered_json::object();
    for (const auto& [name, f] : p.features) {
        if (const auto* n = std::get_if<NumericFeature>(&f))
            j[name] = {{"value", n->value}, {"min", n->min}, {"max", n->max}};
        else
            j[name] = std::get<CategoricalFeature>(f).value;
    }
    return j;
}

ordered_json schema_json(const WorkflowSchema& s)
{
    ordered_json actions = ordered_json::array();
    for (const auto& a : s.actions()) {
        ordered_json item = {{"id", a.id}, {"capability", a.capability}};
        if (!a.parameters.empty())
            item["parameters"] = a.parameters;
        actions.push_back(item);
    }
    ordered_json deps = ordered_json::array();
    for (const auto& [from, to] : s.dependencies())
        deps.push_back({from, to});
    ordered_json j = {{"actions", actions}, {"dependencies", deps}};
    if (!s.inference_area().empty())
        j["area"] = s.inference_area();
    return j;
}

Location at(std::string_view function, std::string argument)
{
    return Location{std::string(function), std::move(argument)};
}

Value sym(std::string_view s)
{
    return Symbol{std::string(s)};
}

bool idle(const ControllerAgent& c)
{
    return c.state == ControllerState::WAITING_NOTIFICATION || c.state == ControllerState::READY_FOR_REMOVAL;
}

// A successor no longer needs this controller's completion signal.
bool released(const ControllerAgent& c)
{
    return c.trigger_execute || c.action_completed || c.state == ControllerState::ACTION_RUNNING ||
           (c.state == ControllerState::WAITING_FOR_ACKNOWLEDGEMENT &&
            c.broadcasting == NotificationKind::ACTION_STARTING);
}

bool successors_released(const ControllerAgent& c, const AdaptationSession& s)
{
    for (std::size_t j : s.schema.successors(c.schema_index))
        if (!released(s.controllers.at(j)))
            return false;
    return true;
}

ControllerState rest_state(const ControllerAgent& c, const AdaptationSession& s, bool completed)
{
    return completed && successors_released(c, s) ? ControllerState::READY_FOR_REMOVAL
                                                   : ControllerState::WAITING_NOTIFICATION;
}

StoreRecord event(std::int64_t step, std::string kind, const AdaptationSession& s, std::string subject,
                  std::string detail = {})
{
    StoreRecord r;
    r.store = StoreKind::EVENT;
    r.step = step;
    r.kind = std::move(kind);
    r.node = s.node.name();
    r.subject = std::move(subject);
    r.detail = std::move(detail);
    return r;
}

void abort_session(ControllerStep& out, const AdaptationSession& s, const std::string& agent)
{
    out.updates.add(at("session_status", s.id.name()), sym("ABORTED"), agent);
}

} // namespace

double similarity(const ProblemDescriptor& a, const ProblemDescriptor& b, const std::map<std::string, double>& weights)
{
    if (!same_shape(a, b))
        throw ContractViolation("similarity: descriptors declare different features or ranges");
    if (a.features.empty())
        return 1.0;
    double total = 0, sum = 0;
    for (const auto& [name, fa] : a.features) {
        double w = 1.0;
        if (!weights.empty()) {
            auto it = weights.find(name);
            w = it == weights.end() ? 0.0 : it->second;
        }
        if (w < 0)
            throw ContractViolation("similarity: negative weight for '" + name + "'");
        total += w;
        sum += w * agreement(fa, b.features.at(name));
    }
    if (total <= 0)
        throw ContractViolation("similarity: weights sum to zero");
    return std::clamp(sum / total, 0.0, 1.0);
}

CaseRepository::CaseRepository(std::vector<AdaptationCase> cases)
{
    for (auto& c : cases)
        add(std::move(c));
}

void CaseRepository::add(AdaptationCase c)
{
    if (find(c.id))
        throw ContractViolation("case " + std::to_string(c.id) + " already exists");
    if (auto v = c.problem.violations(); !v.empty())
        throw ContractViolation("case " + std::to_string(c.id) + ": " + v.front());
    cases_.push_back(std::move(c));
}

const AdaptationCase* CaseRepository::find(std::int64_t id) const
{
    for (const auto& c : cases_)
        if (c.id == id)
            return &c;
    return nullptr;
}

std::int64_t CaseRepository::retain(const ProblemDescriptor& problem, const WorkflowSchema& schema, bool succeeded,
                                    std::int64_t step)
{
    for (auto& c : cases_) {
        if (c.problem == problem && c.solution == schema) {
            c.outcome_history.push_back(CaseOutcome{step, succeeded});
            return c.id;
        }
    }
    std::int64_t id = 1;
    for (const auto& c : cases_)
        id = std::max(id, c.id + 1);
    cases_.push_back(AdaptationCase{id, problem, schema, {CaseOutcome{step, succeeded}}});
    return id;
}

CaseRepository CaseRepository::read(std::istream& in)
{
    CaseRepository repo;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const auto j = ordered_json::parse(line);
            AdaptationCase c;
            c.id = j.at("id").get<std::int64_t>();
            for (const auto& [name, f] : j.at("problem").items()) {
                if (f.is_string())
                    c.problem.features[name] = CategoricalFeature{f.get<std::string>()};
                else
                    c.problem.features[name] =
                        NumericFeature{f.at("value").get<double>(), f.at("min").get<double>(), f.at("max").get<double>()};
            }
            const auto& sol = j.at("solution");
            std::vector<ActionSpec> actions;
            for (const auto& a : sol.at("actions")) {
                ActionSpec spec{a.at("id").get<std::string>(), a.value("capability", std::string{}), {}};
                if (a.contains("parameters"))
                    spec.parameters = a.at("parameters").get<std::map<std::string, std::string>>();
                actions.push_back(std::move(spec));
            }
            std::vector<std::pair<std::string, std::string>> deps;
            for (const auto& d : sol.value("dependencies", ordered_json::array()))
                deps.emplace_back(d.at(0).get<std::string>(), d.at(1).get<std::string>());
            std::set<std::string> area;
            if (sol.contains("area"))
                area = sol.at("area").get<std::set<std::string>>();
            c.solution = WorkflowSchema(std::move(actions), std::move(deps), std::move(area));
            for (const auto& h : j.value("history", ordered_json::array()))
                c.outcome_history.push_back(CaseOutcome{h.at("step").get<std::int64_t>(), h.at("succeeded").get<bool>()});
            repo.add(std::move(c));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return repo;
}

void CaseRepository::write(std::ostream& out) const
{
    for (const auto& c : cases_) {
        ordered_json history = ordered_json::array();
        for (const auto& o : c.outcome_history)
            history.push_back({{"step", o.enacted_at}, {"succeeded", o.succeeded}});
        ordered_json j = {{"id", c.id},
                          {"problem", problem_json(c.problem)},
                          {"solution", schema_json(c.solution)},
                          {"history", history}};
        out << j.dump() << '\n';
    }
}

std::optional<CaseMatch> retrieve_case(const ProblemDescriptor& problem, const CaseRepository& repo,
                                       const Config& cfg)
{
    const AdaptationCase* best = nullptr;
    double best_sim = -1;
    for (const auto& c : repo.cases()) {
        if (!same_shape(problem, c.problem))
            continue;
        const double s = similarity(problem, c.problem);
        if (s < cfg.similarity_threshold)
            continue;
        bool better = !best || s > best_sim;
        if (best && s == best_sim) {
            const auto mine = last_success(c), theirs = last_success(*best);
            better = mine > theirs || (mine == theirs && c.id < best->id);
        }
        if (better) {
            best = &c;
            best_sim = s;
        }
    }
    if (!best)
        return std::nullopt;
    return CaseMatch{*best, best_sim};
}

std::int64_t retain_case(const ProblemDescriptor& problem, const WorkflowSchema& schema, bool succeeded,
                         CaseRepository& repo, std::int64_t step)
{
    return repo.retain(problem, schema, succeeded, step);
}

bool evaluate_adaptation(NodeId, std::optional<Diagnosis> post_assessment)
{
    return post_assessment == Diagnosis::NORMAL;
}

bool scripted_outcome(const ActionSpec& action)
{
    auto it = action.parameters.find("outcome");
    return it == action.parameters.end() || it->second != "failure";
}

AdaptationSession instantiate_solution(const WorkflowSchema& schema, SessionId id, NodeId node, ControllerId first,
                                       std::int64_t case_id, std::int64_t step)
{
    if (schema.empty())
        throw InstantiationError("cannot instantiate an empty workflow schema");
    AdaptationSession s;
    s.id = id;
    s.node = node;
    s.case_id = case_id;
    s.schema = schema;
    s.started_at = step;
    for (std::size_t i = 0; i < schema.actions().size(); ++i) {
        ControllerAgent c;
        c.id = ControllerId{first.index + static_cast<std::uint32_t>(i)};
        c.action = action_of(c.id);
        c.schema_index = i;
        if (schema.predecessors(i).empty()) {
            c.state = ControllerState::NOTIFICATION_RECEIVED;
            c.pending_notification = Notification{NotificationKind::ACTION_STARTING, std::nullopt};
        }
        s.controllers.push_back(c);
    }
    return s;
}

bool areas_overlap(const WorldState& world, const WorkflowSchema& schema)
{
    for (const auto& s : world.sessions) {
        if (s.status != SessionStatus::RUNNING)
            continue;
        for (const auto& a : schema.inference_area())
            if (s.schema.inference_area().count(a))
                return true;
    }
    return false;
}

UpdateSet acknowledge_notification(const ControllerAgent& c, std::optional<ControllerId> broadcaster,
                                   const AdaptationSession& session)
{
    UpdateSet u;
    if (broadcaster && !session.find(*broadcaster))
        throw ContractViolation("acknowledge_notification: " + broadcaster->name() + " is not in " + session.id.name());
    if (c.state != ControllerState::NOTIFICATION_RECEIVED || broadcaster == c.id)
        return u;
    const std::string agent = c.id.name();
    u.add(at("controller_state", agent), sym("ASSESS_NOTIFICATION"), agent);
    if (broadcaster)
        u.add_additive(at("acknowledged_controllers", broadcaster->name()), 1, agent);
    return u;
}

UpdateSet broadcast_notification(const ControllerAgent& c, NotificationKind kind, const AdaptationSession& session)
{
    if (!session.find(c.id))
        throw ContractViolation("broadcast_notification: " + c.id.name() + " is not in " + session.id.name());
    UpdateSet u;
    const std::string agent = c.id.name();
    for (const auto& other : session.controllers) {
        if (other.id == c.id)
            continue;
        u.add(at("controller_state", other.id.name()), sym("NOTIFICATION_RECEIVED"), agent);
        u.add(at("pending_notification", other.id.name()), IdList{std::string(to_string(kind)), agent}, agent);
    }
    u.add(at("acknowledged_controllers", agent), std::int64_t{1}, agent);
    u.add(at("broadcasting", agent), sym(to_string(kind)), agent);
    u.add(at("ack_wait", agent), std::int64_t{0}, agent);
    u.add(at("controller_state", agent), sym("WAITING_FOR_ACKNOWLEDGEMENT"), agent);
    return u;
}

ControllerStep trigger_action(const ControllerAgent& c, const AdaptationSession& s, const WorldState& world,
                              const Config& cfg, std::int64_t step)
{
    ControllerStep out;
    const std::string agent = c.id.name();
    auto& u = out.updates;

    if (c.state == ControllerState::WAITING_FOR_ACKNOWLEDGEMENT) {
        const auto n = static_cast<std::int64_t>(s.number_of_controllers());
        if (c.acknowledged_controllers == n) {
            if (c.broadcasting == NotificationKind::ACTION_STARTING) {
                u.add(at("controller_state", agent), sym("ACTION_RUNNING"), agent);
                u.add(at("trigger_execute", c.action.name()), false, agent);
            } else if (c.broadcasting == NotificationKind::ACTION_COMPLETED) {
                u.add(at("acknowledged_controllers", agent), std::int64_t{0}, agent);
                u.add(at("controller_state", agent), sym(to_string(rest_state(c, s, c.action_completed))), agent);
            } else {
                return out;
            }
            u.add(at("broadcasting", agent), Undef{}, agent);
            u.add(at("ack_wait", agent), std::int64_t{0}, agent);
        } else if (c.ack_wait + 1 >= cfg.ack_wait_steps) {
            u.add(at("controller_state", agent), sym("CONTROLLER_ACKNOW_FAILED"), agent);
            abort_session(out, s, agent);
            out.records.push_back(event(step, "acknowledgement_failed", s, agent,
                                        std::to_string(c.acknowledged_controllers) + "/" + std::to_string(n)));
        } else {
            u.add(at("ack_wait", agent), std::int64_t{c.ack_wait + 1}, agent);
        }
        return out;
    }

    if (c.state == ControllerState::ACTION_RUNNING) {
        auto it = world.action_outcome.find(c.action);
        if (it == world.action_outcome.end())
            throw ContractViolation("trigger_action: no outcome defined for " + c.action.name());
        if (it->second) {
            u.add(at("action_completed", c.action.name()), true, agent);
            u.append(broadcast_notification(c, NotificationKind::ACTION_COMPLETED, s));
            out.records.push_back(event(step, "action_completed", s, agent, s.schema.actions()[c.schema_index].id));
        } else {
            u.append(broadcast_notification(c, NotificationKind::ACTION_FAILED, s));
            abort_session(out, s, agent);
            out.records.push_back(event(step, "session_aborted", s, agent,
                                        "action " + s.schema.actions()[c.schema_index].id + " failed"));
        }
    }
    return out;
}

ControllerStep step_controller(const ControllerAgent& c, const AdaptationSession& s, const WorldState& world,
                               const Config& cfg, std::int64_t step)
{
    ControllerStep out;
    const std::string agent = c.id.name();
    auto& u = out.updates;

    if (s.status == SessionStatus::ABORTED) {
        if (c.state == ControllerState::TERMINATED)
            return out;
        if (c.state == ControllerState::NOTIFICATION_RECEIVED && !c.unresponsive && c.pending_notification &&
            c.pending_notification->sender)
            u.add_additive(at("acknowledged_controllers", c.pending_notification->sender->name()), 1, agent);
        u.add(at("controller_state", agent), sym("TERMINATED"), agent);
        return out;
    }
    if (s.status == SessionStatus::COMPLETED)
        return out;

    switch (c.state) {
    case ControllerState::NOTIFICATION_RECEIVED:
        if (!c.unresponsive)
            u = acknowledge_notification(c, c.pending_notification ? c.pending_notification->sender : std::nullopt, s);
        break;

    case ControllerState::ASSESS_NOTIFICATION: {
        bool relevant = false;
        if (const auto& n = c.pending_notification) {
            const auto preds = s.schema.predecessors(c.schema_index);
            if (!n->sender) {
                relevant = n->kind == NotificationKind::ACTION_STARTING && preds.empty();
            } else if (n->kind == NotificationKind::ACTION_COMPLETED && !c.action_completed && !c.trigger_execute) {
                const ControllerAgent* sender = s.find(*n->sender);
                const bool from_pred =
                    sender && std::find(preds.begin(), preds.end(), sender->schema_index) != preds.end();
                const bool all_done = std::all_of(preds.begin(), preds.end(),
                                                  [&](std::size_t p) { return s.controllers.at(p).action_completed; });
                relevant = from_pred && all_done;
            }
        }
        if (relevant)
            u.add(at("trigger_execute", c.action.name()), true, agent);
        u.add(at("pending_notification", agent), Undef{}, agent);
        u.add(at("controller_state", agent), sym(to_string(rest_state(c, s, c.action_completed))), agent);
        break;
    }

    case ControllerState::WAITING_NOTIFICATION:
    case ControllerState::READY_FOR_REMOVAL: {
        if (!c.trigger_execute)
            break;
        // One action at a time per session: the lowest triggered id goes first, once everyone is idle.
        for (const auto& other : s.controllers) {
            if (other.id == c.id)
                continue;
            if (!idle(other) || other.pending_notification)
                return out;
            if (other.trigger_execute && other.id < c.id)
                return out;
        }
        u = broadcast_notification(c, NotificationKind::ACTION_STARTING, s);
        break;
    }

    case ControllerState::WAITING_FOR_ACKNOWLEDGEMENT:
    case ControllerState::ACTION_RUNNING:
        return trigger_action(c, s, world, cfg, step);

    case ControllerState::CONTROLLER_ACKNOW_FAILED:
    case ControllerState::TERMINATED:
        break;
    }
    return out;
}

ControllerStep step_session(const AdaptationSession& s, std::int64_t step)
{
    ControllerStep out;
    if (s.status != SessionStatus::RUNNING)
        return out;
    const bool done = std::all_of(s.controllers.begin(), s.controllers.end(), [](const ControllerAgent& c) {
        return c.state == ControllerState::READY_FOR_REMOVAL;
    });
    if (done) {
        out.updates.add(at("session_status", s.id.name()), sym("COMPLETED"), s.id.name());
        out.records.push_back(event(step, "session_completed", s, s.id.name()));
    }
    return out;
}

} // namespace celds
