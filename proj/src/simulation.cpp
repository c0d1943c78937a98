#include "celds/simulation.hpp"

#include <algorithm>
#include <ostream>

#include "celds/io.hpp"
#include "celds/signature.hpp"

namespace celds {

using nlohmann::ordered_json;

void Trace::write(std::ostream& out) const
{
    out << ordered_json{{"seed", seed}, {"config", config_to_json(cfg)}}.dump() << '\n';
    for (const auto& s : steps) {
        ordered_json updates = ordered_json::array();
        for (const auto& u : s.updates) {
            ordered_json item = {{"location", u.location.name()}};
            if (u.policy == MergePolicy::Additive)
                item["delta"] = to_string(u.value);
            else
                item["value"] = to_string(u.value);
            updates.push_back(std::move(item));
        }
        ordered_json j = {{"step", s.step}, {"digest", s.digest}, {"updates", updates}};
        if (!s.created.empty())
            j["created"] = s.created;
        out << j.dump() << '\n';
    }
}

namespace {

// NORMAL when every active monitor of the node last diagnosed NORMAL.
std::optional<Diagnosis> monitors_verdict(const WorldState& world, NodeId node)
{
    bool any = false;
    for (const auto& m : world.monitors) {
        if (m.dismissed || m.assigned_node != node)
            continue;
        if (!m.diagnosis)
            return std::nullopt;
        if (*m.diagnosis != Diagnosis::NORMAL)
            return m.diagnosis;
        any = true;
    }
    return any ? std::optional<Diagnosis>(Diagnosis::NORMAL) : std::nullopt;
}

} // namespace

Simulation::Simulation(WorldState initial, Config cfg, std::uint64_t seed, FaultSchedule faults)
    : world_(std::move(initial)), cfg_(cfg), environment_(seed, std::move(faults))
{
    trace_.seed = seed;
    trace_.cfg = cfg_;
    trace_.steps.push_back(TraceStep{world_.step, world_digest(world_), {}, {}});
}

StepResult Simulation::step()
{
    WorldState input = world_;
    environment_.apply(input);

    StepContext ctx;
    ctx.middleware = MiddlewareContext{cfg_, &repository_, &stores_, monitor_rule_};
    StepResult result = run_step(input, ctx);

    TraceStep ts;
    ts.step = result.world.step;
    ts.digest = world_digest(result.world);
    for (const auto& [loc, merged] : result.updates.merge())
        ts.updates.push_back(Update{loc, merged.value, merged.policy, {}});
    for (const auto& s : result.updates.created_sessions())
        ts.created.push_back(s.id.name());

    world_ = result.world;
    stores_.append(result.records);
    trace_.steps.push_back(std::move(ts));
    follow_sessions(input, result);
    return result;
}

void Simulation::run(std::int64_t steps)
{
    for (std::int64_t i = 0; i < steps; ++i)
        step();
}

void Simulation::follow_sessions(const WorldState& before, const StepResult& result)
{
    const std::int64_t step = before.step;
    auto retained = [&](const AdaptationSession& s, bool succeeded, std::string kind, std::string detail) {
        const NodeProfile* profile = world_.find(s.node);
        const std::int64_t id =
            repository_.retain(profile ? profile->characteristics : ProblemDescriptor{}, s.schema, succeeded, step);
        StoreRecord r;
        r.store = StoreKind::EVENT;
        r.step = step;
        r.kind = std::move(kind);
        r.node = s.node.name();
        r.subject = s.id.name();
        r.detail = detail + "; case " + std::to_string(id) + (succeeded ? " success" : " failure");
        stores_.append(r);
    };

    // Adaptations waiting for the monitors' verdict.
    for (auto it = pending_.begin(); it != pending_.end();) {
        const AdaptationSession* s = world_.find(it->session);
        std::optional<Diagnosis> verdict;
        bool seen = false;
        for (const auto& r : result.records) {
            if (r.store == StoreKind::EVENT && r.kind == "assessment" && r.node == it->node.name()) {
                verdict = r.diagnosis;
                seen = true;
                break;
            }
        }
        if (seen || world_.step >= it->deadline) {
            if (!seen)
                verdict = monitors_verdict(world_, it->node);
            const bool ok = evaluate_adaptation(it->node, verdict);
            if (s)
                retained(*s, ok, seen ? "adaptation_evaluated" : "adaptation_quiet",
                         seen ? "assessment " + std::string(to_string(*verdict))
                              : "no problem report within bound; monitors " +
                                    (verdict ? std::string(to_string(*verdict)) : std::string("undecided")));
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }

    for (const auto& s : world_.sessions) {
        const AdaptationSession* old = before.find(s.id);
        const SessionStatus was = old ? old->status : SessionStatus::RUNNING;
        if (s.status == was)
            continue;
        if (s.status == SessionStatus::ABORTED)
            retained(s, false, "case_retained", "session aborted");
        else if (s.status == SessionStatus::COMPLETED)
            pending_.push_back(PendingEvaluation{s.id, s.node, world_.step + cfg_.exploration_bound});
    }
}

} // namespace celds
