#include "celds/explore.hpp"

#include <algorithm>
#include <exception>
#include <unordered_map>

#include "celds/errors.hpp"
#include "celds/kernel.hpp"
#include "celds/signature.hpp"

namespace celds {

ChoiceDomain ChoiceDomain::standard()
{
    ChoiceDomain d;
    d.heartbeat = {5, 21};
    d.measurements = {NodeMetrics{5, 30, 30, 30, 50}, NodeMetrics{5, 95, 30, 30, 50}};
    d.repository = {true, false};
    d.outcomes = {true};
    return d;
}

StateKey state_key(const WorldState& world)
{
    const std::string text = encode_world(world);
    return StateKey{fnv1a64(text), fnv1a64(text, 0x84222325cbf29ce4ULL)};
}

namespace {

enum class SlotKind { Heartbeat, Measurements, Repository, Outcome };

struct Slot {
    SlotKind kind;
    MonitorId monitor;
    ActionId action;
};

bool observing(const MonitorAgent& m)
{
    return m.assigned_node && !m.dismissed;
}

std::vector<Slot> slots_of(const WorldState& world)
{
    std::vector<Slot> out;
    for (const auto& m : world.monitors) {
        if (!observing(m))
            continue;
        if (m.state == MonitorState::WAIT_FOR_RESPONSE)
            out.push_back({SlotKind::Heartbeat, m.id, {}});
        else if (m.state == MonitorState::COLLECT_DATA)
            out.push_back({SlotKind::Measurements, m.id, {}});
        else if (m.state == MonitorState::RETRIEVE_DATA)
            out.push_back({SlotKind::Repository, m.id, {}});
    }
    for (const auto& s : world.sessions) {
        if (s.status != SessionStatus::RUNNING)
            continue;
        for (const auto& c : s.controllers)
            if (c.state == ControllerState::ACTION_RUNNING)
                out.push_back({SlotKind::Outcome, {}, c.action});
    }
    return out;
}

std::size_t options(const Slot& slot, const ChoiceDomain& d)
{
    switch (slot.kind) {
    case SlotKind::Heartbeat: return d.heartbeat.size();
    case SlotKind::Measurements: return d.measurements.size();
    case SlotKind::Repository: return d.repository.size();
    case SlotKind::Outcome: return d.outcomes.size();
    }
    return 0;
}

void choose(WorldState& world, const Slot& slot, const ChoiceDomain& d, std::size_t i)
{
    switch (slot.kind) {
    case SlotKind::Heartbeat: {
        auto& env = world.environment[slot.monitor];
        env.response_arrived = d.heartbeat[i].has_value();
        env.latency = d.heartbeat[i];
        break;
    }
    case SlotKind::Measurements: world.environment[slot.monitor].measurements = d.measurements[i]; break;
    case SlotKind::Repository: world.environment[slot.monitor].repository_available = d.repository[i]; break;
    case SlotKind::Outcome: world.action_outcome[slot.action] = d.outcomes[i]; break;
    }
}

} // namespace

WorldState canonical_state(WorldState world)
{
    world.step = 0;
    std::map<MonitorId, MonitorEnvironment> env;
    std::map<ActionId, bool> outcomes;
    for (const auto& slot : slots_of(world)) {
        const MonitorEnvironment& old = world.env(slot.monitor);
        switch (slot.kind) {
        case SlotKind::Heartbeat:
            env[slot.monitor].response_arrived = old.response_arrived;
            env[slot.monitor].latency = old.latency;
            break;
        case SlotKind::Measurements: env[slot.monitor].measurements = old.measurements; break;
        case SlotKind::Repository: env[slot.monitor].repository_available = old.repository_available; break;
        case SlotKind::Outcome:
            if (auto it = world.action_outcome.find(slot.action); it != world.action_outcome.end())
                outcomes[slot.action] = it->second;
            break;
        }
    }
    world.environment = std::move(env);
    world.action_outcome = std::move(outcomes);
    return world;
}

std::vector<WorldState> successors(const WorldState& state, const MiddlewareContext& ctx,
                                   const ChoiceDomain& choices)
{
    if (state.middleware_state == MiddlewareState::STOPPED)
        return {};
    StepContext sc{ctx, {}};
    WorldState base;
    try {
        base = canonical_state(run_step(state, sc).world);
    } catch (const std::exception& e) {
        throw ExplorationError(std::string("step failed during exploration: ") + e.what());
    }

    const std::vector<Slot> slots = slots_of(base);
    std::vector<std::size_t> radix;
    std::size_t total = 1;
    for (const auto& s : slots) {
        const std::size_t n = options(s, choices);
        if (n == 0)
            throw ExplorationError("empty choice set for " +
                                   (s.kind == SlotKind::Outcome ? s.action.name() : s.monitor.name()));
        radix.push_back(n);
        total *= n;
    }

    std::vector<WorldState> out;
    out.reserve(total);
    std::vector<std::size_t> digit(slots.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        WorldState w = base;
        for (std::size_t i = 0; i < slots.size(); ++i)
            choose(w, slots[i], choices, digit[i]);
        out.push_back(std::move(w));
        for (std::size_t i = slots.size(); i-- > 0;) {
            if (++digit[i] < radix[i])
                break;
            digit[i] = 0;
        }
    }
    return out;
}

std::vector<std::size_t> ReachabilityGraph::path_to(std::size_t state) const
{
    std::vector<std::size_t> path;
    for (std::int64_t s = static_cast<std::int64_t>(state); s >= 0; s = parent[static_cast<std::size_t>(s)])
        path.push_back(static_cast<std::size_t>(s));
    return {path.rbegin(), path.rend()};
}

namespace {

struct Expansion {
    std::vector<WorldState> worlds;
    std::vector<StateKey> keys;
    std::exception_ptr error;
};

Expansion expand(const WorldState& state, const ExploreOptions& opts)
{
    Expansion x;
    try {
        x.worlds = successors(state, opts.ctx, opts.choices);
        x.keys.reserve(x.worlds.size());
        for (const auto& w : x.worlds)
            x.keys.push_back(state_key(w));
    } catch (...) {
        x.error = std::current_exception();
    }
    return x;
}

template <typename ExpandLevel>
ReachabilityGraph explore(const WorldState& initial, const ExploreOptions& opts, ExpandLevel expand_level)
{
    ReachabilityGraph g;
    g.bound = opts.bound;
    std::unordered_map<StateKey, std::size_t, StateKeyHash> index;

    auto add = [&](WorldState w, StateKey key, int depth, std::int64_t parent) {
        auto [it, fresh] = index.emplace(key, g.states.size());
        if (fresh) {
            g.states.push_back(std::move(w));
            g.keys.push_back(key);
            g.depth.push_back(depth);
            g.parent.push_back(parent);
            g.succ.emplace_back();
            g.expanded.push_back(false);
        }
        return it->second;
    };

    WorldState first = canonical_state(initial);
    const StateKey k0 = state_key(first);
    add(std::move(first), k0, 0, -1);

    std::size_t level_begin = 0;
    for (int depth = 0; depth < opts.bound; ++depth) {
        const std::size_t level_end = g.states.size();
        if (level_begin == level_end)
            break;
        std::vector<Expansion> results = expand_level(g, level_begin, level_end);
        for (std::size_t i = 0; i < results.size(); ++i) {
            Expansion& x = results[i];
            if (x.error)
                std::rethrow_exception(x.error);
            const std::size_t from = level_begin + i;
            std::vector<std::size_t> targets;
            for (std::size_t j = 0; j < x.worlds.size(); ++j)
                targets.push_back(add(std::move(x.worlds[j]), x.keys[j], depth + 1, static_cast<std::int64_t>(from)));
            std::sort(targets.begin(), targets.end());
            targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
            g.transitions += targets.size();
            g.succ[from] = std::move(targets);
            g.expanded[from] = true;
        }
        level_begin = level_end;
    }
    return g;
}

} // namespace

ReachabilityGraph explore_serial(const WorldState& initial, const ExploreOptions& opts)
{
    return explore(initial, opts, [&](const ReachabilityGraph& g, std::size_t begin, std::size_t end) {
        std::vector<Expansion> out;
        out.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i)
            out.push_back(expand(g.states[i], opts));
        return out;
    });
}

ReachabilityGraph explore_parallel(const WorldState& initial, const ExploreOptions& opts)
{
    return explore(initial, opts, [&](const ReachabilityGraph& g, std::size_t begin, std::size_t end) {
        std::vector<Expansion> out(end - begin);
        const auto n = static_cast<std::int64_t>(end - begin);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = expand(g.states[begin + static_cast<std::size_t>(i)], opts);
        return out;
    });
}

} // namespace celds
