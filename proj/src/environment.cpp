#include "celds/environment.hpp"

#include <algorithm>
#include <random>

#include "celds/adaptation.hpp"
#include "celds/errors.hpp"

namespace celds {

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Integer in [lo, hi]; plain modulo keeps the sequence identical across standard libraries.
std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi)
{
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool is_percent(std::string_view metric)
{
    return metric == "cpu_usage" || metric == "storage_usage" || metric == "memory_usage";
}

bool sets_heartbeat(FaultKind k)
{
    return k == FaultKind::CRASH || k == FaultKind::HIGH_LATENCY;
}

void apply_fault(MonitorEnvironment& env, const FaultInjection& f)
{
    switch (f.kind) {
    case FaultKind::CRASH:
        env.response_arrived = false;
        env.latency.reset();
        env.measurements.reset();
        break;
    case FaultKind::HIGH_LATENCY:
        env.response_arrived = true;
        env.latency = static_cast<std::int64_t>(f.value);
        if (env.measurements)
            env.measurements->latency = static_cast<std::int64_t>(f.value);
        break;
    case FaultKind::RESOURCE_SPIKE:
        if (!env.measurements)
            break;
        if (f.metric == "latency")
            env.measurements->latency = static_cast<std::int64_t>(f.value);
        else if (f.metric == "cpu_usage")
            env.measurements->cpu_usage = f.value;
        else if (f.metric == "storage_usage")
            env.measurements->storage_usage = f.value;
        else if (f.metric == "memory_usage")
            env.measurements->memory_usage = f.value;
        else if (f.metric == "bandwidth")
            env.measurements->bandwidth = f.value;
        break;
    case FaultKind::REPO_UNAVAILABLE:
        env.repository_available = false;
        break;
    }
}

} // namespace

std::string_view to_string(FaultKind k)
{
    switch (k) {
    case FaultKind::CRASH: return "CRASH";
    case FaultKind::HIGH_LATENCY: return "HIGH_LATENCY";
    case FaultKind::RESOURCE_SPIKE: return "RESOURCE_SPIKE";
    case FaultKind::REPO_UNAVAILABLE: return "REPO_UNAVAILABLE";
    }
    return "?";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text)
{
    for (auto k : {FaultKind::CRASH, FaultKind::HIGH_LATENCY, FaultKind::RESOURCE_SPIKE, FaultKind::REPO_UNAVAILABLE})
        if (to_string(k) == text)
            return k;
    return std::nullopt;
}

std::vector<std::string> FaultInjection::violations() const
{
    std::vector<std::string> out;
    if (!NodeId::parse(target) && !MonitorId::parse(target))
        out.push_back("target '" + target + "' is neither a node nor a monitor");
    if (duration < 1)
        out.push_back("duration must be >= 1");
    if (from_step < 0)
        out.push_back("from_step must be >= 0");
    if (kind == FaultKind::HIGH_LATENCY && value < 0)
        out.push_back("latency must be >= 0");
    if (kind == FaultKind::RESOURCE_SPIKE) {
        if (std::find(std::begin(kSpikeMetrics), std::end(kSpikeMetrics), metric) == std::end(kSpikeMetrics))
            out.push_back("unknown metric '" + metric + "'");
        else if (value < 0 || (is_percent(metric) && value > 100))
            out.push_back("value " + std::to_string(value) + " out of range for " + metric);
    }
    return out;
}

bool contradictory(const FaultInjection& a, const FaultInjection& b)
{
    if (a.target != b.target)
        return false;
    const bool overlap = a.from_step < b.from_step + b.duration && b.from_step < a.from_step + a.duration;
    if (!overlap)
        return false;
    if (sets_heartbeat(a.kind) && sets_heartbeat(b.kind))
        return a.kind != b.kind || a.value != b.value;
    if (a.kind == FaultKind::RESOURCE_SPIKE && b.kind == FaultKind::RESOURCE_SPIKE)
        return a.metric == b.metric && a.value != b.value;
    return false;
}

void FaultSchedule::inject(FaultInjection f)
{
    if (auto v = f.violations(); !v.empty())
        throw FaultScheduleError("invalid fault on " + f.target + ": " + v.front());
    for (const auto& other : faults_)
        if (contradictory(f, other))
            throw FaultScheduleError("contradictory faults on " + f.target + ": " + std::string(to_string(other.kind)) +
                                     " from step " + std::to_string(other.from_step) + " and " +
                                     std::string(to_string(f.kind)) + " from step " + std::to_string(f.from_step));
    faults_.push_back(std::move(f));
}

std::vector<FaultInjection> FaultSchedule::active(std::int64_t step, const std::string& target) const
{
    std::vector<FaultInjection> out;
    for (const auto& f : faults_)
        if (f.target == target && f.active_at(step))
            out.push_back(f);
    return out;
}

SimulatedEnvironment::SimulatedEnvironment(std::uint64_t seed, FaultSchedule faults)
    : seed_(seed), faults_(std::move(faults))
{
}

MonitorEnvironment SimulatedEnvironment::observe(const WorldState& world, MonitorId monitor, std::int64_t step) const
{
    std::mt19937_64 rng(splitmix(seed_ ^ splitmix(static_cast<std::uint64_t>(step) * 0x100000001b3ULL + monitor.index)));
    MonitorEnvironment env;
    env.response_arrived = true;
    env.latency = draw(rng, 1, 10);
    NodeMetrics m;
    m.latency = *env.latency;
    m.cpu_usage = static_cast<double>(draw(rng, 5, 60));
    m.storage_usage = static_cast<double>(draw(rng, 10, 60));
    m.memory_usage = static_cast<double>(draw(rng, 10, 60));
    m.bandwidth = static_cast<double>(draw(rng, 20, 100));
    env.measurements = m;
    env.repository_available = true;

    const MonitorAgent* agent = world.find(monitor);
    if (agent && agent->assigned_node)
        for (const auto& f : faults_.active(step, agent->assigned_node->name()))
            apply_fault(env, f);
    for (const auto& f : faults_.active(step, monitor.name()))
        apply_fault(env, f);
    return env;
}

void SimulatedEnvironment::apply(WorldState& world) const
{
    for (const auto& m : world.monitors)
        if (m.assigned_node && !m.dismissed)
            world.environment[m.id] = observe(world, m.id, world.step);
    for (const auto& s : world.sessions) {
        if (s.status != SessionStatus::RUNNING)
            continue;
        for (const auto& c : s.controllers)
            world.action_outcome[c.action] = scripted_outcome(s.schema.actions()[c.schema_index]);
    }
}

} // namespace celds
