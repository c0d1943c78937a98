#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "celds/domain.hpp"

namespace celds {

enum class FaultKind : std::uint8_t { CRASH, HIGH_LATENCY, RESOURCE_SPIKE, REPO_UNAVAILABLE };

std::string_view to_string(FaultKind k);
std::optional<FaultKind> parse_fault_kind(std::string_view text);

/// Metrics a RESOURCE_SPIKE may override.
inline constexpr std::string_view kSpikeMetrics[] = {"latency", "cpu_usage", "storage_usage", "memory_usage",
                                                     "bandwidth"};

struct FaultInjection {
    std::string target; // node_N or monitor_N
    FaultKind kind = FaultKind::CRASH;
    double value = 0;   // latency for HIGH_LATENCY, metric value for RESOURCE_SPIKE
    std::string metric; // RESOURCE_SPIKE only
    std::int64_t from_step = 0;
    std::int64_t duration = 1;

    bool active_at(std::int64_t step) const { return step >= from_step && step < from_step + duration; }
    std::vector<std::string> violations() const;

    friend bool operator==(const FaultInjection&, const FaultInjection&) = default;
};

/// Whether two faults cannot both hold: same target, overlapping windows, incompatible effects.
bool contradictory(const FaultInjection& a, const FaultInjection& b);

class FaultSchedule {
public:
    /// Throws FaultScheduleError for an invalid fault or one contradicting a scheduled fault.
    void inject(FaultInjection f);

    const std::vector<FaultInjection>& faults() const { return faults_; }
    bool empty() const { return faults_.empty(); }

    /// Faults active at `step` whose target is `target`.
    std::vector<FaultInjection> active(std::int64_t step, const std::string& target) const;

private:
    std::vector<FaultInjection> faults_;
};

/// Seeded stand-in for the monitored nodes: answers heartbeats, publishes metrics, applies faults.
/// Values depend only on (seed, step, monitor), never on call order.
class SimulatedEnvironment {
public:
    explicit SimulatedEnvironment(std::uint64_t seed = 0, FaultSchedule faults = {});

    /// What `monitor` observes at `step`.
    MonitorEnvironment observe(const WorldState& world, MonitorId monitor, std::int64_t step) const;

    /// Writes the observations of every assigned monitor and the outcome of every running action.
    void apply(WorldState& world) const;

    const FaultSchedule& faults() const { return faults_; }
    FaultSchedule& faults() { return faults_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    FaultSchedule faults_;
};

} // namespace celds
