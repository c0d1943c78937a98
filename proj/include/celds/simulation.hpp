#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "celds/adaptation.hpp"
#include "celds/environment.hpp"
#include "celds/kernel.hpp"
#include "celds/stores.hpp"

namespace celds {

struct TraceStep {
    std::int64_t step = 0;
    std::string digest;
    std::vector<Update> updates;
    std::vector<std::string> created; // sessions the step instantiated
};

/// Step 0 is the initial world; step i is the world after the i-th run_step.
struct Trace {
    std::uint64_t seed = 0;
    Config cfg;
    std::vector<TraceStep> steps;

    /// Header line with seed and config, then one JSON object per step.
    void write(std::ostream& out) const;
};

/// A running middleware over a simulated environment, with its stores, trace and case repository.
class Simulation {
public:
    Simulation(WorldState initial, Config cfg, std::uint64_t seed = 0, FaultSchedule faults = {});

    void set_repository(CaseRepository repo) { repository_ = std::move(repo); }
    void set_monitor_rule(MonitorTransition rule) { monitor_rule_ = rule; }
    void inject_fault(FaultInjection f) { environment_.faults().inject(std::move(f)); }

    /// Refreshes the environment, then runs one kernel step. On ConflictError the world, stores and
    /// trace are left as they were.
    StepResult step();
    void run(std::int64_t steps);

    const WorldState& world() const { return world_; }
    const Stores& stores() const { return stores_; }
    const Trace& trace() const { return trace_; }
    const CaseRepository& repository() const { return repository_; }
    const Config& config() const { return cfg_; }

private:
    struct PendingEvaluation {
        SessionId session;
        NodeId node;
        std::int64_t deadline = 0;
    };

    void follow_sessions(const WorldState& before, const StepResult& result);

    WorldState world_;
    Config cfg_;
    SimulatedEnvironment environment_;
    CaseRepository repository_;
    MonitorTransition monitor_rule_ = &step_monitor;
    Stores stores_;
    Trace trace_;
    std::vector<PendingEvaluation> pending_;
};

} // namespace celds
