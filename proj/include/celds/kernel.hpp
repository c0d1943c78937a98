#pragma once

#include <functional>
#include <vector>

#include "celds/middleware.hpp"
#include "celds/update_set.hpp"

namespace celds {

/// An additional rule evaluated against the same frozen snapshot as the middleware program.
using Rule = std::function<UpdateSet(const WorldState&)>;

struct StepContext {
    MiddlewareContext middleware;
    std::vector<Rule> extra_rules;
};

struct StepResult {
    WorldState world;
    UpdateSet updates;
    std::vector<StoreRecord> records;
};

/// One synchronous-parallel step: every rule reads `world`, the updates are merged and applied at once.
/// Throws ConflictError on an exclusive clash; `world` itself is never modified.
StepResult run_step(const WorldState& world, const StepContext& ctx);

/// Merges and applies `updates` to a copy of `world` and advances the step counter.
WorldState apply_step(const WorldState& world, const UpdateSet& updates);

} // namespace celds
