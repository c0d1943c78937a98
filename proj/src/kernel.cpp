#include "celds/kernel.hpp"

#include "celds/signature.hpp"

namespace celds {

WorldState apply_step(const WorldState& world, const UpdateSet& updates)
{
    const auto merged = updates.merge();
    WorldState next = world;
    apply_updates(next, merged, updates.created_sessions());
    next.step = world.step + 1;
    return next;
}

StepResult run_step(const WorldState& world, const StepContext& ctx)
{
    RuleOutput out = middleware_step(world, ctx.middleware);
    for (const auto& rule : ctx.extra_rules)
        out.updates.append(rule(world));
    StepResult result{apply_step(world, out.updates), std::move(out.updates), std::move(out.records)};
    return result;
}

} // namespace celds
