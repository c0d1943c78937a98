#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "celds/errors.hpp"
#include "celds/io.hpp"
#include "celds/monitor_engine.hpp"
#include "celds/simulation.hpp"
#include "support.hpp"

using namespace celds;
using namespace celds::testing;

namespace {

Rule writes(const std::string& fn, const std::string& arg, Value v, const std::string& agent)
{
    return [=](const WorldState&) {
        UpdateSet u;
        u.add(Location{fn, arg}, v, agent);
        return u;
    };
}

bool has_event(const Stores& s, const std::string& kind)
{
    for (const auto& r : s.events())
        if (r.kind == kind)
            return true;
    return false;
}

std::string trace_text(const Simulation& sim)
{
    std::ostringstream out;
    sim.trace().write(out);
    return out.str();
}

Simulation adapt_run(const std::string& case_base, std::uint64_t seed)
{
    Topology t = load_topology(data_path("topology.json"));
    Simulation sim(t.world, t.cfg, seed, load_faults(data_path("faults.jsonl")));
    sim.set_repository(load_case_base(data_path(case_base)));
    sim.run(50);
    return sim;
}

} // namespace

TEST(UpdateSet, ConflictingWritesThrowAndLeaveStateUnchanged)
{
    const WorldState w = assigned_world();
    const std::string before = world_digest(w);
    StepContext ctx;
    ctx.extra_rules = {writes("confidence_degree", "monitor_1", 0.3, "a"),
                       writes("confidence_degree", "monitor_1", 0.4, "b")};
    try {
        run_step(w, ctx);
        FAIL() << "expected ConflictError";
    } catch (const ConflictError& e) {
        EXPECT_EQ(e.location(), (Location{"confidence_degree", "monitor_1"}));
        EXPECT_EQ(e.first_agent(), "a");
        EXPECT_EQ(e.second_agent(), "b");
    }
    EXPECT_EQ(world_digest(w), before);
}

TEST(UpdateSet, MergeRules)
{
    UpdateSet same;
    same.add(Location{"f", "x"}, std::int64_t{1});
    same.add(Location{"f", "x"}, std::int64_t{1});
    EXPECT_EQ(same.merge().size(), 1u);

    UpdateSet sum;
    sum.add_additive(Location{"f", "x"}, 1);
    sum.add_additive(Location{"f", "x"}, 2);
    EXPECT_EQ(sum.merge().at(Location{"f", "x"}).value, Value{std::int64_t{3}});

    UpdateSet mixed;
    mixed.add(Location{"f", "x"}, std::int64_t{1});
    mixed.add_additive(Location{"f", "x"}, 1);
    EXPECT_THROW(mixed.merge(), ConflictError);
}

TEST(Kernel, EmptyUpdateSetStutters)
{
    const WorldState w = assigned_world();
    const WorldState next = apply_step(w, UpdateSet{});
    EXPECT_EQ(world_digest(next), world_digest(w));
    EXPECT_EQ(next.step, w.step + 1);
}

TEST(Kernel, RulesReadTheSameSnapshot)
{
    // A swap is only possible when both rules read the pre-step values.
    WorldState w = assigned_world();
    w.monitors[0].confidence_degree = 0.2;
    w.monitors[1].confidence_degree = 0.7;
    StepContext ctx;
    ctx.extra_rules = {
        [](const WorldState& s) {
            UpdateSet u;
            u.add(Location{"confidence_degree", "monitor_1"}, s.monitors[1].confidence_degree);
            return u;
        },
        [](const WorldState& s) {
            UpdateSet u;
            u.add(Location{"confidence_degree", "monitor_2"}, s.monitors[0].confidence_degree);
            return u;
        }};
    const WorldState next = run_step(w, ctx).world;
    EXPECT_DOUBLE_EQ(next.monitors[0].confidence_degree, 0.7);
    EXPECT_DOUBLE_EQ(next.monitors[1].confidence_degree, 0.2);
}

TEST(Faults, HighLatencyAndRepositoryOutage)
{
    const WorldState w = assigned_world();
    FaultSchedule faults;
    faults.inject({"node_1", FaultKind::HIGH_LATENCY, 21, "", 4, 2});
    faults.inject({"monitor_3", FaultKind::REPO_UNAVAILABLE, 0, "", 0, 10});
    const SimulatedEnvironment env(1, faults);

    const MonitorEnvironment slow = env.observe(w, mon(1), 5);
    EXPECT_TRUE(slow.response_arrived);
    EXPECT_EQ(slow.latency, 21);
    EXPECT_LE(*env.observe(w, mon(1), 6).latency, 10);
    EXPECT_FALSE(env.observe(w, mon(3), 2).repository_available);
    EXPECT_TRUE(env.observe(w, mon(2), 2).repository_available);

    MonitorAgent m = w.monitors[0];
    m.state = MonitorState::WAIT_FOR_RESPONSE;
    EXPECT_EQ(heartbeat_verdict(m, slow, Config{}), HeartbeatResult::LATE);
}

TEST(Faults, CrashIsMissingAfterTheWaitThenRecovers)
{
    const WorldState w = assigned_world();
    FaultSchedule faults;
    faults.inject({"node_1", FaultKind::CRASH, 0, "", 3, 4});
    const SimulatedEnvironment env(2, faults);
    const Config cfg;

    const MonitorEnvironment down = env.observe(w, mon(1), 3);
    EXPECT_FALSE(down.response_arrived);
    EXPECT_FALSE(down.measurements);

    MonitorAgent m = w.monitors[0];
    m.state = MonitorState::WAIT_FOR_RESPONSE;
    m.heartbeat_wait = 0;
    EXPECT_FALSE(heartbeat_verdict(m, down, cfg));
    m.heartbeat_wait = cfg.heartbeat_wait_steps - 1;
    EXPECT_EQ(heartbeat_verdict(m, down, cfg), HeartbeatResult::MISSING);

    m.heartbeat_wait = 0;
    EXPECT_EQ(heartbeat_verdict(m, env.observe(w, mon(1), 7), cfg), HeartbeatResult::OK);
}

TEST(Faults, ContradictionsAreRejected)
{
    FaultSchedule faults;
    faults.inject({"node_1", FaultKind::CRASH, 0, "", 3, 6});
    EXPECT_THROW(faults.inject({"node_1", FaultKind::HIGH_LATENCY, 21, "", 5, 2}), FaultScheduleError);
    EXPECT_NO_THROW(faults.inject({"node_1", FaultKind::HIGH_LATENCY, 21, "", 9, 2}));
    EXPECT_NO_THROW(faults.inject({"node_2", FaultKind::HIGH_LATENCY, 30, "", 3, 2}));
    EXPECT_NO_THROW(faults.inject({"node_1", FaultKind::REPO_UNAVAILABLE, 0, "", 3, 2}));
    EXPECT_THROW(faults.inject({"node_1", FaultKind::CRASH, 0, "", 1, 0}), FaultScheduleError);
    EXPECT_THROW(faults.inject({"node_1", FaultKind::RESOURCE_SPIKE, 120, "cpu_usage", 1, 1}), FaultScheduleError);
    EXPECT_THROW(faults.inject({"host_1", FaultKind::CRASH, 0, "", 1, 1}), FaultScheduleError);
    EXPECT_EQ(faults.faults().size(), 4u);
}

TEST(Environment, ObservationsIgnoreCallOrder)
{
    const WorldState w = assigned_world();
    const SimulatedEnvironment env(77);
    const auto a3 = env.observe(w, mon(3), 9);
    const auto a1 = env.observe(w, mon(1), 9);
    EXPECT_EQ(env.observe(w, mon(1), 9), a1);
    EXPECT_EQ(env.observe(w, mon(3), 9), a3);
    Gen gen(5);
    for (int i = 0; i < 200; ++i) {
        const auto e = env.observe(w, mon(static_cast<std::uint32_t>(gen.range(1, 3))), gen.range(0, 1000));
        ASSERT_TRUE(e.response_arrived);
        ASSERT_GE(*e.latency, 1);
        ASSERT_LE(*e.latency, 10);
        ASSERT_LT(e.measurements->cpu_usage, Config{}.critical_cpu);
    }
}

TEST(Stores, QueryByNodeAndWindow)
{
    Stores s;
    for (int step = 0; step < 5; ++step) {
        StoreRecord r;
        r.store = StoreKind::DATA;
        r.step = step;
        r.kind = "metrics";
        r.node = step % 2 ? "node_2" : "node_1";
        r.metrics = metrics(step, 10);
        s.append(r);
    }
    EXPECT_EQ(s.query(StoreKind::DATA, "node_1").size(), 3u);
    EXPECT_EQ(s.query(StoreKind::DATA, "node_1", 1, 3).size(), 1u);
    EXPECT_TRUE(s.query(StoreKind::DATA, "node_9").empty());
    EXPECT_TRUE(s.query(StoreKind::EVENT, "node_1").empty());
    const auto history = s.metric_history(NodeId{2});
    ASSERT_EQ(history.size(), 2u);
    EXPECT_EQ(history[0].latency, 1);
    std::ostringstream out;
    s.write(out);
    const std::string text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(Simulation, SameSeedSameTrace)
{
    Topology t = load_topology(data_path("topology.json"));
    Simulation a(t.world, t.cfg, 11), b(t.world, t.cfg, 11), c(t.world, t.cfg, 12);
    a.run(30);
    b.run(30);
    c.run(30);
    EXPECT_EQ(trace_text(a), trace_text(b));
    EXPECT_NE(trace_text(a), trace_text(c));
    ASSERT_EQ(a.trace().steps.size(), 31u);
    EXPECT_EQ(a.trace().steps.back().digest, world_digest(a.world()));
}

TEST(Simulation, CrashTriggersAdaptationAndRetention)
{
    const Simulation sim = adapt_run("cases.jsonl", 4);
    ASSERT_FALSE(sim.world().sessions.empty());
    EXPECT_EQ(sim.world().sessions[0].case_id, 1);
    EXPECT_EQ(sim.world().sessions[0].status, SessionStatus::COMPLETED);
    EXPECT_TRUE(has_event(sim.stores(), "adaptation_evaluated") || has_event(sim.stores(), "adaptation_quiet"));
    // The node's own profile differs from case 1, so it is retained as a new case.
    ASSERT_EQ(sim.repository().cases().size(), 3u);
    EXPECT_TRUE(sim.repository().find(1)->outcome_history.empty());
    const auto& history = sim.repository().find(3)->outcome_history;
    ASSERT_EQ(history.size(), 1u);
    EXPECT_TRUE(history.back().succeeded);
}

TEST(Simulation, FailedActionAbortsAndIsRetainedAsFailure)
{
    const Simulation sim = adapt_run("cases_failing.jsonl", 4);
    ASSERT_FALSE(sim.world().sessions.empty());
    EXPECT_EQ(sim.world().sessions[0].status, SessionStatus::ABORTED);
    EXPECT_TRUE(has_event(sim.stores(), "session_aborted"));
    EXPECT_TRUE(has_event(sim.stores(), "case_retained"));
    ASSERT_EQ(sim.repository().cases().size(), 3u);
    const auto& history = sim.repository().find(3)->outcome_history;
    ASSERT_EQ(history.size(), 1u);
    EXPECT_FALSE(history.back().succeeded);
}

TEST(Io, TopologyErrors)
{
    EXPECT_THROW(parse_topology("{"), ParseError);
    EXPECT_THROW(parse_topology(R"({"nodes": 1, "colour": 3})"), ParseError);
    EXPECT_THROW(parse_topology(R"({"nodes": [{"id": "n1"}]})"), ParseError);
    EXPECT_THROW(parse_topology(R"({"nodes": 1, "config": {"max_latency": "x"}})"), ParseError);
    EXPECT_THROW(load_topology(data_path("no_such_file.json")), FileError);

    const Topology t = parse_topology(R"({"nodes": 2, "monitor_pool": 6, "config": {"max_latency": 30}})");
    EXPECT_EQ(t.world.nodes.size(), 2u);
    EXPECT_EQ(t.world.monitors.size(), 6u);
    EXPECT_EQ(t.cfg.max_latency, 30);
    EXPECT_EQ(config_from_json(config_to_json(t.cfg)).max_latency, 30);
}

TEST(Io, FaultFiles)
{
    EXPECT_EQ(load_faults(data_path("faults.jsonl")).faults().size(), 2u);
    EXPECT_THROW(load_faults(data_path("contradictory_faults.jsonl")), FaultScheduleError);
    std::istringstream bad("{\"target\":\"node_1\",\"kind\":\"CRASH\",\"from_step\":1}\n\n{\"target\":\"node_1\",\"kind\":\"MELT\",\"from_step\":1}\n");
    try {
        parse_faults(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}
