#include <algorithm>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "celds/checker.hpp"
#include "celds/errors.hpp"
#include "celds/io.hpp"
#include "celds/monitor_engine.hpp"
#include "celds/property.hpp"
#include "celds/scenario.hpp"
#include "support.hpp"

using namespace celds;
using namespace celds::testing;

namespace {

std::string leader_scenario()
{
    return read_file(data_path("leader_diagnosis.avl"));
}

ScenarioReport run_scenario(const std::string& text)
{
    const Topology t = load_topology(data_path("topology.json"));
    return execute_scenario(parse_scenario(text), t.world, t.cfg);
}

/// Topology world, case base and options as used by `celds verify`.
struct Verification {
    Topology topology = load_topology(data_path("topology.json"));
    CaseRepository repo = load_case_base(*topology.case_base);
    ExploreOptions opts;

    explicit Verification(int bound)
    {
        opts.ctx.cfg = topology.cfg;
        opts.ctx.repository = &repo;
        opts.bound = bound;
    }
};

const ReachabilityGraph& default_graph(const Verification& v)
{
    static const ReachabilityGraph g = explore_parallel(v.topology.world, v.opts);
    return g;
}

const Verification& default_verification()
{
    static const Verification v(12);
    return v;
}

// Reports a problem even when the heartbeat was answered in time.
MonitorStep eager_reporter(const MonitorAgent& m, const MonitorEnvironment& env, const Stores* store,
                           const Config& cfg, std::int64_t step)
{
    MonitorStep s = step_monitor(m, env, store, cfg, step);
    if (m.state == MonitorState::WAIT_FOR_RESPONSE && s.next.state == MonitorState::COLLECT_DATA)
        s.next.state = MonitorState::REPORT_PROBLEM;
    return s;
}

/// Three assigned monitors waiting on an answered, timely heartbeat.
WorldState waiting_world()
{
    WorldState w = run_step(assigned_world(), StepContext{}).world;
    for (const auto& m : w.monitors)
        w.environment[m.id] = MonitorEnvironment{true, 5, std::nullopt, true};
    return w;
}

Verdict check_text(const std::string& formula, const ReachabilityGraph& g, const ExploreOptions& opts)
{
    const auto entries = parse_property_file("-- custom\nCTLSPEC " + formula + "\n");
    return check(entries.at(0), g, opts);
}

} // namespace

TEST(Scenario, LeaderDiagnosisPasses)
{
    const ScenarioReport r = run_scenario(leader_scenario());
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.steps_run, 6);
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_EQ(r.checks[0].actual, sym("FAILED"));
    EXPECT_EQ(r.checks[0].line, 22);
}

TEST(Scenario, MutatedLatencyFailsTheCheck)
{
    std::string text = leader_scenario();
    const std::string from = "heartbeat_latency(heartbeat_1) := 21";
    text.replace(text.find(from), from.size(), "heartbeat_latency(heartbeat_1) := 5");
    const ScenarioReport r = run_scenario(text);
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_FALSE(r.checks[0].pass);
    EXPECT_FALSE(r.passed());
    EXPECT_EQ(r.checks[0].actual, Value{});
}

TEST(Scenario, Examples)
{
    try {
        parse_scenario("stp\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1);
        EXPECT_NE(std::string(e.what()).find("stp"), std::string::npos);
    }

    const ScenarioReport three = run_scenario("step\nstep // twice\nstep\n");
    EXPECT_EQ(three.steps_run, 3);
    EXPECT_TRUE(three.checks.empty());
    EXPECT_TRUE(three.passed());

    EXPECT_THROW(run_scenario("set monitor_state(monitor_1) := ACTIVE;\n"), ScenarioError);
}

TEST(Scenario, CommandsRoundTrip)
{
    const Scenario s = parse_scenario(leader_scenario());
    std::string again;
    for (const auto& c : s.commands)
        again += to_string(c) + "\n";
    const Scenario back = parse_scenario(again);
    ASSERT_EQ(back.commands.size(), s.commands.size());
    for (std::size_t i = 0; i < s.commands.size(); ++i)
        EXPECT_EQ(to_string(back.commands[i]), to_string(s.commands[i]));
}

TEST(PropertyParser, MonitorReachabilityExpandsPerMonitor)
{
    const auto entries = parse_property_file(read_file(data_path("properties.ctl")));
    ASSERT_EQ(entries.size(), 7u);
    EXPECT_EQ(entries[0].name, "monitor reachability");
    std::map<Domain, std::vector<std::string>> members{{Domain::Monitor, {"monitor_1", "monitor_2", "monitor_3"}}};
    const auto parts = expand_over(entries[0].specs.at(0), members);
    ASSERT_EQ(parts.size(), 3u);
    for (const auto& f : parts)
        EXPECT_EQ(f.form, PropertyForm::AG_AX);
    EXPECT_NE(parts[2].text.find("monitor_3"), std::string::npos);
}

TEST(PropertyParser, MonitorSafetyIsTwoConjuncts)
{
    const auto entries = parse_property_file(read_file(data_path("properties.ctl")));
    const PropertyEntry& safety = entries.at(4);
    EXPECT_EQ(safety.name, "monitor safety");
    ASSERT_EQ(safety.specs.size(), 2u);
    std::map<Domain, std::vector<std::string>> members{{Domain::Monitor, {"monitor_1"}}};
    EXPECT_EQ(expand_over(safety.specs[0], members).at(0).form, PropertyForm::AG_AX);
    EXPECT_EQ(expand_over(safety.specs[1], members).at(0).form, PropertyForm::AG_EX);
    EXPECT_TRUE(expand_over(safety.specs[0], {{Domain::Monitor, {}}}).empty());
}

TEST(PropertyParser, Errors)
{
    try {
        parse_formula("ag(monitor_state(monitor_1) = ACTIVE implies af(monitor_state(monitor_1) = LOG_DATA))");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("'af'"), std::string::npos);
    }
    EXPECT_THROW(parse_formula("ag((monitor_state(monitor_1) = ACTIVE)"), ParseError);
    EXPECT_THROW(parse_property_file("-- empty\n"), ParseError);
    EXPECT_THROW(parse_property_file("-- a\nCTLSPEC ag(true)\n-- b\n"), ParseError);
    EXPECT_THROW(parse_property_file(""), ParseError);
    const Expr nested = parse_formula("ag(ax(monitor_state(monitor_1) = ACTIVE))");
    EXPECT_THROW(expand_over(nested, {}), ParseError);
}

TEST(PropertyParser, Evaluate)
{
    const WorldState w = assigned_world();
    const Config cfg;
    EXPECT_EQ(evaluate(parse_formula("failed_diagnoses(leader_1) + normal_diagnoses(leader_1) + 2"), w, cfg),
              Value{std::int64_t{2}});
    EXPECT_TRUE(holds(parse_formula("monitor_state(monitor_1) = ACTIVE and not(trigger_gossip(monitor_2))"), w, cfg));
    EXPECT_EQ(evaluate(parse_formula("monitor_state(monitor_9)"), w, cfg), Value{});
    EXPECT_TRUE(holds(parse_formula("controller_state(controller_1) = undef"), w, cfg));
    EXPECT_THROW(evaluate(parse_formula("ax(true)"), w, cfg), ContractViolation);
}

TEST(Explore, BoundZeroIsTheInitialState)
{
    Verification v(0);
    const auto g = explore_serial(v.topology.world, v.opts);
    EXPECT_EQ(g.size(), 1u);
    EXPECT_FALSE(g.expanded[0]);
}

TEST(Explore, DeeperBoundsOnlyAddStates)
{
    Verification v(4);
    const auto shallow = explore_serial(v.topology.world, v.opts);
    v.opts.bound = 8;
    const auto deep = explore_serial(v.topology.world, v.opts);
    EXPECT_LT(shallow.size(), deep.size());
    for (std::size_t i = 0; i < shallow.size(); ++i) {
        ASSERT_EQ(shallow.keys[i], deep.keys[i]);
        ASSERT_EQ(shallow.depth[i], deep.depth[i]);
    }
}

TEST(Explore, ParallelMatchesSerial)
{
    Verification v(9);
    const auto a = explore_serial(v.topology.world, v.opts);
    const auto b = explore_parallel(v.topology.world, v.opts);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a.keys, b.keys);
    EXPECT_EQ(a.depth, b.depth);
    EXPECT_EQ(a.parent, b.parent);
    EXPECT_EQ(a.succ, b.succ);
    EXPECT_EQ(a.transitions, b.transitions);
}

TEST(Explore, PathsFollowTransitions)
{
    Verification v(6);
    const auto g = explore_serial(v.topology.world, v.opts);
    Gen gen(8);
    for (int i = 0; i < 25; ++i) {
        const auto s = static_cast<std::size_t>(gen.range(0, static_cast<std::int64_t>(g.size()) - 1));
        const auto path = g.path_to(s);
        ASSERT_EQ(path.front(), 0u);
        ASSERT_EQ(path.back(), s);
        ASSERT_EQ(static_cast<int>(path.size()) - 1, g.depth[s]);
        for (std::size_t k = 1; k < path.size(); ++k) {
            const auto& next = g.succ[path[k - 1]];
            ASSERT_NE(std::find(next.begin(), next.end(), path[k]), next.end());
        }
    }
}

TEST(Explore, EmptyChoiceSetIsAnError)
{
    Verification v(5);
    v.opts.choices.heartbeat.clear();
    EXPECT_THROW(explore_serial(v.topology.world, v.opts), ExplorationError);
}

TEST(Checker, AllPropertiesHoldAtBoundTwelve)
{
    const Verification& v = default_verification();
    const ReachabilityGraph& g = default_graph(v);
    const auto entries = parse_property_file(read_file(data_path("properties.ctl")));
    ASSERT_EQ(entries.size(), 7u);
    for (const auto& e : entries) {
        const Verdict verdict = check(e, g, v.opts);
        EXPECT_EQ(verdict.kind, VerdictKind::HOLDS_UP_TO_BOUND) << format_verdict(verdict, v.opts.ctx.cfg);
        EXPECT_EQ(verdict.bound, 12);
    }
    const auto domains = graph_domains(g);
    EXPECT_EQ(domains.at(Domain::Monitor).size(), 3u);
    EXPECT_FALSE(domains.at(Domain::Controller).empty());
}

TEST(Checker, UnreachableTargetIsNotFoundRatherThanViolated)
{
    Verification v(8);
    v.opts.choices.heartbeat = {5};
    v.opts.choices.measurements = {metrics(5, 30, 30, 30)};
    v.opts.choices.repository = {true};
    const auto g = explore_serial(v.topology.world, v.opts);
    const Verdict verdict =
        check_text("ag(leader_state(leader_1) = IDLE_LEADER implies ef(leader_state(leader_1) = EVALUATE))", g, v.opts);
    EXPECT_EQ(verdict.kind, VerdictKind::EF_TARGET_NOT_FOUND_UP_TO_BOUND);
    EXPECT_TRUE(verdict.counterexample.empty());
}

TEST(Checker, FairnessNeedsSuccessfulActions)
{
    Verification v(12);
    v.opts.choices.outcomes = {true, false};
    const auto g = explore_parallel(v.topology.world, v.opts);
    const auto entries = parse_property_file(read_file(data_path("properties.ctl")));
    EXPECT_EQ(entries.at(3).name, "action controller fairness");
    EXPECT_EQ(check(entries.at(3), g, v.opts).kind, VerdictKind::EF_TARGET_NOT_FOUND_UP_TO_BOUND);
}

TEST(Checker, MutantMonitorIsCaughtWithAReplayableCounterexample)
{
    ExploreOptions opts;
    opts.ctx.monitor_rule = &eager_reporter;
    opts.bound = 4;
    const WorldState initial = waiting_world();
    const auto g = explore_serial(initial, opts);
    const auto entries = parse_property_file(read_file(data_path("properties.ctl")));
    const Verdict verdict = check(entries.at(0), g, opts);
    ASSERT_EQ(verdict.kind, VerdictKind::VIOLATED);
    ASSERT_EQ(verdict.counterexample.size(), 2u);
    EXPECT_EQ(state_key(verdict.counterexample[0]), state_key(canonical_state(initial)));
    EXPECT_EQ(read(verdict.counterexample[1], "monitor_state", "monitor_1"), sym("REPORT_PROBLEM"));
    for (std::size_t i = 1; i < verdict.counterexample.size(); ++i) {
        const auto next = successors(verdict.counterexample[i - 1], opts.ctx, opts.choices);
        const StateKey want = state_key(verdict.counterexample[i]);
        EXPECT_TRUE(std::any_of(next.begin(), next.end(), [&](const WorldState& s) { return state_key(s) == want; }));
    }
    EXPECT_NE(format_verdict(verdict, opts.ctx.cfg).find("monitor_state(monitor_1) = REPORT_PROBLEM"),
              std::string::npos);

    opts.ctx.monitor_rule = &step_monitor;
    EXPECT_TRUE(check(entries.at(0), explore_serial(initial, opts), opts).holds());
}
