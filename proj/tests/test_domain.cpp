#include <gtest/gtest.h>

#include "celds/domain.hpp"
#include "celds/errors.hpp"
#include "celds/signature.hpp"
#include "celds/update_set.hpp"
#include "support.hpp"

using namespace celds;
using namespace celds::testing;

TEST(ValidateWorld, FreshWorldHasNoViolations)
{
    EXPECT_TRUE(validate_world(make_world(1, 3)).empty());
    EXPECT_TRUE(validate_world(assigned_world()).empty());
}

TEST(ValidateWorld, IdleLeaderWithCountersIsFlagged)
{
    WorldState w = assigned_world();
    ASSERT_EQ(w.leaders.size(), 1u);
    w.leaders[0].failed_diagnoses = 2;
    const auto v = validate_world(w);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].subject, "leader_1");
}

TEST(ValidateWorld, ConfidenceOutOfRange)
{
    WorldState w = make_world(1, 3);
    w.monitors[1].confidence_degree = 1.3;
    const auto v = validate_world(w);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].subject, "monitor_2");
}

TEST(ValidateWorld, GossipWithoutProblem)
{
    WorldState w = assigned_world();
    w.monitors[0].trigger_gossip = true;
    EXPECT_EQ(validate_world(w).size(), 1u);
    w.monitors[0].diagnosis = Diagnosis::CRITICAL;
    EXPECT_TRUE(validate_world(w).empty());
}

TEST(Ids, ParseAndName)
{
    EXPECT_EQ(MonitorId::parse("monitor_12")->index, 12u);
    EXPECT_EQ(LeaderId{3}.name(), "leader_3");
    EXPECT_FALSE(MonitorId::parse("leader_1"));
    EXPECT_FALSE(MonitorId::parse("monitor_"));
    EXPECT_FALSE(MonitorId::parse("monitor_x"));
}

TEST(Enums, RoundTrip)
{
    for (auto s : {MonitorState::ACTIVE, MonitorState::WAIT_FOR_RESPONSE, MonitorState::COLLECT_DATA,
                   MonitorState::RETRIEVE_DATA, MonitorState::ASSIGN_DIAGNOSIS, MonitorState::REPORT_PROBLEM,
                   MonitorState::LOG_DATA})
        EXPECT_EQ(parse_monitor_state(to_string(s)), s);
    for (auto d : {Diagnosis::NORMAL, Diagnosis::CRITICAL, Diagnosis::FAILED})
        EXPECT_EQ(parse_diagnosis(to_string(d)), d);
    EXPECT_FALSE(parse_leader_state("SLEEPING"));
}

TEST(Values, MeasurementTupleText)
{
    EXPECT_EQ(to_string(Value{metrics(5, 10)}),
              "[(\"Latency\", 5), (\"CPU Usage\", 10.0), (\"Storage Usage\", 15.0), (\"Memory Usage\", 10.0), "
              "(\"Bandwidth\", 50.0)]");
    EXPECT_TRUE(values_equal(Value{std::int64_t{3}}, Value{3.0}));
    EXPECT_FALSE(values_equal(Value{Undef{}}, Value{false}));
}

TEST(Signature, ClassifiesFunctions)
{
    EXPECT_EQ(find_function("heartbeat_latency")->kind, FunctionKind::Monitored);
    EXPECT_EQ(find_function("monitor_state")->kind, FunctionKind::Controlled);
    EXPECT_EQ(find_function("leader_state")->kind, FunctionKind::Shared);
    EXPECT_EQ(find_function("heartbeat_timeout")->kind, FunctionKind::Derived);
    EXPECT_EQ(find_function("acknowledged_controllers")->policy, MergePolicy::Additive);
    EXPECT_EQ(find_function("no_such_function"), nullptr);
}

TEST(Signature, ReadWriteRoundTrip)
{
    WorldState w = assigned_world();
    write_location(w, Location{"monitor_state", "monitor_2"}, sym("COLLECT_DATA"));
    EXPECT_EQ(w.monitors[1].state, MonitorState::COLLECT_DATA);
    EXPECT_EQ(read(w, "monitor_state", "monitor_2"), sym("COLLECT_DATA"));
    write_location(w, Location{"heartbeat_latency", "heartbeat_1"}, std::int64_t{21});
    EXPECT_EQ(read(w, "heartbeat_latency", "monitor_1"), Value{std::int64_t{21}});
    EXPECT_EQ(read(w, "assigned_node", "monitor_3"), sym("node_1"));
    EXPECT_THROW(write_location(w, Location{"monitor_state", "monitor_2"}, sym("DANCING")), ContractViolation);
}

TEST(Signature, AbsentAgentsAreUnavailable)
{
    const WorldState w = assigned_world();
    EXPECT_TRUE(location_available(w, Location{"leader_state", "leader_1"}));
    EXPECT_FALSE(location_available(w, Location{"leader_state", "leader_2"}));
    EXPECT_FALSE(location_available(w, Location{"controller_state", "controller_1"}));
}

TEST(Digest, IgnoresStepCounter)
{
    WorldState a = assigned_world();
    WorldState b = a;
    b.step = 99;
    EXPECT_EQ(world_digest(a), world_digest(b));
    b.monitors[0].confidence_degree = 0.9;
    EXPECT_NE(world_digest(a), world_digest(b));
}

TEST(Digest, EncodingIsStable)
{
    EXPECT_EQ(encode_world(make_world(2, 4)), encode_world(make_world(2, 4)));
    EXPECT_EQ(world_digest(make_world(1, 3)).size(), 16u);
}
