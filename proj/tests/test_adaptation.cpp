#include <sstream>

#include <gtest/gtest.h>

#include "celds/adaptation.hpp"
#include "celds/environment.hpp"
#include "celds/errors.hpp"
#include "celds/kernel.hpp"
#include "support.hpp"

using namespace celds;
using namespace celds::testing;

namespace {

NumericFeature num(double v, double lo = 0, double hi = 100)
{
    return NumericFeature{v, lo, hi};
}

ProblemDescriptor profile(double response_time, double price, std::string region)
{
    ProblemDescriptor p;
    p.features["response_time"] = num(response_time);
    p.features["price"] = num(price);
    p.features["region"] = CategoricalFeature{std::move(region)};
    return p;
}

WorkflowSchema chain(const std::vector<std::string>& outcomes)
{
    std::vector<ActionSpec> actions;
    std::vector<std::pair<std::string, std::string>> deps;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        ActionSpec a{"a" + std::to_string(i + 1), "cap", {}};
        if (outcomes[i] == "failure")
            a.parameters["outcome"] = "failure";
        actions.push_back(a);
        if (i > 0)
            deps.emplace_back("a" + std::to_string(i), "a" + std::to_string(i + 1));
    }
    return WorkflowSchema(actions, deps);
}

AdaptationCase make_case(std::int64_t id, ProblemDescriptor p)
{
    return AdaptationCase{id, std::move(p), chain({"success"}), {}};
}

WorldState session_world(const WorkflowSchema& schema)
{
    WorldState w = assigned_world();
    w.sessions.push_back(instantiate_solution(schema, SessionId{1}, NodeId{1}, ControllerId{1}));
    w.next_session = 2;
    w.next_controller = 1 + static_cast<std::uint32_t>(schema.actions().size());
    return w;
}

/// Per step, the state of every controller of session_1.
std::vector<std::vector<ControllerState>> run_session(WorldState w, int steps, SessionStatus* final_status)
{
    SimulatedEnvironment env(5);
    StepContext ctx;
    std::vector<std::vector<ControllerState>> out;
    for (int i = 0; i < steps; ++i) {
        env.apply(w);
        w = run_step(w, ctx).world;
        std::vector<ControllerState> row;
        for (const auto& c : w.sessions[0].controllers)
            row.push_back(c.state);
        out.push_back(row);
    }
    *final_status = w.sessions[0].status;
    return out;
}

} // namespace

TEST(Similarity, Examples)
{
    const ProblemDescriptor a = profile(30, 40, "eu");
    EXPECT_DOUBLE_EQ(similarity(a, a), 1.0);
    EXPECT_DOUBLE_EQ(similarity(profile(0, 100, "eu"), profile(100, 0, "us")), 0.0);

    ProblemDescriptor x, y;
    const char* names[] = {"response_time", "price", "portability", "availability", "input_bandwidth", "output_bandwidth"};
    for (const char* n : names) {
        x.features[n] = num(0);
        y.features[n] = num(0);
    }
    x.features["region"] = CategoricalFeature{"eu"};
    y.features["region"] = CategoricalFeature{"eu"};
    // Three features agree, one is half a range apart, three are a full range apart.
    y.features["price"] = num(50);
    y.features["portability"] = num(100);
    y.features["availability"] = num(100);
    y.features["input_bandwidth"] = num(100);
    EXPECT_DOUBLE_EQ(similarity(x, y), 0.5);
}

TEST(Similarity, WeightsAndShape)
{
    const ProblemDescriptor a = profile(0, 0, "eu");
    const ProblemDescriptor b = profile(100, 0, "eu");
    EXPECT_DOUBLE_EQ(similarity(a, b, {{"response_time", 0.5}, {"price", 0.25}, {"region", 0.25}}), 0.5);
    ProblemDescriptor c = a;
    c.features.erase("region");
    EXPECT_THROW(similarity(a, c), ContractViolation);
}

TEST(Similarity, SymmetricAndBounded)
{
    Gen gen(3);
    const char* regions[] = {"eu", "us", "asia"};
    for (int i = 0; i < 500; ++i) {
        const auto a = profile(gen.real(0, 100), gen.real(0, 100), gen.pick(regions));
        const auto b = profile(gen.real(0, 100), gen.real(0, 100), gen.pick(regions));
        const double s = similarity(a, b);
        ASSERT_GE(s, 0.0);
        ASSERT_LE(s, 1.0);
        ASSERT_NEAR(s, similarity(b, a), 1e-12);
    }
}

TEST(RetrieveCase, Examples)
{
    const Config cfg;
    const ProblemDescriptor query = profile(20, 20, "eu");
    EXPECT_FALSE(retrieve_case(query, CaseRepository{}, cfg));

    // Similarities (0.9, 0.9, 1) and (0.4, 0.4, 1): 0.933 and 0.6.
    CaseRepository repo({make_case(1, profile(30, 10, "eu")), make_case(2, profile(80, 80, "eu"))});
    const auto hit = retrieve_case(query, repo, cfg);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->adaptation_case.id, 1);

    CaseRepository weak({make_case(2, profile(80, 80, "eu"))});
    EXPECT_NEAR(similarity(query, weak.cases()[0].problem), 0.6, 1e-12);
    EXPECT_FALSE(retrieve_case(query, weak, cfg));
}

TEST(RetrieveCase, TiesPreferRecentSuccess)
{
    const Config cfg;
    AdaptationCase older = make_case(1, profile(40, 50, "eu"));
    AdaptationCase newer = make_case(2, profile(60, 50, "eu"));
    older.outcome_history = {{3, true}};
    newer.outcome_history = {{9, true}};
    CaseRepository repo({older, newer});
    EXPECT_EQ(retrieve_case(profile(50, 50, "eu"), repo, cfg)->adaptation_case.id, 2);
}

TEST(RetainCase, Examples)
{
    CaseRepository repo({make_case(1, profile(40, 60, "eu"))});
    const auto id = retain_case(profile(40, 60, "eu"), chain({"success"}), true, repo, 10);
    EXPECT_EQ(id, 1);
    ASSERT_EQ(repo.find(1)->outcome_history.size(), 1u);
    EXPECT_TRUE(repo.find(1)->outcome_history[0].succeeded);

    const auto fresh = retain_case(profile(5, 5, "us"), chain({"success", "success"}), false, repo, 11);
    EXPECT_EQ(fresh, 2);
    EXPECT_FALSE(repo.find(2)->outcome_history.at(0).succeeded);

    retain_case(profile(5, 5, "us"), chain({"success", "success"}), false, repo, 12);
    EXPECT_EQ(repo.find(2)->outcome_history.size(), 2u);
    EXPECT_EQ(repo.cases().size(), 2u);
}

TEST(CaseRepository, JsonLinesRoundTrip)
{
    CaseRepository repo({make_case(1, profile(40, 60, "eu"))});
    repo.retain(profile(40, 60, "eu"), chain({"success"}), true, 4);
    std::stringstream text;
    repo.write(text);
    const CaseRepository back = CaseRepository::read(text);
    EXPECT_EQ(back.cases(), repo.cases());

    std::istringstream bad("{\"id\":1}\nnot json\n");
    try {
        CaseRepository::read(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1);
    }
}

TEST(EvaluateAdaptation, Examples)
{
    EXPECT_TRUE(evaluate_adaptation(NodeId{1}, Diagnosis::NORMAL));
    EXPECT_FALSE(evaluate_adaptation(NodeId{1}, Diagnosis::FAILED));
    EXPECT_FALSE(evaluate_adaptation(NodeId{1}, std::nullopt));
}

TEST(InstantiateSolution, Examples)
{
    const WorkflowSchema two({{"a1", "cap", {}}, {"a2", "cap", {}}}, {{"a1", "a2"}});
    const auto s = instantiate_solution(two, SessionId{1}, NodeId{1}, ControllerId{1});
    ASSERT_EQ(s.number_of_controllers(), 2u);
    EXPECT_EQ(s.controllers[0].state, ControllerState::NOTIFICATION_RECEIVED);
    ASSERT_TRUE(s.controllers[0].pending_notification);
    EXPECT_EQ(s.controllers[0].pending_notification->kind, NotificationKind::ACTION_STARTING);
    EXPECT_EQ(s.controllers[1].state, ControllerState::WAITING_NOTIFICATION);

    EXPECT_THROW(instantiate_solution(WorkflowSchema{}, SessionId{1}, NodeId{1}, ControllerId{1}), InstantiationError);

    const auto one = instantiate_solution(chain({"success"}), SessionId{2}, NodeId{1}, ControllerId{7});
    EXPECT_EQ(one.number_of_controllers(), 1u);
    EXPECT_EQ(one.controllers[0].id, ControllerId{7});
}

TEST(WorkflowSchema, RejectsCycles)
{
    EXPECT_THROW(WorkflowSchema({{"a", "", {}}, {"b", "", {}}}, {{"a", "b"}, {"b", "a"}}), std::invalid_argument);
    EXPECT_THROW(WorkflowSchema({{"a", "", {}}}, {{"a", "zz"}}), std::invalid_argument);
}

TEST(AcknowledgeNotification, Examples)
{
    auto s = instantiate_solution(chain({"success", "success", "success"}), SessionId{1}, NodeId{1}, ControllerId{1});
    ControllerAgent c = s.controllers[1];
    c.state = ControllerState::NOTIFICATION_RECEIVED;
    const auto merged = acknowledge_notification(c, ControllerId{1}, s).merge();
    EXPECT_EQ(merged.at(Location{"controller_state", "controller_2"}).value, sym("ASSESS_NOTIFICATION"));
    const auto& ack = merged.at(Location{"acknowledged_controllers", "controller_1"});
    EXPECT_EQ(ack.policy, MergePolicy::Additive);
    EXPECT_EQ(ack.value, Value{std::int64_t{1}});

    c.state = ControllerState::ACTION_RUNNING;
    EXPECT_TRUE(acknowledge_notification(c, ControllerId{1}, s).empty());

    c.state = ControllerState::NOTIFICATION_RECEIVED;
    EXPECT_TRUE(acknowledge_notification(c, c.id, s).empty());
}

TEST(BroadcastNotification, Examples)
{
    auto s = instantiate_solution(chain({"success", "success", "success"}), SessionId{1}, NodeId{1}, ControllerId{1});
    const auto merged = broadcast_notification(s.controllers[0], NotificationKind::ACTION_STARTING, s).merge();
    EXPECT_EQ(merged.at(Location{"controller_state", "controller_2"}).value, sym("NOTIFICATION_RECEIVED"));
    EXPECT_EQ(merged.at(Location{"controller_state", "controller_3"}).value, sym("NOTIFICATION_RECEIVED"));
    EXPECT_EQ(merged.count(Location{"pending_notification", "controller_1"}), 0u);
    EXPECT_EQ(merged.at(Location{"acknowledged_controllers", "controller_1"}).value, Value{std::int64_t{1}});
    EXPECT_EQ(merged.at(Location{"controller_state", "controller_1"}).value, sym("WAITING_FOR_ACKNOWLEDGEMENT"));

    ControllerAgent stranger;
    stranger.id = ControllerId{9};
    EXPECT_THROW(broadcast_notification(stranger, NotificationKind::ACTION_STARTING, s), ContractViolation);
}

TEST(BroadcastNotification, SingletonCompletesImmediately)
{
    WorldState w = session_world(chain({"success"}));
    AdaptationSession& s = w.sessions[0];
    s.controllers[0].state = ControllerState::WAITING_NOTIFICATION;
    s.controllers[0].pending_notification.reset();
    s.controllers[0].trigger_execute = true;
    StepContext ctx;
    w = run_step(w, ctx).world;
    const ControllerAgent& c = w.sessions[0].controllers[0];
    EXPECT_EQ(c.state, ControllerState::WAITING_FOR_ACKNOWLEDGEMENT);
    EXPECT_EQ(c.acknowledged_controllers, 1);
    w = run_step(w, ctx).world;
    EXPECT_EQ(w.sessions[0].controllers[0].state, ControllerState::ACTION_RUNNING);
}

TEST(TriggerAction, SuccessReturnsToWaiting)
{
    WorldState w = session_world(chain({"success", "success"}));
    SimulatedEnvironment env;
    StepContext ctx;
    bool ran = false, rested = false;
    for (int i = 0; i < 12 && !rested; ++i) {
        env.apply(w);
        w = run_step(w, ctx).world;
        const auto& c = w.sessions[0].controllers[0];
        ran = ran || c.state == ControllerState::ACTION_RUNNING;
        rested = ran && c.action_completed && c.state == ControllerState::WAITING_NOTIFICATION;
    }
    EXPECT_TRUE(rested);
}

TEST(TriggerAction, FailureAbortsSession)
{
    WorldState w = session_world(chain({"failure", "success"}));
    SimulatedEnvironment env;
    StepContext ctx;
    std::vector<StoreRecord> records;
    bool failed_broadcast = false;
    for (int i = 0; i < 8; ++i) {
        env.apply(w);
        auto r = run_step(w, ctx);
        w = r.world;
        records.insert(records.end(), r.records.begin(), r.records.end());
        failed_broadcast = failed_broadcast ||
                           w.sessions[0].controllers[0].broadcasting == NotificationKind::ACTION_FAILED;
    }
    EXPECT_TRUE(failed_broadcast);
    EXPECT_EQ(w.sessions[0].status, SessionStatus::ABORTED);
    bool logged = false;
    for (const auto& r : records)
        logged = logged || (r.store == StoreKind::EVENT && r.kind == "session_aborted");
    EXPECT_TRUE(logged);
}

TEST(TriggerAction, SilentNeighbourFailsAcknowledgement)
{
    WorldState w = session_world(chain({"success", "success"}));
    w.sessions[0].controllers[1].unresponsive = true;
    SimulatedEnvironment env;
    StepContext ctx;
    std::vector<StoreRecord> records;
    bool ack_failed = false;
    for (int i = 0; i < 10; ++i) {
        env.apply(w);
        auto r = run_step(w, ctx);
        w = r.world;
        records.insert(records.end(), r.records.begin(), r.records.end());
        ack_failed = ack_failed || w.sessions[0].controllers[0].state == ControllerState::CONTROLLER_ACKNOW_FAILED;
    }
    EXPECT_TRUE(ack_failed);
    EXPECT_EQ(w.sessions[0].status, SessionStatus::ABORTED);
    bool logged = false;
    for (const auto& r : records)
        logged = logged || r.kind == "acknowledgement_failed";
    EXPECT_TRUE(logged);
}

TEST(TriggerAction, RunningWithoutOutcomeIsAContractViolation)
{
    auto s = instantiate_solution(chain({"success"}), SessionId{1}, NodeId{1}, ControllerId{1});
    s.controllers[0].state = ControllerState::ACTION_RUNNING;
    WorldState w;
    EXPECT_THROW(trigger_action(s.controllers[0], s, w, Config{}, 0), ContractViolation);
}

TEST(Session, OneFailingActionAbortsAndStopsLaterActions)
{
    SessionStatus status{};
    const auto rows = run_session(session_world(chain({"success", "failure", "success"})), 40, &status);
    EXPECT_EQ(status, SessionStatus::ABORTED);
    bool ran[3] = {false, false, false};
    bool aborted = false;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] == ControllerState::ACTION_RUNNING) {
                EXPECT_FALSE(aborted) << "controller " << i + 1 << " started after the abort";
                ran[i] = true;
            }
        }
        aborted = aborted || row[1] == ControllerState::TERMINATED;
    }
    EXPECT_TRUE(ran[0]);
    EXPECT_TRUE(ran[1]);
    EXPECT_FALSE(ran[2]);
    for (auto s : rows.back())
        EXPECT_EQ(s, ControllerState::TERMINATED);
}

TEST(Session, AllSuccessReachesReadyWithinBound)
{
    const Config cfg;
    SessionStatus status{};
    const auto rows = run_session(session_world(chain({"success", "success", "success"})), 60, &status);
    EXPECT_EQ(status, SessionStatus::COMPLETED);
    for (std::size_t c = 0; c < 3; ++c) {
        int started = -1, ready = -1;
        for (std::size_t t = 0; t < rows.size(); ++t) {
            if (started < 0 && rows[t][c] == ControllerState::ACTION_RUNNING)
                started = static_cast<int>(t);
            if (started >= 0 && rows[t][c] == ControllerState::READY_FOR_REMOVAL) {
                ready = static_cast<int>(t);
                break;
            }
        }
        ASSERT_GE(started, 0) << "controller " << c + 1;
        ASSERT_GE(ready, 0) << "controller " << c + 1;
        EXPECT_LE(ready - started, cfg.exploration_bound) << "controller " << c + 1;
    }
}

TEST(Session, DiamondSchemaCompletes)
{
    const WorkflowSchema diamond({{"a", "", {}}, {"b", "", {}}, {"c", "", {}}, {"d", "", {}}},
                                 {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
    SessionStatus status{};
    const auto rows = run_session(session_world(diamond), 80, &status);
    EXPECT_EQ(status, SessionStatus::COMPLETED);
}
