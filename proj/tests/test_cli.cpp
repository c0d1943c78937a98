#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "celds/io.hpp"
#include "support.hpp"

using namespace celds;
using namespace celds::testing;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("celds_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

    /// Exit code of `celds <args>`, output captured in out.txt.
    int run(const std::string& args, const std::string& env = "") const
    {
        const std::string cmd = env + " " + std::string(CELDS_CLI_PATH) + " " + args + " > " + tmp("out.txt") + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string output() const { return read_file(tmp("out.txt")); }

    fs::path dir_;
};

const std::string kTopology = " --topology " + data_path("topology.json");

} // namespace

TEST_F(Cli, ValidatePassesAndFails)
{
    EXPECT_EQ(run("validate" + kTopology + " --scenario " + data_path("leader_diagnosis.avl")), 0) << output();
    EXPECT_NE(output().find("PASS"), std::string::npos);

    std::string text = read_file(data_path("leader_diagnosis.avl"));
    const std::string from = "heartbeat_latency(heartbeat_1) := 21";
    text.replace(text.find(from), from.size(), "heartbeat_latency(heartbeat_1) := 5");
    std::ofstream(tmp("mutated.avl")) << text;
    EXPECT_EQ(run("validate" + kTopology + " --scenario " + tmp("mutated.avl")), 1);
    EXPECT_NE(output().find("FAIL (actual undef)"), std::string::npos) << output();

    std::ofstream(tmp("bad.avl")) << "stp\n";
    EXPECT_EQ(run("validate" + kTopology + " --scenario " + tmp("bad.avl")), 2);
    EXPECT_NE(output().find("line 1"), std::string::npos);
}

TEST_F(Cli, VerifyReportsEveryProperty)
{
    EXPECT_EQ(run("verify" + kTopology + " --props " + data_path("properties.ctl") + " --bound 8 --format records"), 0)
        << output();
    const std::string out = output();
    EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 7);
    EXPECT_NE(out.find("\"verdict\":\"HOLDS_UP_TO_BOUND\""), std::string::npos);

    std::ofstream(tmp("af.ctl")) << "CTLSPEC ag(true implies af(true))\n";
    EXPECT_EQ(run("verify" + kTopology + " --props " + tmp("af.ctl")), 2);
    EXPECT_NE(output().find("unsupported operator 'af'"), std::string::npos) << output();
}

TEST_F(Cli, BadInputExitsTwo)
{
    EXPECT_EQ(run("simulate --steps 5 --topology " + tmp("missing.json")), 2);
    EXPECT_EQ(run("simulate --steps 5" + kTopology + " --faults " + data_path("contradictory_faults.jsonl")), 2);
    EXPECT_NE(output().find("contradictory"), std::string::npos);
    EXPECT_EQ(run("simulate" + kTopology), 2);
    EXPECT_EQ(run("simulate --steps 5" + kTopology, "CELDS_SEED=abc"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, SeededRunsAreReproducible)
{
    const std::string args = "adapt" + kTopology + " --case-base " + data_path("cases.jsonl") + " --faults " +
                             data_path("faults.jsonl") + " --steps 50 --format records";
    ASSERT_EQ(run(args + " --trace " + tmp("a.jsonl"), "CELDS_SEED=9"), 0) << output();
    const std::string records = output();
    ASSERT_EQ(run(args + " --trace " + tmp("b.jsonl") + " --seed 9"), 0);
    EXPECT_EQ(output(), records);
    EXPECT_EQ(read_file(tmp("a.jsonl")), read_file(tmp("b.jsonl")));
    EXPECT_NE(records.find("\"session_completed\""), std::string::npos);

    ASSERT_EQ(run(args + " --trace " + tmp("c.jsonl") + " --seed 10"), 0);
    EXPECT_NE(read_file(tmp("a.jsonl")), read_file(tmp("c.jsonl")));
}

TEST_F(Cli, AdaptRetainsCases)
{
    ASSERT_EQ(run("adapt" + kTopology + " --case-base " + data_path("cases.jsonl") + " --faults " +
                  data_path("faults.jsonl") + " --steps 50 --retain " + tmp("retained.jsonl")),
              0)
        << output();
    EXPECT_EQ(load_case_base(tmp("retained.jsonl")).cases().size(), 3u);
}
