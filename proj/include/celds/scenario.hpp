#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "celds/adaptation.hpp"
#include "celds/domain.hpp"
#include "celds/kernel.hpp"
#include "celds/stores.hpp"
#include "celds/value.hpp"

namespace celds {

struct SetCommand {
    Location location;
    Value value;
    int line = 0;
};

struct StepCommand {
    int line = 0;
};

struct CheckCommand {
    Location location;
    Value expected;
    int line = 0;
};

using Command = std::variant<SetCommand, StepCommand, CheckCommand>;

struct Scenario {
    std::vector<Command> commands;
};

/// `set <loc> := <value>;` | `step` | `check <loc> = <value>;` with `//` comments.
/// Throws ParseError naming the line and the offending token.
Scenario parse_scenario(std::string_view text);

/// Canonical text of one command, parseable again.
std::string to_string(const Command& command);

struct CheckResult {
    int line = 0;
    Location location;
    Value expected;
    Value actual;
    bool pass = false;
};

struct ScenarioReport {
    std::vector<CheckResult> checks;
    int steps_run = 0;
    std::vector<std::string> conflicts;
    Stores stores;

    bool passed() const;
};

/// Runs the commands in order; failed checks are collected, not fatal. A step that conflicts is
/// reported and leaves the world as it was. Throws ScenarioError for a set on a controlled or derived location.
ScenarioReport execute_scenario(const Scenario& scenario, WorldState world, const Config& cfg,
                                const CaseRepository* repository = nullptr);

} // namespace celds
