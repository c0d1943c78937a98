#include "celds/scenario.hpp"

#include <cstdlib>

#include "celds/errors.hpp"
#include "celds/signature.hpp"
#include "lexer.hpp"

namespace celds {

namespace {

using detail::TokenKind;
using detail::TokenStream;

Location parse_location(TokenStream& ts)
{
    const auto& fn = ts.expect(TokenKind::Ident, "a function name");
    if (!find_function(fn.text))
        throw ParseError("unknown function '" + fn.text + "'", fn.line);
    ts.expect("(");
    const std::string arg = ts.expect(TokenKind::Ident, "an argument").text;
    ts.expect(")");
    return Location{fn.text, arg};
}

Value parse_number(TokenStream& ts, bool negative)
{
    const auto& t = ts.expect(TokenKind::Number, "a number");
    if (t.text.find('.') != std::string::npos) {
        const double d = std::strtod(t.text.c_str(), nullptr);
        return negative ? -d : d;
    }
    const auto i = static_cast<std::int64_t>(std::strtoll(t.text.c_str(), nullptr, 10));
    return negative ? -i : i;
}

void set_metric(NodeMetrics& m, const std::string& name, double v, int line)
{
    if (name == "Latency") m.latency = static_cast<std::int64_t>(v);
    else if (name == "CPU Usage") m.cpu_usage = v;
    else if (name == "Storage Usage") m.storage_usage = v;
    else if (name == "Memory Usage") m.memory_usage = v;
    else if (name == "Bandwidth") m.bandwidth = v;
    else throw ParseError("unknown measurement \"" + name + "\"", line);
}

Value parse_value(TokenStream& ts)
{
    const auto& t = ts.peek();
    if (t.kind == TokenKind::Number)
        return parse_number(ts, false);
    if (ts.accept("-"))
        return parse_number(ts, true);
    if (ts.accept("[")) {
        if (ts.peek().text == "(") {
            NodeMetrics m;
            do {
                ts.expect("(");
                const auto& name = ts.expect(TokenKind::String, "a measurement name");
                ts.expect(",");
                const Value v = parse_number(ts, ts.accept("-"));
                set_metric(m, name.text, *as_number(v), name.line);
                ts.expect(")");
            } while (ts.accept(","));
            ts.expect("]");
            return m;
        }
        IdList items;
        if (!ts.accept("]")) {
            do
                items.push_back(ts.expect(TokenKind::Ident, "a list element").text);
            while (ts.accept(","));
            ts.expect("]");
        }
        return items;
    }
    if (t.kind == TokenKind::Ident) {
        const std::string word = ts.next().text;
        if (word == "true") return true;
        if (word == "false") return false;
        if (word == "undef") return Undef{};
        return Symbol{word};
    }
    ts.fail("expected a value");
}

} // namespace

Scenario parse_scenario(std::string_view text)
{
    TokenStream ts(detail::tokenize(text));
    Scenario sc;
    while (!ts.at_end()) {
        const int line = ts.peek().line;
        if (ts.accept("set")) {
            SetCommand c{parse_location(ts), {}, line};
            ts.expect(":=");
            c.value = parse_value(ts);
            ts.expect(";");
            sc.commands.emplace_back(std::move(c));
        } else if (ts.accept("step")) {
            ts.accept(";");
            sc.commands.emplace_back(StepCommand{line});
        } else if (ts.accept("check")) {
            CheckCommand c{parse_location(ts), {}, line};
            ts.expect("=");
            c.expected = parse_value(ts);
            ts.expect(";");
            sc.commands.emplace_back(std::move(c));
        } else {
            ts.fail("expected set, step or check");
        }
    }
    return sc;
}

std::string to_string(const Command& command)
{
    if (const auto* s = std::get_if<SetCommand>(&command))
        return "set " + s->location.name() + " := " + to_string(s->value) + ";";
    if (const auto* c = std::get_if<CheckCommand>(&command))
        return "check " + c->location.name() + " = " + to_string(c->expected) + ";";
    return "step";
}

bool ScenarioReport::passed() const
{
    if (!conflicts.empty())
        return false;
    for (const auto& c : checks)
        if (!c.pass)
            return false;
    return true;
}

ScenarioReport execute_scenario(const Scenario& scenario, WorldState world, const Config& cfg,
                                const CaseRepository* repository)
{
    ScenarioReport report;
    StepContext ctx;
    ctx.middleware.cfg = cfg;
    ctx.middleware.repository = repository;
    ctx.middleware.stores = &report.stores;

    for (const auto& command : scenario.commands) {
        if (const auto* s = std::get_if<SetCommand>(&command)) {
            const FunctionInfo* f = find_function(s->location.function);
            if (f->kind == FunctionKind::Controlled || f->kind == FunctionKind::Derived)
                throw ScenarioError("line " + std::to_string(s->line) + ": " + s->location.name() + " is " +
                                    std::string(to_string(f->kind)) + " and cannot be set by a scenario");
            try {
                write_location(world, s->location, s->value);
            } catch (const ContractViolation& e) {
                throw ScenarioError("line " + std::to_string(s->line) + ": " + e.what());
            }
        } else if (std::holds_alternative<StepCommand>(command)) {
            try {
                StepResult r = run_step(world, ctx);
                world = std::move(r.world);
                report.stores.append(r.records);
            } catch (const ConflictError& e) {
                report.conflicts.push_back(e.what());
            }
            ++report.steps_run;
        } else {
            const auto& c = std::get<CheckCommand>(command);
            CheckResult r{c.line, c.location, c.expected, {}, false};
            try {
                r.actual = read_location(world, c.location, cfg);
            } catch (const ContractViolation& e) {
                throw ScenarioError("line " + std::to_string(c.line) + ": " + e.what());
            }
            r.pass = values_equal(r.actual, r.expected);
            report.checks.push_back(std::move(r));
        }
    }
    return report;
}

} // namespace celds
