#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "celds/checker.hpp"
#include "celds/errors.hpp"
#include "celds/explore.hpp"
#include "celds/io.hpp"
#include "celds/property.hpp"
#include "celds/scenario.hpp"
#include "celds/signature.hpp"
#include "celds/simulation.hpp"

using namespace celds;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;
constexpr int kConflict = 3;

enum class Format { Text, Records };

struct Options {
    std::string topology;
    std::string faults;
    std::string scenario;
    std::string props;
    std::string case_base;
    std::string trace;
    std::string retain;
    std::int64_t steps = 0;
    std::optional<std::uint64_t> seed;
    std::optional<int> bound;
    std::string format = "text";
};

std::uint64_t default_seed()
{
    const char* env = std::getenv("CELDS_SEED");
    if (!env || !*env)
        return 0;
    std::size_t used = 0;
    const std::uint64_t seed = std::stoull(env, &used);
    if (used != std::string(env).size())
        throw std::invalid_argument("CELDS_SEED is not a number: " + std::string(env));
    return seed;
}

Format format_of(const Options& o)
{
    return o.format == "records" ? Format::Records : Format::Text;
}

void write_trace(const Simulation& sim, const std::string& path)
{
    if (path.empty())
        return;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FileError("cannot write " + path);
    sim.trace().write(out);
}

void print_conflict(const ConflictError& e, std::int64_t step)
{
    std::cerr << "conflict at step " << step << ": " << e.location().name() << " written as "
              << to_string(e.first()) << " by " << e.first_agent() << " and as " << to_string(e.second())
              << " by " << e.second_agent() << '\n';
}

void print_records(const Stores& stores, Format format)
{
    if (format == Format::Records) {
        stores.write(std::cout);
        return;
    }
    for (const auto* rows : {&stores.events(), &stores.meta()}) {
        for (const auto& r : *rows) {
            std::cout << "  step " << r.step << ' ' << to_string(r.store) << ' ' << r.kind;
            if (!r.node.empty())
                std::cout << ' ' << r.node;
            if (!r.subject.empty())
                std::cout << ' ' << r.subject;
            if (r.diagnosis)
                std::cout << ' ' << to_string(*r.diagnosis);
            if (!r.detail.empty())
                std::cout << " (" << r.detail << ')';
            std::cout << '\n';
        }
    }
}

int run_simulation(Simulation& sim, const Options& o, std::int64_t steps)
{
    for (std::int64_t i = 0; i < steps; ++i) {
        try {
            sim.step();
        } catch (const ConflictError& e) {
            print_conflict(e, sim.world().step);
            write_trace(sim, o.trace);
            return kConflict;
        }
    }
    write_trace(sim, o.trace);
    const Format format = format_of(o);
    if (format == Format::Text) {
        std::cout << "steps: " << steps << "\nfinal digest: " << world_digest(sim.world())
                  << "\nrecords: " << sim.stores().data().size() << " data, " << sim.stores().events().size()
                  << " events, " << sim.stores().meta().size() << " meta\n";
        for (const auto& s : sim.world().sessions)
            std::cout << s.id.name() << " on " << s.node.name() << ": " << to_string(s.status) << " (case "
                      << s.case_id << ", " << s.controllers.size() << " actions)\n";
        std::cout << "events:\n";
    }
    print_records(sim.stores(), format);
    return kOk;
}

int simulate(const Options& o)
{
    Topology t = load_topology(o.topology);
    FaultSchedule faults = o.faults.empty() ? FaultSchedule{} : load_faults(o.faults);
    Simulation sim(t.world, t.cfg, o.seed ? *o.seed : default_seed(), faults);
    if (t.case_base)
        sim.set_repository(load_case_base(*t.case_base));
    return run_simulation(sim, o, o.steps);
}

int adapt(const Options& o)
{
    Topology t = load_topology(o.topology);
    FaultSchedule faults = load_faults(o.faults);
    Simulation sim(t.world, t.cfg, o.seed ? *o.seed : default_seed(), faults);
    sim.set_repository(load_case_base(o.case_base));
    const int rc = run_simulation(sim, o, o.steps);
    if (rc == kOk && !o.retain.empty()) {
        std::ofstream out(o.retain, std::ios::binary);
        if (!out)
            throw FileError("cannot write " + o.retain);
        sim.repository().write(out);
    }
    return rc;
}

int validate(const Options& o)
{
    Topology t = load_topology(o.topology);
    const Scenario scenario = parse_scenario(read_file(o.scenario));
    std::optional<CaseRepository> repo;
    if (t.case_base)
        repo = load_case_base(*t.case_base);
    const ScenarioReport report = execute_scenario(scenario, t.world, t.cfg, repo ? &*repo : nullptr);

    if (format_of(o) == Format::Records) {
        for (const auto& c : report.checks)
            std::cout << ordered_json{{"line", c.line},
                                      {"location", c.location.name()},
                                      {"expected", to_string(c.expected)},
                                      {"actual", to_string(c.actual)},
                                      {"pass", c.pass}}
                             .dump()
                      << '\n';
        for (const auto& c : report.conflicts)
            std::cout << ordered_json{{"conflict", c}}.dump() << '\n';
    } else {
        std::cout << "steps: " << report.steps_run << '\n';
        for (const auto& c : report.checks)
            std::cout << "line " << c.line << ": check " << c.location.name() << " = " << to_string(c.expected)
                      << (c.pass ? " PASS" : " FAIL") << " (actual " << to_string(c.actual) << ")\n";
        for (const auto& c : report.conflicts)
            std::cout << "conflict: " << c << '\n';
    }
    if (!report.conflicts.empty())
        return kConflict;
    return report.passed() ? kOk : kFailed;
}

int verify(const Options& o)
{
    Topology t = load_topology(o.topology);
    const auto entries = parse_property_file(read_file(o.props));
    std::optional<CaseRepository> repo;
    if (t.case_base)
        repo = load_case_base(*t.case_base);

    ExploreOptions opts;
    opts.ctx.cfg = t.cfg;
    opts.ctx.repository = repo ? &*repo : nullptr;
    opts.bound = o.bound ? *o.bound : t.cfg.exploration_bound;
    const ReachabilityGraph graph = explore_parallel(t.world, opts);

    bool all = true;
    const Format format = format_of(o);
    if (format == Format::Text)
        std::cout << "explored " << graph.size() << " states, " << graph.transitions << " transitions (bound "
                  << opts.bound << ")\n";
    for (const auto& entry : entries) {
        const Verdict v = check(entry, graph, opts);
        all = all && v.holds();
        if (format == Format::Records) {
            ordered_json j = {{"property", v.property}, {"verdict", std::string(to_string(v.kind))}, {"bound", v.bound}};
            if (!v.detail.empty())
                j["detail"] = v.detail;
            if (!v.counterexample.empty())
                j["counterexample"] = describe_path(v.counterexample, t.cfg);
            std::cout << j.dump() << '\n';
        } else {
            std::cout << format_verdict(v, t.cfg) << '\n';
        }
    }
    return all ? kOk : kFailed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-cloud monitoring and adaptation middleware simulator"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--topology", o.topology, "topology JSON file")->required();
        cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"text", "records"}));
    };

    auto* sim = app.add_subcommand("simulate", "run the middleware for a number of steps");
    add_common(sim);
    sim->add_option("--steps", o.steps, "steps to run")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", o.seed, "environment seed (default: CELDS_SEED or 0)");
    sim->add_option("--faults", o.faults, "fault schedule, one JSON object per line");
    sim->add_option("--trace", o.trace, "write the step trace here");

    auto* val = app.add_subcommand("validate", "run a scenario script");
    add_common(val);
    val->add_option("--scenario", o.scenario, "scenario file")->required();

    auto* ver = app.add_subcommand("verify", "check properties on the bounded state graph");
    add_common(ver);
    ver->add_option("--props", o.props, "property file")->required();
    ver->add_option("--bound", o.bound, "exploration bound")->check(CLI::NonNegativeNumber);

    auto* ad = app.add_subcommand("adapt", "run the full monitoring and adaptation loop");
    add_common(ad);
    ad->add_option("--case-base", o.case_base, "case base, one JSON case per line")->required();
    ad->add_option("--faults", o.faults, "fault schedule, one JSON object per line")->required();
    ad->add_option("--trace", o.trace, "write the step trace here");
    ad->add_option("--steps", o.steps, "steps to run")->default_val(40)->check(CLI::NonNegativeNumber);
    ad->add_option("--seed", o.seed, "environment seed (default: CELDS_SEED or 0)");
    ad->add_option("--retain", o.retain, "write the case base after retention here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kBadInput;
    }

    try {
        if (*sim)
            return simulate(o);
        if (*val)
            return validate(o);
        if (*ver)
            return verify(o);
        return adapt(o);
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const FaultScheduleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: bad number: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ConflictError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConflict;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
}
