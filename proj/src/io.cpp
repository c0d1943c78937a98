#include "celds/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "celds/errors.hpp"

namespace celds {

using nlohmann::ordered_json;

nlohmann::ordered_json config_to_json(const Config& cfg)
{
    return ordered_json{
        {"redundancy_k", cfg.redundancy_k},
        {"max_latency", cfg.max_latency},
        {"min_confidence_degree", cfg.min_confidence_degree},
        {"confidence_reward", cfg.confidence_reward},
        {"confidence_penalty", cfg.confidence_penalty},
        {"similarity_threshold", cfg.similarity_threshold},
        {"critical_cpu", cfg.critical_cpu},
        {"critical_memory", cfg.critical_memory},
        {"critical_storage", cfg.critical_storage},
        {"exploration_bound", cfg.exploration_bound},
        {"weighted_diagnosis", cfg.weighted_diagnosis},
        {"heartbeat_wait_steps", cfg.heartbeat_wait_steps},
        {"ack_wait_steps", cfg.ack_wait_steps},
    };
}

Config config_from_json(const nlohmann::ordered_json& j, Config cfg)
{
    if (!j.is_object())
        throw ParseError("config must be an object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "redundancy_k") cfg.redundancy_k = v.get<int>();
            else if (key == "max_latency") cfg.max_latency = v.get<std::int64_t>();
            else if (key == "min_confidence_degree") cfg.min_confidence_degree = v.get<double>();
            else if (key == "confidence_reward") cfg.confidence_reward = v.get<double>();
            else if (key == "confidence_penalty") cfg.confidence_penalty = v.get<double>();
            else if (key == "similarity_threshold") cfg.similarity_threshold = v.get<double>();
            else if (key == "critical_cpu") cfg.critical_cpu = v.get<double>();
            else if (key == "critical_memory") cfg.critical_memory = v.get<double>();
            else if (key == "critical_storage") cfg.critical_storage = v.get<double>();
            else if (key == "exploration_bound") cfg.exploration_bound = v.get<int>();
            else if (key == "weighted_diagnosis") cfg.weighted_diagnosis = v.get<bool>();
            else if (key == "heartbeat_wait_steps") cfg.heartbeat_wait_steps = v.get<int>();
            else if (key == "ack_wait_steps") cfg.ack_wait_steps = v.get<int>();
            else throw ParseError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (auto v = cfg.violations(); !v.empty())
        throw ParseError("config: " + v.front());
    return cfg;
}

namespace {

ProblemDescriptor profile_from_json(const ordered_json& j)
{
    ProblemDescriptor p;
    for (const auto& [name, f] : j.items()) {
        if (f.is_string())
            p.features[name] = CategoricalFeature{f.get<std::string>()};
        else
            p.features[name] = NumericFeature{f.at("value").get<double>(), f.at("min").get<double>(),
                                              f.at("max").get<double>()};
    }
    if (auto v = p.violations(); !v.empty())
        throw ParseError("profile: " + v.front());
    return p;
}

} // namespace

Topology parse_topology(const std::string& text)
{
    Topology t;
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("topology: ") + e.what());
    }
    if (!j.is_object())
        throw ParseError("topology must be an object");
    try {
        for (const auto& [key, v] : j.items())
            if (key != "nodes" && key != "monitor_pool" && key != "redundancy_k" && key != "initial_confidence" &&
                key != "config" && key != "case_base")
                throw ParseError("unknown topology key '" + key + "'");

        if (j.contains("config"))
            t.cfg = config_from_json(j.at("config"));
        if (j.contains("redundancy_k"))
            t.cfg = config_from_json(ordered_json{{"redundancy_k", j.at("redundancy_k")}}, t.cfg);

        const auto& nodes = j.at("nodes");
        const int pool = j.value("monitor_pool", t.cfg.redundancy_k);
        if (pool < 0)
            throw ParseError("monitor_pool must be >= 0");
        if (nodes.is_number_integer()) {
            t.world = make_world(nodes.get<int>(), pool);
        } else {
            t.world = make_world(0, pool);
            for (const auto& n : nodes) {
                auto id = NodeId::parse(n.at("id").get<std::string>());
                if (!id)
                    throw ParseError("bad node id " + n.at("id").dump());
                if (t.world.find(*id))
                    throw ParseError("duplicate node " + id->name());
                NodeProfile profile{*id, {}};
                if (n.contains("profile"))
                    profile.characteristics = profile_from_json(n.at("profile"));
                t.world.nodes.push_back(std::move(profile));
            }
            std::sort(t.world.nodes.begin(), t.world.nodes.end(),
                      [](const NodeProfile& a, const NodeProfile& b) { return a.id < b.id; });
        }

        if (j.contains("initial_confidence")) {
            const auto& c = j.at("initial_confidence");
            if (c.is_number()) {
                for (auto& m : t.world.monitors)
                    m.confidence_degree = c.get<double>();
            } else {
                for (const auto& [name, value] : c.items()) {
                    auto id = MonitorId::parse(name);
                    MonitorAgent* m = id ? t.world.find(*id) : nullptr;
                    if (!m)
                        throw ParseError("initial_confidence names unknown monitor " + name);
                    m->confidence_degree = value.get<double>();
                }
            }
        }
        if (j.contains("case_base"))
            t.case_base = j.at("case_base").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("topology: ") + e.what());
    }
    for (const auto& v : validate_world(t.world))
        throw ParseError("topology: " + v.subject + ": " + v.message);
    return t;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FileError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Topology load_topology(const std::string& path)
{
    Topology t = parse_topology(read_file(path));
    if (t.case_base) {
        std::filesystem::path p(*t.case_base);
        if (p.is_relative())
            p = std::filesystem::path(path).parent_path() / p;
        t.case_base = p.string();
    }
    return t;
}

FaultSchedule parse_faults(std::istream& in)
{
    FaultSchedule schedule;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        FaultInjection f;
        try {
            const auto j = ordered_json::parse(line);
            f.target = j.at("target").get<std::string>();
            const auto kind = parse_fault_kind(j.at("kind").get<std::string>());
            if (!kind)
                throw ParseError("unknown fault kind " + j.at("kind").dump(), lineno);
            f.kind = *kind;
            f.value = j.value("value", 0.0);
            f.metric = j.value("metric", std::string{});
            f.from_step = j.at("from_step").get<std::int64_t>();
            f.duration = j.value("duration", std::int64_t{1});
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(e.what(), lineno);
        }
        try {
            schedule.inject(std::move(f));
        } catch (const FaultScheduleError& e) {
            throw FaultScheduleError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return schedule;
}

FaultSchedule load_faults(const std::string& path)
{
    std::istringstream in(read_file(path));
    return parse_faults(in);
}

CaseRepository load_case_base(const std::string& path)
{
    std::istringstream in(read_file(path));
    return CaseRepository::read(in);
}

} // namespace celds
