#pragma once

#include <istream>
#include <optional>
#include <string>

#include "celds/adaptation.hpp"
#include "celds/domain.hpp"
#include "celds/environment.hpp"
#include "json.hpp"

namespace celds {

nlohmann::ordered_json config_to_json(const Config& cfg);

/// Overrides the fields present in `j`. Throws ParseError on unknown keys, wrong types or out-of-range values.
Config config_from_json(const nlohmann::ordered_json& j, Config base = {});

struct Topology {
    WorldState world;
    Config cfg;
    std::optional<std::string> case_base; // path, resolved against the topology file's directory
};

/// Throws ParseError on malformed documents.
Topology parse_topology(const std::string& text);

/// Throws FileError when the file cannot be read.
std::string read_file(const std::string& path);
Topology load_topology(const std::string& path);

/// One fault per line. Throws ParseError for malformed lines and FaultScheduleError for contradictions.
FaultSchedule parse_faults(std::istream& in);
FaultSchedule load_faults(const std::string& path);

CaseRepository load_case_base(const std::string& path);

} // namespace celds
