#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "celds/explore.hpp"
#include "celds/property.hpp"

namespace celds {

enum class VerdictKind { HOLDS_UP_TO_BOUND, VIOLATED, EF_TARGET_NOT_FOUND_UP_TO_BOUND };

std::string_view to_string(VerdictKind k);

struct Verdict {
    std::string property;
    VerdictKind kind = VerdictKind::HOLDS_UP_TO_BOUND;
    int bound = 0;
    std::vector<WorldState> counterexample; // initial state first; empty unless VIOLATED
    std::string detail;                     // failing conjunct, when not HOLDS

    bool holds() const { return kind == VerdictKind::HOLDS_UP_TO_BOUND; }
};

/// Members of every domain over all explored states, numerically sorted.
std::map<Domain, std::vector<std::string>> graph_domains(const ReachabilityGraph& graph);

/// Checks one expanded formula. `opts` supplies the transition relation used past the bound
/// (successors of boundary states for AX/EX, witness search for EF).
Verdict check(const Formula& formula, const ReachabilityGraph& graph, const ExploreOptions& opts);

/// Expands every CTLSPEC of the entry over the graph's domains; the entry holds iff all conjuncts hold.
/// The first failing conjunct decides the verdict.
Verdict check(const PropertyEntry& entry, const ReachabilityGraph& graph, const ExploreOptions& opts);

/// Locations whose value changes between consecutive states of `path`, one line per state.
std::vector<std::string> describe_path(const std::vector<WorldState>& path, const Config& cfg);

/// `property: VERDICT (bound N)` followed by the counterexample, if any.
std::string format_verdict(const Verdict& v, const Config& cfg);

} // namespace celds
