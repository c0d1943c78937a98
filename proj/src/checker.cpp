#include "celds/checker.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "celds/signature.hpp"

namespace celds {

std::string_view to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::HOLDS_UP_TO_BOUND: return "HOLDS_UP_TO_BOUND";
    case VerdictKind::VIOLATED: return "VIOLATED";
    case VerdictKind::EF_TARGET_NOT_FOUND_UP_TO_BOUND: return "EF_TARGET_NOT_FOUND_UP_TO_BOUND";
    }
    return "?";
}

namespace {

std::pair<std::uint64_t, std::string> member_order(const std::string& name)
{
    const auto us = name.rfind('_');
    std::uint64_t n = 0;
    if (us != std::string::npos)
        for (std::size_t i = us + 1; i < name.size() && std::isdigit(static_cast<unsigned char>(name[i])); ++i)
            n = n * 10 + static_cast<std::uint64_t>(name[i] - '0');
    return {n, name};
}

constexpr Domain kDomains[] = {Domain::Self,   Domain::Node,       Domain::Monitor, Domain::Heartbeat,
                               Domain::Leader, Domain::Controller, Domain::Action,  Domain::Session};

class Search {
public:
    Search(const ReachabilityGraph& g, const ExploreOptions& opts) : g_(g), opts_(opts)
    {
        for (std::size_t i = 0; i < g.size(); ++i)
            index_.emplace(g.keys[i], i);
    }

    /// Successors of graph state `s`, computed when `s` lies on the boundary.
    std::vector<WorldState> next_of(std::size_t s) const
    {
        if (g_.expanded[s]) {
            std::vector<WorldState> out;
            for (auto t : g_.succ[s])
                out.push_back(g_.states[t]);
            return out;
        }
        return successors(g_.states[s], opts_.ctx, opts_.choices);
    }

    /// Whether a q-state is reachable from `w` in at most `budget` steps.
    bool reach(const WorldState& w, const StateKey& key, int budget, const Expr& q)
    {
        if (found_.count(key))
            return true;
        if (holds(q, w, opts_.ctx.cfg)) {
            found_.insert(key);
            return true;
        }
        if (budget == 0)
            return false;
        if (auto it = failed_.find(key); it != failed_.end() && it->second >= budget)
            return false;

        auto gi = index_.find(key);
        if (gi != index_.end() && g_.expanded[gi->second]) {
            for (auto t : g_.succ[gi->second])
                if (reach(g_.states[t], g_.keys[t], budget - 1, q)) {
                    found_.insert(key);
                    return true;
                }
        } else {
            for (const auto& n : successors(w, opts_.ctx, opts_.choices))
                if (reach(n, state_key(n), budget - 1, q)) {
                    found_.insert(key);
                    return true;
                }
        }
        auto& f = failed_[key];
        f = std::max(f, budget);
        return false;
    }

private:
    const ReachabilityGraph& g_;
    const ExploreOptions& opts_;
    std::unordered_map<StateKey, std::size_t, StateKeyHash> index_;
    std::unordered_map<StateKey, int, StateKeyHash> failed_;
    std::unordered_set<StateKey, StateKeyHash> found_;
};

std::vector<WorldState> path_states(const ReachabilityGraph& g, std::size_t s)
{
    std::vector<WorldState> out;
    for (auto i : g.path_to(s))
        out.push_back(g.states[i]);
    return out;
}

Verdict check_ef(const Formula& f, const ReachabilityGraph& g, const ExploreOptions& opts, Verdict v)
{
    const Config& cfg = opts.ctx.cfg;
    const std::size_t n = g.size();
    std::vector<bool> good(n, false);
    std::vector<std::vector<std::size_t>> pred(n);
    std::vector<std::size_t> work;
    for (std::size_t s = 0; s < n; ++s) {
        for (auto t : g.succ[s])
            pred[t].push_back(s);
        if (holds(f.q, g.states[s], cfg)) {
            good[s] = true;
            work.push_back(s);
        }
    }
    while (!work.empty()) {
        const std::size_t t = work.back();
        work.pop_back();
        for (auto s : pred[t])
            if (!good[s]) {
                good[s] = true;
                work.push_back(s);
            }
    }

    Search search(g, opts);
    for (std::size_t s = 0; s < n; ++s) {
        if (good[s] || !holds(f.p, g.states[s], cfg))
            continue;
        if (search.reach(g.states[s], g.keys[s], g.bound, f.q))
            continue;
        v.kind = VerdictKind::EF_TARGET_NOT_FOUND_UP_TO_BOUND;
        v.detail = f.text + ": no witness within " + std::to_string(g.bound) + " steps of a state at depth " +
                   std::to_string(g.depth[s]) + " (" + world_digest(g.states[s]) + ")";
        return v;
    }
    return v;
}

} // namespace

std::map<Domain, std::vector<std::string>> graph_domains(const ReachabilityGraph& graph)
{
    std::map<Domain, std::vector<std::string>> out;
    for (Domain d : kDomains) {
        std::set<std::pair<std::uint64_t, std::string>> seen;
        for (const auto& w : graph.states)
            for (auto& m : domain_members(w, d))
                seen.insert(member_order(m));
        auto& list = out[d];
        for (auto& [num, name] : seen)
            list.push_back(name);
    }
    return out;
}

Verdict check(const Formula& f, const ReachabilityGraph& g, const ExploreOptions& opts)
{
    const Config& cfg = opts.ctx.cfg;
    Verdict v;
    v.property = f.text;
    v.bound = g.bound;

    if (f.form == PropertyForm::AG_EF)
        return check_ef(f, g, opts, v);

    Search search(g, opts);
    for (std::size_t s = 0; s < g.size(); ++s) {
        const WorldState& w = g.states[s];
        if (f.form == PropertyForm::AG) {
            if (holds(f.p, w, cfg))
                continue;
            v.kind = VerdictKind::VIOLATED;
            v.counterexample = path_states(g, s);
            v.detail = f.text + ": invariant false in the last state";
            return v;
        }
        if (!holds(f.p, w, cfg))
            continue;
        const std::vector<WorldState> next = search.next_of(s);
        if (f.form == PropertyForm::AG_AX) {
            for (const auto& t : next) {
                if (holds(f.q, t, cfg))
                    continue;
                v.kind = VerdictKind::VIOLATED;
                v.counterexample = path_states(g, s);
                v.counterexample.push_back(t);
                v.detail = f.text + ": a successor of the next-to-last state falsifies the consequent";
                return v;
            }
        } else {
            const bool some = std::any_of(next.begin(), next.end(), [&](const WorldState& t) { return holds(f.q, t, cfg); });
            if (!some) {
                v.kind = VerdictKind::VIOLATED;
                v.counterexample = path_states(g, s);
                v.detail = f.text + ": no successor of the last state satisfies the consequent";
                return v;
            }
        }
    }
    return v;
}

Verdict check(const PropertyEntry& entry, const ReachabilityGraph& g, const ExploreOptions& opts)
{
    const auto domains = graph_domains(g);
    Verdict out;
    out.property = entry.name;
    out.bound = g.bound;
    for (const auto& spec : entry.specs) {
        for (const auto& f : expand_over(spec, domains)) {
            Verdict v = check(f, g, opts);
            if (!v.holds()) {
                v.property = entry.name;
                return v;
            }
        }
    }
    return out;
}

std::vector<std::string> describe_path(const std::vector<WorldState>& path, const Config& cfg)
{
    std::vector<std::string> out;
    std::map<std::string, std::string> prev;
    for (std::size_t i = 0; i < path.size(); ++i) {
        std::map<std::string, std::string> cur;
        for (const auto& loc : enumerate_locations(path[i]))
            cur[loc.name()] = to_string(read_location(path[i], loc, cfg));
        std::ostringstream line;
        line << "state " << i << " [" << world_digest(path[i]) << "]";
        if (i > 0) {
            const char* sep = ": ";
            for (const auto& [name, value] : cur) {
                auto it = prev.find(name);
                if (it != prev.end() && it->second == value)
                    continue;
                line << sep << name << " = " << value;
                sep = ", ";
            }
        }
        out.push_back(line.str());
        prev = std::move(cur);
    }
    return out;
}

std::string format_verdict(const Verdict& v, const Config& cfg)
{
    std::ostringstream out;
    out << v.property << ": " << to_string(v.kind) << " (bound " << v.bound << ")";
    if (!v.detail.empty())
        out << "\n  " << v.detail;
    for (const auto& line : describe_path(v.counterexample, cfg))
        out << "\n  " << line;
    return out.str();
}

} // namespace celds
