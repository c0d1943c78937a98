#include "celds/update_set.hpp"

namespace celds {

ConflictError::ConflictError(Location location, Value first, std::string first_agent, Value second,
                             std::string second_agent)
    : std::runtime_error("update conflict on " + location.name() + ": " + to_string(first) +
                         (first_agent.empty() ? "" : " (" + first_agent + ")") + " vs " + to_string(second) +
                         (second_agent.empty() ? "" : " (" + second_agent + ")")),
      location_(std::move(location)), first_(std::move(first)), second_(std::move(second)),
      first_agent_(std::move(first_agent)), second_agent_(std::move(second_agent))
{
}

void UpdateSet::add(Location location, Value value, std::string agent)
{
    entries_.push_back(Update{std::move(location), std::move(value), MergePolicy::Exclusive, std::move(agent)});
}

void UpdateSet::add_additive(Location location, std::int64_t delta, std::string agent)
{
    entries_.push_back(Update{std::move(location), Value{delta}, MergePolicy::Additive, std::move(agent)});
}

void UpdateSet::add(Update update) { entries_.push_back(std::move(update)); }

void UpdateSet::extend(AdaptationSession session) { created_.push_back(std::move(session)); }

void UpdateSet::append(const UpdateSet& other)
{
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
    created_.insert(created_.end(), other.created_.begin(), other.created_.end());
}

std::map<Location, MergedUpdate> UpdateSet::merge() const
{
    std::map<Location, MergedUpdate> merged;
    std::map<Location, const Update*> first_writer;
    for (const auto& u : entries_) {
        auto [it, fresh] = merged.try_emplace(u.location, MergedUpdate{u.policy, u.value});
        if (fresh) {
            first_writer[u.location] = &u;
            continue;
        }
        const Update& prior = *first_writer[u.location];
        if (it->second.policy != u.policy)
            throw ConflictError(u.location, prior.value, prior.agent, u.value, u.agent);
        if (u.policy == MergePolicy::Additive) {
            it->second.value = std::get<std::int64_t>(it->second.value) + std::get<std::int64_t>(u.value);
        } else if (!(it->second.value == u.value)) {
            throw ConflictError(u.location, it->second.value, prior.agent, u.value, u.agent);
        }
    }

    std::map<std::uint32_t, const AdaptationSession*> sessions;
    for (const auto& s : created_) {
        auto [it, fresh] = sessions.try_emplace(s.id.index, &s);
        if (!fresh && !(*it->second == s))
            throw ConflictError(Location{"extend", s.id.name()}, Symbol{"session"}, "", Symbol{"session"}, "");
    }
    return merged;
}

} // namespace celds
