#include "celds/leader_engine.hpp"

#include <algorithm>

#include "celds/errors.hpp"

namespace celds {

DiagnosisTally tally_diagnoses(const LeaderAgent& leader, std::span<const MonitorAgent> monitors)
{
    if (leader.state != LeaderState::EVALUATE)
        throw ContractViolation("tally_diagnoses: " + leader.id.name() + " is not in EVALUATE");
    DiagnosisTally t;
    for (const auto& m : monitors) {
        if (!m.diagnosis || m.assigned_node != leader.node)
            continue;
        switch (*m.diagnosis) {
        case Diagnosis::NORMAL: ++t.normal; break;
        case Diagnosis::FAILED: ++t.failed; break;
        case Diagnosis::CRITICAL: ++t.critical; break;
        }
        t.ballots.push_back(Ballot{m.id, *m.diagnosis});
    }
    return t;
}

namespace {

template <typename T>
Diagnosis comparison_tree(T failed, T critical, T normal)
{
    if (std::max(failed, critical) == failed)
        return std::max(failed, normal) == failed ? Diagnosis::FAILED : Diagnosis::NORMAL;
    return std::max(critical, normal) == critical ? Diagnosis::CRITICAL : Diagnosis::NORMAL;
}

} // namespace

Diagnosis assess_node(std::int64_t failed, std::int64_t critical, std::int64_t normal)
{
    return comparison_tree(failed, critical, normal);
}

Diagnosis assess_node_weighted(std::span<const std::pair<Diagnosis, double>> votes)
{
    double failed = 0, critical = 0, normal = 0;
    for (const auto& [d, w] : votes) {
        switch (d) {
        case Diagnosis::FAILED: failed += w; break;
        case Diagnosis::CRITICAL: critical += w; break;
        case Diagnosis::NORMAL: normal += w; break;
        }
    }
    return comparison_tree(failed, critical, normal);
}

double update_confidence(std::optional<Diagnosis> monitor_diagnosis, Diagnosis assessment, double confidence,
                         const Config& cfg)
{
    if (!monitor_diagnosis)
        return std::clamp(confidence, 0.0, 1.0);
    if (*monitor_diagnosis == assessment)
        return std::min(1.0, confidence + cfg.confidence_reward);
    return std::max(0.0, confidence - cfg.confidence_penalty);
}

LeaderAgent reset_counters(LeaderAgent leader)
{
    if (leader.state == LeaderState::EVALUATE)
        throw ContractViolation("reset_counters: " + leader.id.name() + " has not assessed its tally yet");
    const bool counted = leader.failed_diagnoses || leader.critical_diagnoses || leader.normal_diagnoses;
    if (counted && !leader.assessment)
        throw ContractViolation("reset_counters: no assessment recorded for " + leader.id.name());
    leader.failed_diagnoses = leader.critical_diagnoses = leader.normal_diagnoses = 0;
    leader.ballots.clear();
    leader.state = LeaderState::IDLE_LEADER;
    return leader;
}

} // namespace celds
