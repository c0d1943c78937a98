#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "celds/domain.hpp"
#include "celds/stores.hpp"

namespace celds {

struct DiagnosisTally {
    std::int64_t failed = 0;
    std::int64_t critical = 0;
    std::int64_t normal = 0;
    std::vector<Ballot> ballots;

    std::int64_t total() const { return failed + critical + normal; }
};

/// Counts the defined diagnoses of `monitors`; undefined ones abstain.
/// Throws ContractViolation unless the leader is in EVALUATE.
DiagnosisTally tally_diagnoses(const LeaderAgent& leader, std::span<const MonitorAgent> monitors);

/// Majority with pessimistic tie-breaking: FAILED beats CRITICAL beats NORMAL on ties.
/// With all counters zero the result is FAILED.
Diagnosis assess_node(std::int64_t failed, std::int64_t critical, std::int64_t normal);

/// Same comparison tree over confidence-weighted sums.
Diagnosis assess_node_weighted(std::span<const std::pair<Diagnosis, double>> votes);

/// Reward agreement with the collective assessment, penalise disagreement, leave abstentions alone.
double update_confidence(std::optional<Diagnosis> monitor_diagnosis, Diagnosis assessment, double confidence,
                         const Config& cfg);

/// Back to IDLE_LEADER with zeroed counters. Throws ContractViolation while a tally is unassessed.
LeaderAgent reset_counters(LeaderAgent leader);

} // namespace celds
