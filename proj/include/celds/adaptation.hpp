#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "celds/domain.hpp"
#include "celds/stores.hpp"
#include "celds/update_set.hpp"

namespace celds {

//
// Case-based reasoning
//

/// Weighted feature agreement in [0,1]. Empty `weights` means uniform weights.
/// Throws ContractViolation when the descriptors declare different features or ranges.
double similarity(const ProblemDescriptor& a, const ProblemDescriptor& b,
                  const std::map<std::string, double>& weights = {});

class CaseRepository {
public:
    CaseRepository() = default;
    explicit CaseRepository(std::vector<AdaptationCase> cases);

    /// Throws ContractViolation on a duplicate id or an invalid problem descriptor.
    void add(AdaptationCase c);

    const std::vector<AdaptationCase>& cases() const { return cases_; }
    const AdaptationCase* find(std::int64_t id) const;
    bool empty() const { return cases_.empty(); }

    /// Appends an outcome to the case with this problem and solution, or records a new case. Returns its id.
    std::int64_t retain(const ProblemDescriptor& problem, const WorkflowSchema& schema, bool succeeded,
                        std::int64_t step);

    /// One case per line. Throws ParseError naming the line.
    static CaseRepository read(std::istream& in);
    void write(std::ostream& out) const;

private:
    std::vector<AdaptationCase> cases_;
};

struct CaseMatch {
    AdaptationCase adaptation_case;
    double similarity = 0;
};

/// Best case at or above the similarity threshold; nullopt when nothing applies.
/// Cases whose features differ from `problem` are not comparable and are skipped.
std::optional<CaseMatch> retrieve_case(const ProblemDescriptor& problem, const CaseRepository& repo,
                                       const Config& cfg);

std::int64_t retain_case(const ProblemDescriptor& problem, const WorkflowSchema& schema, bool succeeded,
                         CaseRepository& repo, std::int64_t step = 0);

/// true iff the first assessment after the session completed is NORMAL; nullopt means none arrived in time.
bool evaluate_adaptation(NodeId node, std::optional<Diagnosis> post_assessment);

/// Outcome of an action in scripted mode: parameter `outcome` = "failure" fails, anything else succeeds.
bool scripted_outcome(const ActionSpec& action);

//
// Enactment
//

/// Controllers `first`, `first+1`, ... one per action in schema order. Dependency roots start with the
/// session-start signal pending. Throws InstantiationError on an empty schema.
AdaptationSession instantiate_solution(const WorkflowSchema& schema, SessionId id, NodeId node,
                                       ControllerId first, std::int64_t case_id = 0, std::int64_t step = 0);

/// Whether a running session already declares part of the schema's area of inference.
bool areas_overlap(const WorldState& world, const WorkflowSchema& schema);

/// Acknowledges a received notification. No updates unless `c` is in NOTIFICATION_RECEIVED.
UpdateSet acknowledge_notification(const ControllerAgent& c, std::optional<ControllerId> broadcaster,
                                   const AdaptationSession& session);

/// Delivers `kind` to every other controller and waits for their acknowledgements.
UpdateSet broadcast_notification(const ControllerAgent& c, NotificationKind kind, const AdaptationSession& session);

struct ControllerStep {
    UpdateSet updates;
    std::vector<StoreRecord> records;
};

/// Acknowledgement wait and action execution. Reads `action_outcome` from the world when running.
ControllerStep trigger_action(const ControllerAgent& c, const AdaptationSession& session, const WorldState& world,
                              const Config& cfg, std::int64_t step);

/// The full controller rule for one step.
ControllerStep step_controller(const ControllerAgent& c, const AdaptationSession& session, const WorldState& world,
                               const Config& cfg, std::int64_t step);

/// Session bookkeeping: COMPLETED once every controller is ready for removal.
ControllerStep step_session(const AdaptationSession& session, std::int64_t step);

} // namespace celds
