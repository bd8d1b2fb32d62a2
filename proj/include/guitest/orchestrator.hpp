#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guitest/environment.hpp"
#include "guitest/route.hpp"
#include "guitest/tasks.hpp"

namespace guitest {

enum class SubtaskKind { navigation, test_intent };
enum class IntentPattern { alternative_paths, boundary_conditions, state_validation };

std::string to_string(SubtaskKind k);
std::string to_string(IntentPattern p);
SubtaskKind subtask_kind_from(const std::string& s);
IntentPattern intent_pattern_from(const std::string& s);

struct Subtask {
    std::string id;
    SubtaskKind kind = SubtaskKind::navigation;
    std::string instruction;
    GoalPredicate goal;
    std::optional<IntentPattern> intent_pattern;  // present iff kind == test_intent
    // Routing hints for scripted backends: edges this subtask must not use
    // (alternative-path probes, routing around known-defective edges) and a
    // direct probe action for state-validation / boundary intents.
    std::set<TransitionKey> avoid;
    std::optional<RouteStep> intent_action;

    void validate() const;
};

enum class VerdictValue { DONE, FAIL, CONTINUE };

std::string to_string(VerdictValue v);
VerdictValue verdict_value_from(const std::string& s);

struct MonitorVerdict {
    VerdictValue value = VerdictValue::CONTINUE;
    std::string note;
};

enum class AttributionValue { AGENT_ERROR, GUI_BUG };

std::string to_string(AttributionValue v);
AttributionValue attribution_value_from(const std::string& s);

struct Attribution {
    AttributionValue value = AttributionValue::AGENT_ERROR;
    std::optional<std::string> suggestion;  // corrective guidance
    struct Evidence {
        std::vector<int> step_indices;
        std::optional<TransitionKey> edge;  // defective edge, for replanning
    } evidence;
};

struct StepRecord {
    int step_index = 0;
    std::string subtask_id;
    Observation pre;
    Action action;
    Marker marker;
    Observation post;
    std::optional<MonitorVerdict> verdict;
    std::optional<Attribution> attribution;
    bool declared = false;
};

using Trajectory = std::vector<StepRecord>;

struct HistoryEntry {
    Subtask subtask;
    VerdictValue outcome = VerdictValue::DONE;
};

// --- Backend interfaces (the four roles plus the baseline single agent) ---

class PlannerBackend {
  public:
    virtual ~PlannerBackend() = default;
    virtual std::vector<Subtask> plan(const Observation& obs, const std::vector<HistoryEntry>& history,
                                      const std::optional<Attribution>& reflection) = 0;
};

class ExecutorBackend {
  public:
    virtual ~ExecutorBackend() = default;
    virtual Action act(const Subtask& subtask, const Observation& obs, const Trajectory& tau) = 0;
};

class MonitorBackend {
  public:
    virtual ~MonitorBackend() = default;
    virtual MonitorVerdict check(const Subtask& subtask, const Observation& pre, const Action& action,
                                 const Observation& post) = 0;
};

class ReflectorBackend {
  public:
    virtual ~ReflectorBackend() = default;
    virtual Attribution reflect(const Subtask& subtask, const Trajectory& tau, const Observation& obs) = 0;
};

class BaselineBackend {
  public:
    virtual ~BaselineBackend() = default;
    virtual Action navigate(const TaskSpec& task, const Observation& obs, const Trajectory& history) = 0;
};

enum class AgentMode { orchestrated, baseline };

struct BackendSet {
    AgentMode mode = AgentMode::orchestrated;
    std::shared_ptr<PlannerBackend> planner;
    std::shared_ptr<ExecutorBackend> executor;
    std::shared_ptr<MonitorBackend> monitor;
    std::shared_ptr<ReflectorBackend> reflector;
    std::shared_ptr<BaselineBackend> baseline;  // used only in baseline mode
};

// --- The flag machine ---

struct LoopState {
    bool replan = true;
    bool next_subtask = false;
    bool check_status = false;
    bool reflect = false;
    std::vector<Subtask> plan;
    size_t cursor = 0;
    // Bumped on every replan; stable serial means "same plan object".
    std::uint64_t plan_serial = 0;
    std::optional<Subtask> current;
    Trajectory tau;  // current-subtask step records
    std::vector<HistoryEntry> history;
    std::optional<Attribution> reflection;
    int max_steps = 6;
};

struct Declaration {
    int step_index = 0;
    std::string source;  // "attribution" or "answer"
};

struct RunRecord {
    std::string task_id;
    int run_index = 0;
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    std::vector<Declaration> declarations;
    std::vector<HistoryEntry> subtask_outcomes;
    std::vector<DefectLedger::Entry> trigger_log;  // ground truth; harness-side only
    std::string status;  // completed | budget_exhausted

    std::vector<int> declaration_steps() const;
};

// One Algorithm-1 control loop. Call step() to get the next environment
// action (or nullopt for NOOP), apply it, then complete_step() with the
// post-observation before the next step().
class Orchestrator {
  public:
    Orchestrator(BackendSet backends, int max_steps);

    // Invoked at the top of every while-iteration with the branch about to
    // drive it; used by conformance tests.
    using IterationHook = std::function<void(const std::string& driver, const LoopState& state)>;
    void set_iteration_hook(IterationHook hook) { hook_ = std::move(hook); }

    // Share the current observation with all agent-facing contexts.
    void sync_state(const Observation& obs) { obs_ = obs; }

    std::optional<Action> step(const Observation& obs);
    void complete_step(const Observation& post);

    const LoopState& state() const { return state_; }
    const std::vector<StepRecord>& records() const { return records_; }
    const std::vector<Declaration>& declarations() const { return declarations_; }

  private:
    std::optional<Action> executor_emit();

    BackendSet backends_;
    LoopState state_;
    Observation obs_;
    std::vector<StepRecord> records_;
    std::vector<Declaration> declarations_;
    IterationHook hook_;
};

struct RunLimits {
    int max_steps = 6;       // per-subtask trajectory cap
    int global_budget = 60;  // environment actions per run
};

RunRecord run_task(const TaskSpec& task, const InstrumentedModel& model, BackendSet backends, std::uint64_t seed,
                   RunLimits limits = {}, NoiseConfig noise = {});

// --- Trajectory persistence (schema trajectory_v1, line-delimited) ---
json transition_key_to_json(const TransitionKey& k);
TransitionKey transition_key_from_json(const json& j);
json subtask_to_json(const Subtask& s);
Subtask subtask_from_json(const json& j);
json attribution_to_json(const Attribution& a);
Attribution attribution_from_json(const json& j);
Observation observation_from_json(const json& j);
json step_record_to_json(const StepRecord& r);
StepRecord step_record_from_json(const json& j);
std::string run_record_to_jsonl(const RunRecord& r);
RunRecord run_record_from_jsonl(const std::string& text);
void save_run_record(const RunRecord& r, const std::string& path);
RunRecord load_run_record(const std::string& path);

}  // namespace guitest
