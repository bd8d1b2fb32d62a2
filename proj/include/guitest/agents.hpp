#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "guitest/orchestrator.hpp"

namespace guitest {

enum class ProfileKind { oracle_perfect, blind_navigator, flaky_executor };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from(const std::string& s);

// Deterministic test doubles standing in for model backbones. Scripted
// backends read the expected app model only; none of them can see the
// defect ledger.
struct ScriptedProfile {
    ProfileKind kind = ProfileKind::oracle_perfect;
    double jitter_probability = 0.0;  // flaky only
    std::uint64_t rng_seed = 0;
};

constexpr const char* kBoundaryProbeText = "@#$%";

// Decomposes the task's structured goals into navigation subtasks with
// interleaved test intents, and routes around edges reported defective by
// the Reflector.
class ScriptedPlanner : public PlannerBackend {
  public:
    ScriptedPlanner(TaskSpec task, const AppModel& model, bool insert_intents = true);

    std::vector<Subtask> plan(const Observation& obs, const std::vector<HistoryEntry>& history,
                              const std::optional<Attribution>& reflection) override;

    const std::set<TransitionKey>& avoided_edges() const { return avoided_; }

  private:
    std::optional<Subtask> make_intent(const std::string& screen_id, const std::string& from_screen);

    TaskSpec task_;
    const AppModel* model_;
    RoutePlanner router_;
    bool insert_intents_;
    std::set<TransitionKey> avoided_;
    std::set<TransitionKey> used_intents_;  // each probe fires at most once per run
    int intent_counter_ = 0;
};

struct SlipRecord {
    int step_index = 0;  // global step index (pre-observation step_index)
    std::string subtask_id;
    std::string intended_element;
    Point point;
};

// Center-of-bounds clicks along the declared-transition route; the flaky
// profile displaces a fraction of clicks outside the intended element.
class ScriptedExecutor : public ExecutorBackend {
  public:
    ScriptedExecutor(const AppModel& model, ScriptedProfile profile);

    Action act(const Subtask& subtask, const Observation& obs, const Trajectory& tau) override;

    const std::vector<SlipRecord>& slip_log() const { return slips_; }

  private:
    Point jitter_point(const Element& element, int step_index, const std::string& subtask_id);

    const AppModel* model_;
    RoutePlanner router_;
    ScriptedProfile profile_;
    Rng rng_;
    std::vector<SlipRecord> slips_;
};

// Rule monitor: judges each step against the declared (expected) transition
// semantics. Pure in (subtask, pre, action, post) given the expected model.
class RuleMonitor : public MonitorBackend {
  public:
    explicit RuleMonitor(const AppModel& model);

    MonitorVerdict check(const Subtask& subtask, const Observation& pre, const Action& action,
                         const Observation& post) override;

  private:
    const AppModel* model_;
    RoutePlanner router_;
};

// Rule reflector: AGENT_ERROR when the failing step's marker misses the
// intended element, GUI_BUG when it hit the element and the expected effect
// did not occur.
class RuleReflector : public ReflectorBackend {
  public:
    explicit RuleReflector(const AppModel& model);

    Attribution reflect(const Subtask& subtask, const Trajectory& tau, const Observation& obs) override;

  private:
    const AppModel* model_;
    RoutePlanner router_;
};

// Prompt-wrapped single-agent mode: navigates toward the task goals and
// reports anomalies with answer("GUI_BUG"), at most once per (screen,
// element) site. The blind profile never declares.
class BaselineNavigator : public BaselineBackend {
  public:
    BaselineNavigator(const AppModel& model, ScriptedProfile profile);

    Action navigate(const TaskSpec& task, const Observation& obs, const Trajectory& history) override;

  private:
    const AppModel* model_;
    RoutePlanner router_;
    ScriptedProfile profile_;
    Rng rng_;
    size_t goal_cursor_ = 0;
    std::set<std::pair<std::string, std::string>> declared_sites_;
    std::set<TransitionKey> skipped_edges_;  // anomalous edges routed around after declaring
};

// Assembles a full backend set for one run. The flaky jitter probability
// applies only to the flaky profile.
BackendSet make_scripted_backends(ProfileKind kind, AgentMode mode, const TaskSpec& task, const AppModel& model,
                                  std::uint64_t run_seed, double jitter_probability = 0.3,
                                  bool insert_intents = true);

}  // namespace guitest
