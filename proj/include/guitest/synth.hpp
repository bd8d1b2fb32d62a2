#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "guitest/environment.hpp"
#include "guitest/orchestrator.hpp"
#include "guitest/tasks.hpp"

namespace guitest {

// A manually collected action sequence from the initial screen up to and
// including the defect's trigger action.
struct ReproductionTrajectory {
    std::string defect_id;
    std::vector<Action> actions;
};

json repro_to_json(const ReproductionTrajectory& r);
ReproductionTrajectory repro_from_json(const json& j);
ReproductionTrajectory load_repro(const std::string& path);
void save_repro(const ReproductionTrajectory& r, const std::string& path);

struct ReplayOutcome {
    bool triggered = false;
    int trigger_step = -1;
    std::string trigger_screen;
    std::vector<ActionEvent> events;
};

// Replays the repro on a fresh instrumented environment. The repro is valid
// iff its own defect triggers at the final action.
ReplayOutcome replay_repro(const ReproductionTrajectory& repro, const InstrumentedModel& model);
void validate_repro(const ReproductionTrajectory& repro, const InstrumentedModel& model);

struct SynthIntent {
    std::string text;
    GoalPredicate goal;
};

// Intent synthesis is pluggable; the shipped generator is template-based
// over screen names. Remote generators can wrap the wire protocol.
class IntentGenerator {
  public:
    virtual ~IntentGenerator() = default;
    virtual std::vector<SynthIntent> pre_defect(const AppModel& model, const std::string& trigger_screen,
                                                size_t n) = 0;
    virtual std::vector<SynthIntent> post_defect(const AppModel& model, const std::string& trigger_screen,
                                                 size_t n) = 0;
};

class TemplateIntentGenerator : public IntentGenerator {
  public:
    std::vector<SynthIntent> pre_defect(const AppModel& model, const std::string& trigger_screen,
                                        size_t n) override;
    std::vector<SynthIntent> post_defect(const AppModel& model, const std::string& trigger_screen,
                                         size_t n) override;
};

// Abstraction of the repro path into an action-level instruction plus
// structured goals the scripted agents can execute.
TaskSpec synthesize_defect_oriented(const ReproductionTrajectory& repro, const InstrumentedModel& model,
                                    IntentGenerator& generator);

// Exactly n_pre x n_post candidates: one pre-defect intent, the
// defect-adjacent step, one post-defect continuation.
std::vector<TaskSpec> synthesize_exploration_candidates(const ReproductionTrajectory& repro,
                                                        const InstrumentedModel& model,
                                                        IntentGenerator& generator, size_t n_pre,
                                                        size_t n_post);

// Builds the deterministic validation agent for one candidate run.
using ValidatorFactory = std::function<BackendSet(const TaskSpec& task, std::uint64_t run_seed)>;
ValidatorFactory oracle_validator(const InstrumentedModel& model);

struct FilterResult {
    std::vector<TaskSpec> retained;
    std::map<std::string, std::string> trajectory_hash;  // retained task id -> validation hash
    size_t generated = 0;
};

// Runs each candidate with the validation agent and retains those whose
// trajectory reaches the defect's trigger screen.
FilterResult filter_candidates(const std::vector<TaskSpec>& candidates, const InstrumentedModel& model,
                               const ValidatorFactory& validator, std::uint64_t seed);

// --- Bench bundle (directory with app model, defects, tasks, manifest) ---

struct BenchBundle {
    AppModel app;
    std::vector<DefectSpec> defects;
    std::vector<TaskSpec> tasks;

    const DefectSpec& defect(const std::string& id) const;
};

void save_bench(const BenchBundle& bench, const std::string& dir);
BenchBundle load_bench(const std::string& dir);
// Combined content hash over the manifest's file digests, lowercase hex.
std::string bench_hash(const std::string& dir);

}  // namespace guitest
