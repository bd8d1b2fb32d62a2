#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guitest/defects.hpp"
#include "guitest/orchestrator.hpp"

namespace guitest {

// Declaration-to-trigger association window, in steps: a declaration only
// counts if the trigger fired no later than W steps after the last report.
constexpr int kDetectionWindow = 3;

struct TaskResult {
    std::string task_id;
    int run_index = 0;
    bool triggered = false;  // ground truth, from the run's trigger log
    bool declared = false;
    bool detected = false;
    std::vector<int> declaration_steps;
    std::optional<int> trigger_step;
    // Carried for per-cell grouping.
    DefectCategory category = DefectCategory::UI;
    FaultMode fault_mode = FaultMode::ONR;
    bool judge_failed = false;  // backend failure; scored not-detected
};

struct JudgeVerdict {
    enum class Value { GUI_BUG, EXECUTOR_ERROR };
    Value value = Value::EXECUTOR_ERROR;
    bool precondition_ok = false;
    bool trigger_ok = false;
    bool result_ok = false;
    std::string rationale;
};

class JudgeBackend {
  public:
    virtual ~JudgeBackend() = default;
    virtual JudgeVerdict judge(const RunRecord& run, const DefectSpec& defect) = 0;
};

// Checklist judge over the recorded trajectory: precondition subsequence
// complete, trigger executed after it, and the observed result matching the
// defect's actual effect. Payloads are free ("input values may vary").
class RuleJudge : public JudgeBackend {
  public:
    JudgeVerdict judge(const RunRecord& run, const DefectSpec& defect) override;
};

// Remote judge over the agent wire; responses are schema-checked.
class RemoteAdapter;
class RemoteJudge : public JudgeBackend {
  public:
    explicit RemoteJudge(std::shared_ptr<RemoteAdapter> adapter) : adapter_(std::move(adapter)) {}
    JudgeVerdict judge(const RunRecord& run, const DefectSpec& defect) override;

  private:
    std::shared_ptr<RemoteAdapter> adapter_;
};

// Single-action defects skip the judge: state matching (trigger screen) plus
// action matching (element + kind) over the recorded steps.
bool verify_single_action(const RunRecord& run, const DefectSpec& defect);

JudgeVerdict judge_multi_action(const RunRecord& run, const DefectSpec& defect, JudgeBackend& judge);

// Full per-run scoring: detected := declared AND triggered AND verified AND
// trigger_step <= last declaration step + window.
TaskResult score_run(const RunRecord& run, const DefectSpec& defect, JudgeBackend* judge = nullptr,
                     int window = kDetectionWindow);

struct PassScore {
    std::string task_id;
    double pass1_detected = 0.0;  // mean over runs
    double pass1_declared = 0.0;
    bool pass3_detected = false;  // OR over runs
    bool pass3_declared = false;
};

PassScore score_task(const std::vector<TaskResult>& results);

enum class PassK { pass1, pass3 };

std::string to_string(PassK k);
PassK pass_k_from(const std::string& s);

struct CellMetrics {
    double total = 0.0;     // |T_total| for the cell
    double detected = 0.0;  // |T_detected| mass (fractional under pass@1)
    double declared = 0.0;  // |T_declared| mass
    double recall = 0.0;
    std::optional<double> precision;  // absent when declared mass is zero
    std::optional<double> f1;         // absent when precision absent or P+R=0
};

struct EvalReport {
    PassK pass_k = PassK::pass1;
    // Keyed "UI-ONR".."UX-NLE" plus "Overall"; only non-empty cells present
    // (Overall always is).
    std::map<std::string, CellMetrics> cells;
    std::string bench_hash;
    std::uint64_t seed = 0;
};

double f1_score(double precision, double recall);

// Groups by (category x fault mode) and "Overall". Throws InputError on a
// duplicated (task_id, run_index).
EvalReport aggregate(const std::vector<TaskResult>& results, PassK pass_k);

json report_to_json(const EvalReport& r);
EvalReport report_from_json(const json& j);
void save_report(const EvalReport& r, const std::string& path);
EvalReport load_report(const std::string& path);

// Aligned plain-text table, two decimals, one row per metric.
std::string render_report_table(const EvalReport& r);

}  // namespace guitest
