#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guitest/model.hpp"

namespace guitest {

enum class DefectCategory { UI, UX };
enum class FaultMode { ONR, UTR, NLE };

std::string to_string(DefectCategory c);
std::string to_string(FaultMode m);
DefectCategory defect_category_from(const std::string& s);
FaultMode fault_mode_from(const std::string& s);

// An action pattern matches on (element, kind); payloads are free, so a typed
// filename may differ from the defect card's example.
struct ActionPattern {
    std::string element_id;
    ActionKind kind = ActionKind::click;
    bool operator==(const ActionPattern&) const = default;
};

// One resolved environment step, as the defect engine sees it: which screen
// the action landed on, which element it hit (empty for none), and its kind.
struct ActionEvent {
    std::string screen_id;
    std::string element_id;
    ActionKind kind = ActionKind::click;
};

struct TriggerPattern {
    std::string screen_id;
    std::string element_id;
    ActionKind kind = ActionKind::click;
    bool operator==(const TriggerPattern&) const = default;
};

struct DefectDescription {
    std::string preconditions;
    std::string trigger;
    std::string expected;
};

struct DefectSpec {
    std::string id;
    DefectCategory category = DefectCategory::UI;
    FaultMode fault_mode = FaultMode::ONR;
    TriggerPattern trigger;
    std::vector<ActionPattern> preconditions;  // empty <=> single-action
    Effect expected_effect;
    Effect actual_effect;
    DefectDescription description;

    bool single_action() const { return preconditions.empty(); }
    void validate() const;
};

// Ground truth, hidden from every agent-facing surface.
struct DefectLedger {
    struct Entry {
        std::string defect_id;
        int step_index = 0;
    };
    std::vector<Entry> trigger_log;
};

struct InstrumentedModel {
    AppModel model;
    std::vector<DefectSpec> defects;

    // Throws InputError on an id that is not armed.
    const DefectSpec& defect_by_id(const std::string& id) const;
};

// Validates triggers against the model and checks for conflicting defects.
InstrumentedModel inject(const AppModel& model, const std::vector<DefectSpec>& defects);

// How many preconditions have been matched, in order, as a subsequence of the
// event history. preconditions.size() means the trigger is live.
size_t precondition_progress(const std::vector<ActionEvent>& history, const DefectSpec& defect);

// First trigger_log entry for the defect, or nullopt. Throws InputError on an
// id that is not armed.
std::optional<int> ground_truth_triggered(const DefectLedger& ledger, const InstrumentedModel& model,
                                          const std::string& defect_id);

// --- JSON (schema defect_v1) ---
json defect_to_json(const DefectSpec& d);
DefectSpec defect_from_json(const json& j);
DefectSpec load_defect(const std::string& path);
void save_defect(const DefectSpec& d, const std::string& path);

}  // namespace guitest
