#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guitest/route.hpp"

namespace guitest {

enum class TaskKind { defect_oriented, exploration_oriented };

std::string to_string(TaskKind k);
TaskKind task_kind_from(const std::string& s);

// A bench task: one defect per task. Structured goals drive the scripted
// agents; the instruction text is what a model-backed agent would read.
struct TaskSpec {
    std::string id;
    std::string app_id;
    std::string defect_id;
    TaskKind kind = TaskKind::defect_oriented;
    std::string instruction;
    std::optional<std::string> pre_intent;
    std::optional<std::string> post_intent;
    int max_steps = 6;
    std::vector<GoalPredicate> goals;
};

json task_to_json(const TaskSpec& t);
TaskSpec task_from_json(const json& j);
TaskSpec load_task(const std::string& path);
void save_task(const TaskSpec& t, const std::string& path);

}  // namespace guitest
