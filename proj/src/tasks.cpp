#include "guitest/tasks.hpp"

#include <fstream>

namespace guitest {

std::string to_string(TaskKind k) {
    return k == TaskKind::defect_oriented ? "defect_oriented" : "exploration_oriented";
}

TaskKind task_kind_from(const std::string& s) {
    if (s == "defect_oriented") return TaskKind::defect_oriented;
    if (s == "exploration_oriented") return TaskKind::exploration_oriented;
    throw ValidationError("unknown task kind '" + s + "'");
}

json task_to_json(const TaskSpec& t) {
    json goals = json::array();
    for (const auto& g : t.goals) goals.push_back(goal_to_json(g));
    json j{{"schema", "task_v1"},
           {"id", t.id},
           {"app_id", t.app_id},
           {"defect_id", t.defect_id},
           {"kind", to_string(t.kind)},
           {"instruction", t.instruction},
           {"max_steps", t.max_steps},
           {"goals", std::move(goals)}};
    j["pre_intent"] = t.pre_intent ? json(*t.pre_intent) : json();
    j["post_intent"] = t.post_intent ? json(*t.post_intent) : json();
    return j;
}

TaskSpec task_from_json(const json& j) {
    if (j.value("schema", "") != "task_v1")
        throw ValidationError("expected schema task_v1, got '" + j.value("schema", "") + "'");
    TaskSpec t;
    t.id = j.at("id").get<std::string>();
    t.app_id = j.value("app_id", "");
    t.defect_id = j.at("defect_id").get<std::string>();
    t.kind = task_kind_from(j.at("kind").get<std::string>());
    t.instruction = j.value("instruction", "");
    t.max_steps = j.value("max_steps", 6);
    if (j.contains("pre_intent") && !j["pre_intent"].is_null()) t.pre_intent = j["pre_intent"].get<std::string>();
    if (j.contains("post_intent") && !j["post_intent"].is_null()) t.post_intent = j["post_intent"].get<std::string>();
    for (const auto& g : j.at("goals")) t.goals.push_back(goal_from_json(g));
    return t;
}

TaskSpec load_task(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open task file: " + path);
    json j;
    in >> j;
    return task_from_json(j);
}

void save_task(const TaskSpec& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write task file: " + path);
    out << task_to_json(t).dump(2) << "\n";
}

}  // namespace guitest
