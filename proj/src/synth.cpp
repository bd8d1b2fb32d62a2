#include "guitest/synth.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "guitest/agents.hpp"

namespace fs = std::filesystem;

namespace guitest {

json repro_to_json(const ReproductionTrajectory& r) {
    json actions = json::array();
    for (const auto& a : r.actions) actions.push_back(to_json(a));
    return json{{"schema", "repro_v1"}, {"defect_id", r.defect_id}, {"actions", std::move(actions)}};
}

ReproductionTrajectory repro_from_json(const json& j) {
    if (j.value("schema", "") != "repro_v1")
        throw ValidationError("expected schema repro_v1, got '" + j.value("schema", "") + "'");
    ReproductionTrajectory r;
    r.defect_id = j.at("defect_id").get<std::string>();
    for (const auto& a : j.at("actions")) r.actions.push_back(action_from_json(a));
    return r;
}

ReproductionTrajectory load_repro(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open repro file: " + path);
    json j;
    in >> j;
    return repro_from_json(j);
}

void save_repro(const ReproductionTrajectory& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write repro file: " + path);
    out << repro_to_json(r).dump(2) << "\n";
}

ReplayOutcome replay_repro(const ReproductionTrajectory& repro, const InstrumentedModel& model) {
    Environment env(model);
    env.reset(0);
    for (const auto& a : repro.actions) env.apply_action(a);
    ReplayOutcome out;
    out.events = env.event_history();
    for (const auto& e : env.ledger().trigger_log) {
        if (e.defect_id != repro.defect_id) continue;
        out.triggered = true;
        out.trigger_step = e.step_index;
        break;
    }
    for (const auto& d : model.defects)
        if (d.id == repro.defect_id) out.trigger_screen = d.trigger.screen_id;
    return out;
}

void validate_repro(const ReproductionTrajectory& repro, const InstrumentedModel& model) {
    if (repro.actions.empty()) throw ValidationError("repro for '" + repro.defect_id + "' has no actions");
    bool known = false;
    for (const auto& d : model.defects) known |= (d.id == repro.defect_id);
    if (!known) throw ValidationError("repro names unknown defect '" + repro.defect_id + "'");
    const ReplayOutcome out = replay_repro(repro, model);
    if (!out.triggered)
        throw ValidationError("repro for '" + repro.defect_id + "' does not trigger the defect on replay");
    if (out.trigger_step != static_cast<int>(repro.actions.size()) - 1)
        throw ValidationError("repro for '" + repro.defect_id + "' triggers before its final action");
}

// --- TemplateIntentGenerator ---

namespace {

std::string screen_title(const Screen& s) { return s.name.empty() ? s.id : s.name; }

}  // namespace

std::vector<SynthIntent> TemplateIntentGenerator::pre_defect(const AppModel& model, const std::string&,
                                                             size_t n) {
    std::vector<SynthIntent> out;
    for (const auto& s : model.screens) {
        if (out.size() == n) break;
        out.push_back({"Explore the " + screen_title(s) + " screen", GoalPredicate::on_screen(s.id)});
    }
    return out;
}

std::vector<SynthIntent> TemplateIntentGenerator::post_defect(const AppModel& model, const std::string&,
                                                              size_t n) {
    std::vector<SynthIntent> out;
    for (auto it = model.screens.rbegin(); it != model.screens.rend(); ++it) {
        if (out.size() == n) break;
        out.push_back({"Afterwards, review the " + screen_title(*it) + " screen",
                       GoalPredicate::on_screen(it->id)});
    }
    return out;
}

// --- defect-oriented synthesis ---

namespace {

std::string describe_action(const Action& a, const Observation& obs) {
    auto label_at = [&](std::optional<Point> p) -> std::string {
        if (!p) return "";
        const Element* e = hit_test(obs.elements, *p);
        return e ? (e->label.empty() ? e->id : e->label) : "";
    };
    switch (a.kind) {
        case ActionKind::click: return "click '" + label_at(a.point) + "'";
        case ActionKind::long_press: return "long-press '" + label_at(a.point) + "'";
        case ActionKind::type: return "type \"" + a.text.value_or("") + "\" into '" + label_at(a.point) + "'";
        case ActionKind::scroll: return "scroll " + (a.direction ? to_string(*a.direction) : "down");
        case ActionKind::drag: return "drag " + (a.direction ? to_string(*a.direction) : "down");
        case ActionKind::open_app: return "open the app";
        case ActionKind::press_home: return "go to the home screen";
        case ActionKind::press_back: return "go back";
        case ActionKind::finished: return "finish";
        case ActionKind::answer: return "report '" + a.text.value_or("") + "'";
    }
    return "";
}

// The display element whose label template binds exactly this variable.
struct DisplayBinding {
    std::string screen_id;
    std::string element_id;
    std::string label_template;
};

std::optional<DisplayBinding> find_display(const AppModel& model, const std::string& var) {
    const std::string tmpl = "${" + var + "}";
    for (const auto& s : model.screens) {
        for (const auto& e : s.elements)
            if (e.label == tmpl) return DisplayBinding{s.id, e.id, e.label};
        for (const auto& e : s.scroll_elements)
            if (e.label == tmpl) return DisplayBinding{s.id, e.id, e.label};
    }
    return std::nullopt;
}

void append_goal(std::vector<GoalPredicate>& goals, GoalPredicate g) {
    if (goals.empty() || !(goals.back() == g)) goals.push_back(std::move(g));
}

}  // namespace

TaskSpec synthesize_defect_oriented(const ReproductionTrajectory& repro, const InstrumentedModel& model,
                                    IntentGenerator&) {
    validate_repro(repro, model);

    const DefectSpec& defect = model.defect_by_id(repro.defect_id);
    // Replay against the defect-free model: the instruction describes the
    // expected path, and goals name the expected outcomes.
    Environment env(InstrumentedModel{model.model, {}});
    env.reset(0);

    std::ostringstream instruction;
    std::vector<GoalPredicate> goals;
    int step = 0;
    for (const auto& a : repro.actions) {
        const Observation obs = env.observe();
        instruction << (step == 0 ? "" : ", then ") << describe_action(a, obs);
        ++step;

        const Element* target = nullptr;
        if (a.kind == ActionKind::click || a.kind == ActionKind::long_press || a.kind == ActionKind::type)
            target = a.point ? hit_test(obs.elements, *a.point) : nullptr;
        if (target) {
            auto it = model.model.transitions.find(TransitionKey{obs.screen_id, target->id, a.kind});
            if (it != model.model.transitions.end()) {
                const Effect& expected = it->second;
                if (expected.kind == Effect::Kind::navigate) {
                    append_goal(goals, GoalPredicate::on_screen(expected.target_screen));
                } else if (expected.kind == Effect::Kind::mutate) {
                    std::string value = expected.new_value;
                    const std::string hook = "${text}";
                    if (auto at = value.find(hook); at != std::string::npos)
                        value.replace(at, hook.size(), a.text.value_or(""));
                    if (auto display = find_display(model.model, expected.variable))
                        append_goal(goals,
                                    GoalPredicate::label_is(display->screen_id, display->element_id, value));
                }
            }
        }
        env.apply_action(a);
    }
    if (goals.empty() || defect.expected_effect.kind == Effect::Kind::none)
        append_goal(goals, GoalPredicate::on_screen(defect.trigger.screen_id));

    TaskSpec task;
    task.id = repro.defect_id + "-repro";
    task.app_id = model.model.app_id;
    task.defect_id = repro.defect_id;
    task.kind = TaskKind::defect_oriented;
    task.instruction = instruction.str();
    task.max_steps = 6;
    task.goals = std::move(goals);
    return task;
}

// --- exploration-oriented synthesis ---

std::vector<TaskSpec> synthesize_exploration_candidates(const ReproductionTrajectory& repro,
                                                        const InstrumentedModel& model,
                                                        IntentGenerator& generator, size_t n_pre,
                                                        size_t n_post) {
    if (n_pre < 1 || n_post < 1) throw InputError("n_pre and n_post must be at least 1");
    validate_repro(repro, model);
    const DefectSpec& defect = model.defect_by_id(repro.defect_id);

    const auto pre = generator.pre_defect(model.model, defect.trigger.screen_id, n_pre);
    if (pre.size() < n_pre)
        throw ValidationError("generator produced " + std::to_string(pre.size()) + " pre-defect intents, " +
                              std::to_string(n_pre) + " requested");
    const auto post = generator.post_defect(model.model, defect.trigger.screen_id, n_post);
    if (post.size() < n_post)
        throw ValidationError("generator produced " + std::to_string(post.size()) + " post-defect intents, " +
                              std::to_string(n_post) + " requested");

    const Element* trigger_element = model.model.find_element(defect.trigger.screen_id, defect.trigger.element_id);
    const std::string adjacent =
        "exercise '" +
        (trigger_element && !trigger_element->label.empty() ? trigger_element->label
                                                            : defect.trigger.element_id) +
        "' along the way";

    std::vector<TaskSpec> out;
    for (size_t i = 0; i < n_pre; ++i) {
        for (size_t j = 0; j < n_post; ++j) {
            TaskSpec t;
            t.id = repro.defect_id + "-x" + std::to_string(i) + "-" + std::to_string(j);
            t.app_id = model.model.app_id;
            t.defect_id = repro.defect_id;
            t.kind = TaskKind::exploration_oriented;
            t.pre_intent = pre[i].text;
            t.post_intent = post[j].text;
            t.instruction = pre[i].text + ", " + adjacent + ", " + post[j].text;
            t.max_steps = 6;
            t.goals = {pre[i].goal, post[j].goal};
            out.push_back(std::move(t));
        }
    }
    return out;
}

ValidatorFactory oracle_validator(const InstrumentedModel& model) {
    return [&model](const TaskSpec& task, std::uint64_t run_seed) {
        return make_scripted_backends(ProfileKind::oracle_perfect, AgentMode::orchestrated, task, model.model,
                                      run_seed, 0.0, /*insert_intents=*/false);
    };
}

FilterResult filter_candidates(const std::vector<TaskSpec>& candidates, const InstrumentedModel& model,
                               const ValidatorFactory& validator, std::uint64_t seed) {
    FilterResult result;
    result.generated = candidates.size();
    for (const auto& task : candidates) {
        const DefectSpec& defect = model.defect_by_id(task.defect_id);
        const std::uint64_t run_seed = derive_seed(seed, task.id, 0);
        const RunRecord run = run_task(task, model, validator(task, run_seed), run_seed);
        bool reaches = false;
        for (const auto& s : run.steps)
            reaches |= (s.pre.screen_id == defect.trigger.screen_id ||
                        s.post.screen_id == defect.trigger.screen_id);
        if (!reaches) continue;
        result.trajectory_hash[task.id] = to_hex(fnv1a(run_record_to_jsonl(run)));
        result.retained.push_back(task);
    }
    return result;
}

// --- bench bundle ---

const DefectSpec& BenchBundle::defect(const std::string& id) const {
    for (const auto& d : defects)
        if (d.id == id) return d;
    throw InputError("bench has no defect '" + id + "'");
}

namespace {

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file for hashing: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return to_hex(fnv1a(buf.str()));
}

}  // namespace

void save_bench(const BenchBundle& bench, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "defects");
    fs::create_directories(fs::path(dir) / "tasks");
    save_app_model(bench.app, (fs::path(dir) / "app.json").string());
    for (const auto& d : bench.defects) save_defect(d, (fs::path(dir) / "defects" / (d.id + ".json")).string());
    for (const auto& t : bench.tasks) save_task(t, (fs::path(dir) / "tasks" / (t.id + ".json")).string());

    std::map<std::string, std::string> files;
    files["app.json"] = file_digest(fs::path(dir) / "app.json");
    for (const auto& d : bench.defects)
        files["defects/" + d.id + ".json"] = file_digest(fs::path(dir) / "defects" / (d.id + ".json"));
    for (const auto& t : bench.tasks)
        files["tasks/" + t.id + ".json"] = file_digest(fs::path(dir) / "tasks" / (t.id + ".json"));

    std::uint64_t combined = kFnvOffset;
    for (const auto& [rel, digest] : files) combined = fnv1a(rel + ":" + digest, combined);

    json manifest{{"schema", "bench_v1"}, {"app_id", bench.app.app_id}};
    manifest["files"] = files;
    manifest["bench_hash"] = to_hex(combined);
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw InputError("cannot write bench manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

BenchBundle load_bench(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw InputError("not a bench bundle (missing manifest.json): " + dir);
    json manifest;
    in >> manifest;
    if (manifest.value("schema", "") != "bench_v1")
        throw ValidationError("expected schema bench_v1, got '" + manifest.value("schema", "") + "'");

    BenchBundle bench;
    bench.app = load_app_model((fs::path(dir) / "app.json").string());
    for (const auto& [rel, digest] : manifest.at("files").items()) {
        const std::string actual = file_digest(fs::path(dir) / rel);
        if (actual != digest.get<std::string>())
            throw InputError("bench file '" + rel + "' does not match its manifest digest");
        if (rel.rfind("defects/", 0) == 0) bench.defects.push_back(load_defect((fs::path(dir) / rel).string()));
        if (rel.rfind("tasks/", 0) == 0) bench.tasks.push_back(load_task((fs::path(dir) / rel).string()));
    }
    return bench;
}

std::string bench_hash(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw InputError("not a bench bundle (missing manifest.json): " + dir);
    json manifest;
    in >> manifest;
    return manifest.value("bench_hash", "");
}

}  // namespace guitest
