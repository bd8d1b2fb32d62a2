#include "guitest/orchestrator.hpp"

#include <fstream>
#include <sstream>

namespace guitest {

std::string to_string(SubtaskKind k) { return k == SubtaskKind::navigation ? "navigation" : "test_intent"; }

std::string to_string(IntentPattern p) {
    switch (p) {
        case IntentPattern::alternative_paths: return "alternative_paths";
        case IntentPattern::boundary_conditions: return "boundary_conditions";
        case IntentPattern::state_validation: return "state_validation";
    }
    return "state_validation";
}

SubtaskKind subtask_kind_from(const std::string& s) {
    if (s == "navigation") return SubtaskKind::navigation;
    if (s == "test_intent") return SubtaskKind::test_intent;
    throw ValidationError("unknown subtask kind '" + s + "'");
}

IntentPattern intent_pattern_from(const std::string& s) {
    if (s == "alternative_paths") return IntentPattern::alternative_paths;
    if (s == "boundary_conditions") return IntentPattern::boundary_conditions;
    if (s == "state_validation") return IntentPattern::state_validation;
    throw ValidationError("unknown intent pattern '" + s + "'");
}

void Subtask::validate() const {
    if ((kind == SubtaskKind::test_intent) != intent_pattern.has_value())
        throw ValidationError("subtask '" + id + "': intent_pattern present iff kind is test_intent");
}

std::string to_string(VerdictValue v) {
    switch (v) {
        case VerdictValue::DONE: return "DONE";
        case VerdictValue::FAIL: return "FAIL";
        case VerdictValue::CONTINUE: return "CONTINUE";
    }
    return "CONTINUE";
}

VerdictValue verdict_value_from(const std::string& s) {
    if (s == "DONE") return VerdictValue::DONE;
    if (s == "FAIL") return VerdictValue::FAIL;
    if (s == "CONTINUE") return VerdictValue::CONTINUE;
    throw ValidationError("unknown verdict '" + s + "'");
}

std::string to_string(AttributionValue v) {
    return v == AttributionValue::AGENT_ERROR ? "AGENT_ERROR" : "GUI_BUG";
}

AttributionValue attribution_value_from(const std::string& s) {
    if (s == "AGENT_ERROR") return AttributionValue::AGENT_ERROR;
    if (s == "GUI_BUG") return AttributionValue::GUI_BUG;
    throw ValidationError("unknown attribution '" + s + "'");
}

std::vector<int> RunRecord::declaration_steps() const {
    std::vector<int> out;
    for (const auto& d : declarations) out.push_back(d.step_index);
    return out;
}

Orchestrator::Orchestrator(BackendSet backends, int max_steps) : backends_(std::move(backends)) {
    state_.max_steps = max_steps;
}

std::optional<Action> Orchestrator::executor_emit() {
    Action a = backends_.executor->act(*state_.current, obs_, state_.tau);
    StepRecord rec;
    rec.step_index = static_cast<int>(records_.size());
    rec.subtask_id = state_.current->id;
    rec.pre = obs_;
    rec.action = a;
    rec.marker = annotate_action(obs_, a).marker;
    state_.tau.push_back(rec);
    records_.push_back(rec);
    state_.check_status = true;
    return a;
}

std::optional<Action> Orchestrator::step(const Observation& obs) {
    sync_state(obs);
    auto& st = state_;
    for (int iterations = 0;; ++iterations) {
        if (iterations > 10000) throw LifecycleError("orchestrator loop did not converge");
        int drivers = int(st.replan) + int(st.next_subtask) + int(st.check_status) + int(st.reflect);
        if (drivers > 1) throw LifecycleError("flag-state corruption: multiple driver flags set");

        if (st.replan) {
            if (hook_) hook_("replan", st);
            st.plan = backends_.planner->plan(obs_, st.history, st.reflection);
            for (const auto& s : st.plan) s.validate();
            st.cursor = 0;
            ++st.plan_serial;
            st.replan = false;
            st.next_subtask = true;
            continue;
        }

        if (st.next_subtask) {
            if (hook_) hook_("next_subtask", st);
            if (st.cursor >= st.plan.size()) return std::nullopt;  // all tasks completed
            st.current = st.plan[st.cursor++];
            st.next_subtask = false;
            continue;
        }

        if (st.check_status) {
            if (hook_) hook_("check_status", st);
            StepRecord& last = state_.tau.back();
            MonitorVerdict v = backends_.monitor->check(*st.current, last.pre, last.action, last.post);
            last.verdict = v;
            records_[last.step_index].verdict = v;
            st.check_status = false;
            if (v.value == VerdictValue::DONE) {
                st.history.push_back({*st.current, VerdictValue::DONE});
                st.tau.clear();
                st.next_subtask = true;
            } else if (v.value == VerdictValue::FAIL) {
                st.history.push_back({*st.current, VerdictValue::FAIL});
                st.reflect = true;
            }
            continue;
        }

        if (st.reflect) {
            if (hook_) hook_("reflect", st);
            if (st.tau.empty()) throw InputError("reflect requires a non-empty trajectory");
            Attribution r = backends_.reflector->reflect(*st.current, st.tau, obs_);
            st.reflection = r;
            StepRecord& last = st.tau.back();
            last.attribution = r;
            records_[last.step_index].attribution = r;
            if (r.value == AttributionValue::GUI_BUG) {
                records_[last.step_index].declared = true;
                declarations_.push_back({last.step_index, "attribution"});
            }
            st.reflect = false;
            if (r.value == AttributionValue::AGENT_ERROR &&
                static_cast<int>(st.tau.size()) < st.max_steps) {
                // self-correct without replanning
            } else if (st.current->kind == SubtaskKind::test_intent) {
                // Failed test intents never feed back into planning; drop the
                // probe and continue exploration from the current state.
                st.tau.clear();
                st.next_subtask = true;
            } else {
                st.tau.clear();
                st.replan = true;
            }
            continue;
        }

        // Executor branch: runs only when no driver flag is set.
        if (hook_) hook_("executor", st);
        return executor_emit();
    }
}

void Orchestrator::complete_step(const Observation& post) {
    if (records_.empty()) throw LifecycleError("complete_step before any action was emitted");
    records_.back().post = post;
    if (!state_.tau.empty()) state_.tau.back().post = post;
}

namespace {

RunRecord run_orchestrated(const TaskSpec& task, const InstrumentedModel& model, BackendSet& backends,
                           std::uint64_t seed, const RunLimits& limits, const NoiseConfig& noise) {
    Environment env(model, noise);
    Observation obs = env.reset(seed);
    Orchestrator orch(backends, limits.max_steps);

    RunRecord rec;
    rec.task_id = task.id;
    rec.seed = seed;
    rec.status = "budget_exhausted";
    while (env.steps_applied() < limits.global_budget) {
        std::optional<Action> action = orch.step(obs);
        if (!action) {
            rec.status = "completed";
            break;
        }
        Observation post = env.apply_action(*action);
        orch.complete_step(post);
        obs = post;
    }
    rec.steps = orch.records();
    rec.declarations = orch.declarations();
    rec.subtask_outcomes = orch.state().history;
    rec.trigger_log = env.ledger().trigger_log;
    return rec;
}

RunRecord run_baseline(const TaskSpec& task, const InstrumentedModel& model, BackendSet& backends,
                       std::uint64_t seed, const RunLimits& limits, const NoiseConfig& noise) {
    Environment env(model, noise);
    Observation obs = env.reset(seed);

    RunRecord rec;
    rec.task_id = task.id;
    rec.seed = seed;
    rec.status = "budget_exhausted";
    Trajectory history;
    while (env.steps_applied() < limits.global_budget) {
        Action action = backends.baseline->navigate(task, obs, history);
        if (action.kind == ActionKind::finished) {
            rec.status = "completed";
            break;
        }
        StepRecord step;
        step.step_index = static_cast<int>(history.size());
        step.subtask_id = "baseline";
        step.pre = obs;
        step.action = action;
        step.marker = annotate_action(obs, action).marker;
        if (action.kind == ActionKind::answer && action.text && *action.text == "GUI_BUG") {
            step.declared = true;
            rec.declarations.push_back({step.step_index, "answer"});
        }
        step.post = env.apply_action(action);
        obs = step.post;
        history.push_back(step);
    }
    rec.steps = history;
    rec.trigger_log = env.ledger().trigger_log;
    return rec;
}

}  // namespace

RunRecord run_task(const TaskSpec& task, const InstrumentedModel& model, BackendSet backends, std::uint64_t seed,
                   RunLimits limits, NoiseConfig noise) {
    if (backends.mode == AgentMode::baseline) {
        if (!backends.baseline) throw OrchestrationError("baseline mode requires a baseline backend");
        return run_baseline(task, model, backends, seed, limits, noise);
    }
    if (!backends.planner || !backends.executor || !backends.monitor || !backends.reflector)
        throw OrchestrationError("orchestrated mode requires planner/executor/monitor/reflector backends");
    return run_orchestrated(task, model, backends, seed, limits, noise);
}

// --- persistence ---

json transition_key_to_json(const TransitionKey& k) {
    return json{{"screen", k.screen_id}, {"element", k.element_id}, {"action", to_string(k.action)}};
}

TransitionKey transition_key_from_json(const json& j) {
    return TransitionKey{j.at("screen").get<std::string>(), j.at("element").get<std::string>(),
                         action_kind_from(j.at("action").get<std::string>())};
}

json subtask_to_json(const Subtask& s) {
    json j{{"id", s.id},
           {"kind", to_string(s.kind)},
           {"instruction", s.instruction},
           {"goal", goal_to_json(s.goal)}};
    j["intent_pattern"] = s.intent_pattern ? json(to_string(*s.intent_pattern)) : json();
    json avoid = json::array();
    for (const auto& k : s.avoid) avoid.push_back(transition_key_to_json(k));
    j["avoid"] = std::move(avoid);
    if (s.intent_action) {
        json act{{"screen", s.intent_action->screen_id},
                 {"element", s.intent_action->element_id},
                 {"action", to_string(s.intent_action->kind)}};
        act["text"] = s.intent_action->text ? json(*s.intent_action->text) : json();
        j["intent_action"] = std::move(act);
    } else {
        j["intent_action"] = json();
    }
    return j;
}

Subtask subtask_from_json(const json& j) {
    Subtask s;
    s.id = j.at("id").get<std::string>();
    s.kind = subtask_kind_from(j.at("kind").get<std::string>());
    s.instruction = j.value("instruction", "");
    s.goal = goal_from_json(j.at("goal"));
    if (j.contains("intent_pattern") && !j["intent_pattern"].is_null())
        s.intent_pattern = intent_pattern_from(j["intent_pattern"].get<std::string>());
    for (const auto& k : j.value("avoid", json::array())) s.avoid.insert(transition_key_from_json(k));
    if (j.contains("intent_action") && !j["intent_action"].is_null()) {
        const auto& act = j["intent_action"];
        RouteStep step{act.at("screen").get<std::string>(), act.at("element").get<std::string>(),
                       action_kind_from(act.at("action").get<std::string>()), std::nullopt};
        if (act.contains("text") && !act["text"].is_null()) step.text = act["text"].get<std::string>();
        s.intent_action = std::move(step);
    }
    s.validate();
    return s;
}

json attribution_to_json(const Attribution& a) {
    json j{{"value", to_string(a.value)}};
    j["suggestion"] = a.suggestion ? json(*a.suggestion) : json();
    json ev{{"steps", a.evidence.step_indices}};
    if (a.evidence.edge)
        ev["edge"] = {{"screen", a.evidence.edge->screen_id},
                      {"element", a.evidence.edge->element_id},
                      {"action", to_string(a.evidence.edge->action)}};
    j["evidence"] = std::move(ev);
    return j;
}

Attribution attribution_from_json(const json& j) {
    Attribution a;
    a.value = attribution_value_from(j.at("value").get<std::string>());
    if (j.contains("suggestion") && !j["suggestion"].is_null()) a.suggestion = j["suggestion"].get<std::string>();
    if (j.contains("evidence")) {
        const auto& ev = j["evidence"];
        if (ev.contains("steps")) a.evidence.step_indices = ev["steps"].get<std::vector<int>>();
        if (ev.contains("edge"))
            a.evidence.edge = TransitionKey{ev["edge"].at("screen").get<std::string>(),
                                            ev["edge"].at("element").get<std::string>(),
                                            action_kind_from(ev["edge"].at("action").get<std::string>())};
    }
    return a;
}

Observation observation_from_json(const json& j) {
    Observation o;
    o.screen_id = j.at("screen_id").get<std::string>();
    o.screen_name = j.value("screen_name", "");
    for (const auto& e : j.value("elements", json::array())) o.elements.push_back(element_from_json(e));
    o.state_digest = j.at("state_digest").get<std::string>();
    o.step_index = j.value("step_index", 0);
    return o;
}

json step_record_to_json(const StepRecord& r) {
    json j{{"type", "step"},
           {"step", r.step_index},
           {"subtask", r.subtask_id},
           {"pre", to_json(r.pre)},
           {"action", to_json(r.action)},
           {"marker", to_json(r.marker)},
           {"post", to_json(r.post)},
           {"declared", r.declared}};
    j["verdict"] = r.verdict ? json{{"value", to_string(r.verdict->value)}, {"note", r.verdict->note}} : json();
    j["attribution"] = r.attribution ? attribution_to_json(*r.attribution) : json();
    return j;
}

StepRecord step_record_from_json(const json& j) {
    StepRecord r;
    r.step_index = j.at("step").get<int>();
    r.subtask_id = j.value("subtask", "");
    r.pre = observation_from_json(j.at("pre"));
    r.action = action_from_json(j.at("action"));
    const auto& m = j.at("marker");
    r.marker.kind = action_kind_from(m.at("kind").get<std::string>());
    if (!m.at("point").is_null()) r.marker.point = Point{m["point"].at(0).get<int>(), m["point"].at(1).get<int>()};
    if (!m.at("hit").is_null()) r.marker.hit = m["hit"].get<std::string>();
    r.post = observation_from_json(j.at("post"));
    if (j.contains("verdict") && !j["verdict"].is_null())
        r.verdict = MonitorVerdict{verdict_value_from(j["verdict"].at("value").get<std::string>()),
                                   j["verdict"].value("note", "")};
    if (j.contains("attribution") && !j["attribution"].is_null())
        r.attribution = attribution_from_json(j["attribution"]);
    r.declared = j.value("declared", false);
    return r;
}

std::string run_record_to_jsonl(const RunRecord& r) {
    std::ostringstream out;
    for (const auto& s : r.steps) out << step_record_to_json(s).dump() << "\n";
    json decls = json::array();
    for (const auto& d : r.declarations) decls.push_back(json{{"step", d.step_index}, {"source", d.source}});
    json outcomes = json::array();
    for (const auto& h : r.subtask_outcomes)
        outcomes.push_back(json{{"subtask", subtask_to_json(h.subtask)}, {"outcome", to_string(h.outcome)}});
    json triggers = json::array();
    for (const auto& t : r.trigger_log) triggers.push_back(json{{"defect", t.defect_id}, {"step", t.step_index}});
    json footer{{"type", "footer"},
                {"schema", "trajectory_v1"},
                {"task_id", r.task_id},
                {"run_index", r.run_index},
                {"seed", r.seed},
                {"status", r.status},
                {"declarations", std::move(decls)},
                {"subtask_outcomes", std::move(outcomes)},
                {"trigger_log", std::move(triggers)}};
    out << footer.dump() << "\n";
    return out.str();
}

RunRecord run_record_from_jsonl(const std::string& text) {
    RunRecord r;
    bool have_footer = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        const std::string type = j.value("type", "");
        if (type == "step") {
            r.steps.push_back(step_record_from_json(j));
        } else if (type == "footer") {
            if (j.value("schema", "") != "trajectory_v1")
                throw ValidationError("expected schema trajectory_v1, got '" + j.value("schema", "") + "'");
            r.task_id = j.at("task_id").get<std::string>();
            r.run_index = j.value("run_index", 0);
            r.seed = j.value("seed", 0ull);
            r.status = j.value("status", "");
            for (const auto& d : j.value("declarations", json::array()))
                r.declarations.push_back({d.at("step").get<int>(), d.value("source", "")});
            for (const auto& h : j.value("subtask_outcomes", json::array()))
                r.subtask_outcomes.push_back({subtask_from_json(h.at("subtask")),
                                              verdict_value_from(h.at("outcome").get<std::string>())});
            for (const auto& t : j.value("trigger_log", json::array()))
                r.trigger_log.push_back({t.at("defect").get<std::string>(), t.at("step").get<int>()});
            have_footer = true;
        } else {
            throw ValidationError("unknown trajectory record type '" + type + "'");
        }
    }
    if (!have_footer) throw ValidationError("trajectory file missing footer record");
    return r;
}

void save_run_record(const RunRecord& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write trajectory file: " + path);
    out << run_record_to_jsonl(r);
}

RunRecord load_run_record(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open trajectory file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_record_from_jsonl(buf.str());
}

}  // namespace guitest
