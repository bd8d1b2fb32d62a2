#include "guitest/agents.hpp"

#include <algorithm>
#include <cmath>

namespace guitest {

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::oracle_perfect: return "oracle_perfect";
        case ProfileKind::blind_navigator: return "blind_navigator";
        case ProfileKind::flaky_executor: return "flaky_executor";
    }
    return "oracle_perfect";
}

ProfileKind profile_kind_from(const std::string& s) {
    if (s == "oracle_perfect") return ProfileKind::oracle_perfect;
    if (s == "blind_navigator") return ProfileKind::blind_navigator;
    if (s == "flaky_executor") return ProfileKind::flaky_executor;
    throw ValidationError("unknown profile kind '" + s + "'");
}

namespace {

// The element a subtask intends to act on next from the given screen, plus
// whether that action is the route's final step. Shared by executor, monitor,
// and reflector so all three agree on intent.
struct Intent {
    RouteStep step;
    bool final_step = false;
};

std::optional<Intent> intended_step(const RoutePlanner& router, const Subtask& st, const std::string& screen) {
    if (st.goal.kind == GoalPredicate::Kind::state_changed) {
        if (!st.intent_action) return std::nullopt;
        if (screen == st.intent_action->screen_id) return Intent{*st.intent_action, true};
        auto path = router.path_to_screen(screen, st.intent_action->screen_id, st.avoid);
        if (path && !path->empty()) return Intent{path->front(), false};
        return std::nullopt;
    }
    auto route = router.plan(screen, st.goal, st.avoid);
    if (!route || route->empty()) return std::nullopt;
    return Intent{route->front(), route->size() == 1};
}

const Element* resolve_target(const std::vector<Element>& elements, const Action& action) {
    if (action.kind == ActionKind::click || action.kind == ActionKind::long_press)
        return hit_test(elements, *action.point);
    if (action.kind == ActionKind::type) {
        if (action.point) return hit_test(elements, *action.point);
        for (const auto& e : elements)
            if (e.kind == ElementKind::text_field && e.enabled) return &e;
        return nullptr;
    }
    return nullptr;
}

bool element_visible(const Observation& obs, const std::string& id) {
    for (const auto& e : obs.elements)
        if (e.id == id) return true;
    return false;
}

}  // namespace

// --- ScriptedPlanner ---

ScriptedPlanner::ScriptedPlanner(TaskSpec task, const AppModel& model, bool insert_intents)
    : task_(std::move(task)), model_(&model), router_(model), insert_intents_(insert_intents) {}

std::optional<Subtask> ScriptedPlanner::make_intent(const std::string& screen_id, const std::string& from_screen) {
    static const IntentPattern patterns[] = {IntentPattern::alternative_paths, IntentPattern::boundary_conditions,
                                             IntentPattern::state_validation};
    const int base = intent_counter_++;
    for (int k = 0; k < 3; ++k) {
        IntentPattern pattern = patterns[(base + k) % 3];
        switch (pattern) {
            case IntentPattern::state_validation: {
                // Probe a mutate-only control on the target screen; skip
                // controls whose effect would be invisible (value already set).
                for (const auto& [key, effect] : model_->transitions) {
                    if (key.screen_id != screen_id || key.action != ActionKind::click) continue;
                    if (effect.kind != Effect::Kind::mutate) continue;
                    if (avoided_.contains(key)) continue;
                    auto var = model_->variables.find(effect.variable);
                    if (var != model_->variables.end() && var->second == effect.new_value) continue;
                    RouteStep probe{key.screen_id, key.element_id, ActionKind::click, std::nullopt};
                    if (used_intents_.contains(key)) continue;
                    used_intents_.insert(key);
                    Subtask s;
                    s.id = "intent-" + std::to_string(base);
                    s.kind = SubtaskKind::test_intent;
                    s.intent_pattern = pattern;
                    s.instruction = "Verify that '" + key.element_id + "' responds on " + screen_id;
                    s.goal = GoalPredicate::state_changed();
                    s.avoid = avoided_;
                    s.intent_action = probe;
                    return s;
                }
                break;
            }
            case IntentPattern::boundary_conditions: {
                for (const auto& [key, effect] : model_->transitions) {
                    if (key.screen_id != screen_id || key.action != ActionKind::type) continue;
                    if (effect.kind != Effect::Kind::mutate) continue;
                    if (avoided_.contains(key) || used_intents_.contains(key)) continue;
                    const Element* e = model_->find_element(screen_id, key.element_id);
                    if (!e || e->kind != ElementKind::text_field) continue;
                    used_intents_.insert(key);
                    Subtask s;
                    s.id = "intent-" + std::to_string(base);
                    s.kind = SubtaskKind::test_intent;
                    s.intent_pattern = pattern;
                    s.instruction = "Probe '" + key.element_id + "' with edge-case input";
                    s.goal = GoalPredicate::state_changed();
                    s.avoid = avoided_;
                    s.intent_action = RouteStep{screen_id, key.element_id, ActionKind::type, kBoundaryProbeText};
                    return s;
                }
                break;
            }
            case IntentPattern::alternative_paths: {
                auto route = router_.plan(from_screen, GoalPredicate::on_screen(screen_id), avoided_);
                if (!route || route->empty()) break;
                const RouteStep& last = route->back();
                TransitionKey primary{last.screen_id, last.element_id, last.kind};
                if (used_intents_.contains(primary)) break;
                std::set<TransitionKey> avoid = avoided_;
                avoid.insert(primary);
                if (!router_.reachable(last.screen_id, screen_id, avoid)) break;
                used_intents_.insert(primary);
                Subtask s;
                s.id = "intent-" + std::to_string(base);
                s.kind = SubtaskKind::test_intent;
                s.intent_pattern = pattern;
                s.instruction = "Reach " + screen_id + " through a different entry point";
                s.goal = GoalPredicate::on_screen(screen_id);
                s.avoid = std::move(avoid);
                return s;
            }
        }
    }
    return std::nullopt;
}

std::vector<Subtask> ScriptedPlanner::plan(const Observation& obs, const std::vector<HistoryEntry>& history,
                                           const std::optional<Attribution>& reflection) {
    if (reflection && reflection->value == AttributionValue::GUI_BUG && reflection->evidence.edge)
        avoided_.insert(*reflection->evidence.edge);

    std::set<size_t> done;
    for (const auto& h : history) {
        if (h.outcome != VerdictValue::DONE) continue;
        if (h.subtask.id.rfind("nav-", 0) == 0) done.insert(std::stoul(h.subtask.id.substr(4)));
    }

    std::vector<Subtask> out;
    std::string from = obs.screen_id == kLoadingScreenId ? model_->initial_screen : obs.screen_id;
    for (size_t i = 0; i < task_.goals.size(); ++i) {
        const GoalPredicate& goal = task_.goals[i];
        if (done.contains(i)) {
            if (!goal.screen_id.empty()) from = goal.screen_id;
            continue;
        }
        // A goal unreachable around known-defective edges is dropped; when
        // everything is dropped the run ends with remaining subtasks unreached.
        if (!router_.plan(from, goal, avoided_)) continue;
        Subtask nav;
        nav.id = "nav-" + std::to_string(i);
        nav.kind = SubtaskKind::navigation;
        nav.instruction = task_.instruction.empty() ? ("Reach goal " + std::to_string(i)) : task_.instruction;
        nav.goal = goal;
        nav.avoid = avoided_;
        out.push_back(std::move(nav));
        if (insert_intents_ && !goal.screen_id.empty()) {
            auto intent = make_intent(goal.screen_id, from);
            if (intent) out.push_back(std::move(*intent));
        }
        if (!goal.screen_id.empty()) from = goal.screen_id;
    }
    return out;
}

// --- ScriptedExecutor ---

ScriptedExecutor::ScriptedExecutor(const AppModel& model, ScriptedProfile profile)
    : model_(&model), router_(model), profile_(profile), rng_(profile.rng_seed) {}

Point ScriptedExecutor::jitter_point(const Element& element, int step_index, const std::string& subtask_id) {
    // Displace the click by 1.5x the element's half-diagonal in a seeded
    // direction; the magnitude guarantees a miss of the intended bounds.
    const Point c = element.bounds.center();
    const double half_w = element.bounds.width / 2.0;
    const double half_h = element.bounds.height / 2.0;
    const double radius = 1.5 * std::sqrt(half_w * half_w + half_h * half_h);
    const int start = static_cast<int>(rng_.below(8));
    for (int k = 0; k < 8; ++k) {
        const double angle = (start + k) * (2.0 * 3.14159265358979323846 / 8.0);
        Point p{c.x + static_cast<int>(std::lround(radius * std::cos(angle))),
                c.y + static_cast<int>(std::lround(radius * std::sin(angle)))};
        if (p.x < 0 || p.x >= kScreenWidth || p.y < 0 || p.y >= kScreenHeight) continue;
        if (element.bounds.contains(p)) continue;
        slips_.push_back({step_index, subtask_id, element.id, p});
        return p;
    }
    Point corner{1, 1};
    slips_.push_back({step_index, subtask_id, element.id, corner});
    return corner;
}

Action ScriptedExecutor::act(const Subtask& subtask, const Observation& obs, const Trajectory& tau) {
    if (obs.screen_id == kLoadingScreenId) {
        Action wait;
        wait.kind = ActionKind::click;
        wait.point = Point{kScreenWidth / 2, kScreenHeight / 2};
        return wait;
    }

    // Alternative-path probes start by leaving the screen they target.
    if (subtask.kind == SubtaskKind::test_intent &&
        subtask.intent_pattern == IntentPattern::alternative_paths && tau.empty() &&
        subtask.goal.holds(obs)) {
        Action back;
        back.kind = ActionKind::press_back;
        return back;
    }

    auto intent = intended_step(router_, subtask, obs.screen_id);
    if (!intent) {
        if (subtask.goal.holds(obs)) {
            Action noop;
            noop.kind = ActionKind::finished;
            return noop;
        }
        // On the right screen but the goal element is behind a scroll.
        if (subtask.goal.kind == GoalPredicate::Kind::element_present &&
            obs.screen_id == subtask.goal.screen_id) {
            const Screen* screen = model_->find_screen(obs.screen_id);
            if (screen && screen->scrollable) {
                bool in_scroll = false, in_base = false;
                for (const auto& e : screen->scroll_elements) in_scroll |= (e.id == subtask.goal.element_id);
                for (const auto& e : screen->elements) in_base |= (e.id == subtask.goal.element_id);
                if (in_scroll || in_base) {
                    Action scroll;
                    scroll.kind = ActionKind::scroll;
                    scroll.direction = in_scroll ? Direction::down : Direction::up;
                    return scroll;
                }
            }
        }
        Action back;  // recovery, never panic
        back.kind = ActionKind::press_back;
        return back;
    }

    const RouteStep& step = intent->step;
    if (step.kind == ActionKind::press_home || step.kind == ActionKind::press_back) {
        Action gesture;  // element-less route step
        gesture.kind = step.kind;
        return gesture;
    }
    const Element* element = nullptr;
    for (const auto& e : obs.elements)
        if (e.id == step.element_id) element = &e;
    if (!element) {
        // The element may live behind a scroll on this screen.
        const Screen* screen = model_->find_screen(obs.screen_id);
        if (screen && screen->scrollable) {
            bool in_scroll = false, in_base = false;
            for (const auto& e : screen->scroll_elements) in_scroll |= (e.id == step.element_id);
            for (const auto& e : screen->elements) in_base |= (e.id == step.element_id);
            if (in_scroll || in_base) {
                Action scroll;
                scroll.kind = ActionKind::scroll;
                scroll.direction = in_scroll ? Direction::down : Direction::up;
                return scroll;
            }
        }
        Action back;
        back.kind = ActionKind::press_back;
        return back;
    }

    Action a;
    a.kind = step.kind;
    if (step.kind == ActionKind::type) {
        a.text = step.text.value_or("");
        a.point = element->bounds.center();
    } else {
        Point p = element->bounds.center();
        if (profile_.kind == ProfileKind::flaky_executor && rng_.fraction() < profile_.jitter_probability)
            p = jitter_point(*element, obs.step_index, subtask.id);
        a.point = p;
    }
    return a;
}

// --- RuleMonitor ---

RuleMonitor::RuleMonitor(const AppModel& model) : model_(&model), router_(model) {}

MonitorVerdict RuleMonitor::check(const Subtask& subtask, const Observation& pre, const Action& action,
                                  const Observation& post) {
    if (subtask.goal.kind != GoalPredicate::Kind::state_changed && subtask.goal.holds(post))
        return {VerdictValue::DONE, "goal predicate satisfied"};
    if (pre.screen_id == kLoadingScreenId || post.screen_id == kLoadingScreenId)
        return {VerdictValue::CONTINUE, "loading"};

    const bool pointer_action = action.kind == ActionKind::click || action.kind == ActionKind::long_press ||
                                action.kind == ActionKind::type;
    if (!pointer_action) return {VerdictValue::CONTINUE, ""};

    auto intent = intended_step(router_, subtask, pre.screen_id);
    if (!intent) return {VerdictValue::CONTINUE, ""};
    const RouteStep& step = intent->step;

    const Element* hit = resolve_target(pre.elements, action);
    if (!hit || hit->id != step.element_id)
        return {VerdictValue::FAIL, "action missed the intended element '" + step.element_id + "'"};

    // Probe actions expect an observable state change.
    if (subtask.goal.kind == GoalPredicate::Kind::state_changed && intent->final_step) {
        if (post.state_digest != pre.state_digest) return {VerdictValue::DONE, "probe produced a state change"};
        return {VerdictValue::FAIL, "probe produced no observable feedback"};
    }

    auto it = model_->transitions.find(TransitionKey{pre.screen_id, step.element_id, action.kind});
    if (it == model_->transitions.end()) return {VerdictValue::CONTINUE, ""};
    const Effect& expected = it->second;

    switch (expected.kind) {
        case Effect::Kind::navigate:
            if (post.screen_id != expected.target_screen) {
                if (post.state_digest == pre.state_digest)
                    return {VerdictValue::FAIL, "no observable feedback; expected navigation to '" +
                                                    expected.target_screen + "'"};
                return {VerdictValue::FAIL, "landed on '" + post.screen_id + "' instead of '" +
                                                expected.target_screen + "'"};
            }
            return {VerdictValue::CONTINUE, ""};
        case Effect::Kind::mutate:
            if (post.state_digest == pre.state_digest)
                return {VerdictValue::FAIL, "no observable feedback from '" + step.element_id + "'"};
            if (intent->final_step && !subtask.goal.holds(post))
                return {VerdictValue::FAIL, "state changed but not to the expected result"};
            return {VerdictValue::CONTINUE, ""};
        case Effect::Kind::none:
            return {VerdictValue::CONTINUE, ""};
    }
    return {VerdictValue::CONTINUE, ""};
}

// --- RuleReflector ---

RuleReflector::RuleReflector(const AppModel& model) : model_(&model), router_(model) {}

Attribution RuleReflector::reflect(const Subtask& subtask, const Trajectory& tau, const Observation&) {
    if (tau.empty()) throw InputError("reflect requires a non-empty trajectory");
    const StepRecord& last = tau.back();

    Attribution a;
    a.evidence.step_indices.push_back(last.step_index);

    auto intent = intended_step(router_, subtask, last.pre.screen_id);
    if (!intent) {
        a.value = AttributionValue::AGENT_ERROR;
        a.suggestion = "navigate back to a screen where the subtask goal is reachable";
        return a;
    }
    const RouteStep& step = intent->step;

    if (!last.marker.hit || *last.marker.hit != step.element_id) {
        a.value = AttributionValue::AGENT_ERROR;
        a.suggestion = "act inside the bounds of element '" + step.element_id + "' on screen '" +
                       last.pre.screen_id + "'";
        return a;
    }

    // The marker hit the intended element and the expected effect still did
    // not occur: genuine GUI defect on that edge.
    a.value = AttributionValue::GUI_BUG;
    a.evidence.edge = TransitionKey{last.pre.screen_id, step.element_id, last.action.kind};
    return a;
}

// --- BaselineNavigator ---

BaselineNavigator::BaselineNavigator(const AppModel& model, ScriptedProfile profile)
    : model_(&model), router_(model), profile_(profile), rng_(profile.rng_seed) {}

Action BaselineNavigator::navigate(const TaskSpec& task, const Observation& obs, const Trajectory& history) {
    if (obs.screen_id == kLoadingScreenId) {
        Action wait;
        wait.kind = ActionKind::click;
        wait.point = Point{kScreenWidth / 2, kScreenHeight / 2};
        return wait;
    }

    while (goal_cursor_ < task.goals.size() && task.goals[goal_cursor_].holds(obs)) ++goal_cursor_;
    if (goal_cursor_ >= task.goals.size()) {
        Action done;
        done.kind = ActionKind::finished;
        return done;
    }

    const bool can_declare = profile_.kind != ProfileKind::blind_navigator;

    // Checklist heuristic: the same action repeated 2+ times with no state
    // change marks the site as anomalous.
    if (history.size() >= 2) {
        const StepRecord& a = history[history.size() - 2];
        const StepRecord& b = history.back();
        const bool same_action = to_json(a.action) == to_json(b.action) && a.pre.screen_id == b.pre.screen_id;
        const bool no_change = a.pre.state_digest == a.post.state_digest &&
                               b.pre.state_digest == b.post.state_digest;
        if (same_action && no_change && b.marker.hit) {
            auto site = std::make_pair(b.pre.screen_id, *b.marker.hit);
            skipped_edges_.insert(TransitionKey{b.pre.screen_id, *b.marker.hit, b.action.kind});
            if (can_declare && !declared_sites_.contains(site)) {
                declared_sites_.insert(site);
                Action answer;
                answer.kind = ActionKind::answer;
                answer.text = "GUI_BUG";
                return answer;
            }
        }
    }

    // Checklist heuristic: action intended to navigate to X landed on Y.
    if (!history.empty()) {
        const StepRecord& b = history.back();
        if (b.marker.hit && (b.action.kind == ActionKind::click || b.action.kind == ActionKind::long_press)) {
            auto it = model_->transitions.find(TransitionKey{b.pre.screen_id, *b.marker.hit, b.action.kind});
            if (it != model_->transitions.end() && it->second.kind == Effect::Kind::navigate &&
                b.post.screen_id != it->second.target_screen && b.post.screen_id != b.pre.screen_id) {
                auto site = std::make_pair(b.pre.screen_id, *b.marker.hit);
                skipped_edges_.insert(TransitionKey{b.pre.screen_id, *b.marker.hit, b.action.kind});
                if (can_declare && !declared_sites_.contains(site)) {
                    declared_sites_.insert(site);
                    Action answer;
                    answer.kind = ActionKind::answer;
                    answer.text = "GUI_BUG";
                    return answer;
                }
            }
        }
    }

    while (goal_cursor_ < task.goals.size()) {
        auto route = router_.plan(obs.screen_id, task.goals[goal_cursor_], skipped_edges_);
        if (!route) {
            // Try from the app root before giving the goal up.
            auto from_root = router_.plan(model_->initial_screen, task.goals[goal_cursor_], skipped_edges_);
            if (from_root) {
                Action home;
                home.kind = ActionKind::press_home;
                return home;
            }
            ++goal_cursor_;
            continue;
        }
        if (route->empty()) {
            ++goal_cursor_;
            continue;
        }
        const RouteStep& step = route->front();
        if (step.kind == ActionKind::press_home || step.kind == ActionKind::press_back) {
            Action gesture;
            gesture.kind = step.kind;
            return gesture;
        }
        const Element* element = nullptr;
        for (const auto& e : obs.elements)
            if (e.id == step.element_id) element = &e;
        if (!element) {
            const Screen* screen = model_->find_screen(obs.screen_id);
            if (screen && screen->scrollable) {
                Action scroll;
                scroll.kind = ActionKind::scroll;
                scroll.direction = Direction::down;
                return scroll;
            }
            Action back;
            back.kind = ActionKind::press_back;
            return back;
        }
        Action a;
        a.kind = step.kind;
        if (step.kind == ActionKind::type) {
            a.text = step.text.value_or("");
            a.point = element->bounds.center();
        } else {
            a.point = element->bounds.center();
        }
        return a;
    }
    Action done;
    done.kind = ActionKind::finished;
    return done;
}

// --- factory ---

BackendSet make_scripted_backends(ProfileKind kind, AgentMode mode, const TaskSpec& task, const AppModel& model,
                                  std::uint64_t run_seed, double jitter_probability, bool insert_intents) {
    ScriptedProfile profile;
    profile.kind = kind;
    profile.rng_seed = run_seed;
    if (kind == ProfileKind::flaky_executor) profile.jitter_probability = jitter_probability;

    BackendSet set;
    set.mode = mode;
    if (mode == AgentMode::baseline) {
        set.baseline = std::make_shared<BaselineNavigator>(model, profile);
        return set;
    }
    set.planner = std::make_shared<ScriptedPlanner>(task, model, insert_intents);
    set.executor = std::make_shared<ScriptedExecutor>(model, profile);
    set.monitor = std::make_shared<RuleMonitor>(model);
    set.reflector = std::make_shared<RuleReflector>(model);
    return set;
}

}  // namespace guitest
