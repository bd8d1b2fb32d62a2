#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guitest/model.hpp"

namespace guitest {

// Structured goal over observations; model-backed planners return predicates
// in the same form over the wire.
struct GoalPredicate {
    enum class Kind { on_screen, element_present, label_is, state_changed };
    Kind kind = Kind::on_screen;
    std::string screen_id;
    std::string element_id;
    std::string text;

    static GoalPredicate on_screen(std::string s) {
        GoalPredicate g;
        g.kind = Kind::on_screen;
        g.screen_id = std::move(s);
        return g;
    }
    static GoalPredicate element_present(std::string s, std::string e) {
        GoalPredicate g;
        g.kind = Kind::element_present;
        g.screen_id = std::move(s);
        g.element_id = std::move(e);
        return g;
    }
    static GoalPredicate label_is(std::string s, std::string e, std::string t) {
        GoalPredicate g;
        g.kind = Kind::label_is;
        g.screen_id = std::move(s);
        g.element_id = std::move(e);
        g.text = std::move(t);
        return g;
    }
    static GoalPredicate state_changed() {
        GoalPredicate g;
        g.kind = Kind::state_changed;
        return g;
    }

    // state_changed is judged by the Monitor from digests, never here.
    bool holds(const Observation& obs) const;
    bool operator==(const GoalPredicate&) const = default;
};

json goal_to_json(const GoalPredicate& g);
GoalPredicate goal_from_json(const json& j);

// One step of a planned route through the declared (expected) transitions.
struct RouteStep {
    std::string screen_id;
    std::string element_id;
    ActionKind kind = ActionKind::click;
    std::optional<std::string> text;  // payload for type steps
};

// BFS route planning over the app model's declared transitions. Shared by
// the scripted executor, rule monitor, and rule reflector so all three agree
// on which element a subtask intends to touch.
class RoutePlanner {
  public:
    explicit RoutePlanner(const AppModel& model) : model_(&model) {}

    // Full action sequence from `from_screen` to a state satisfying `goal`,
    // avoiding the given transition edges. Empty when already satisfied;
    // nullopt when unreachable.
    std::optional<std::vector<RouteStep>> plan(const std::string& from_screen, const GoalPredicate& goal,
                                               const std::set<TransitionKey>& avoid = {}) const;

    // The element the route intends to act on next, or nullopt.
    std::optional<RouteStep> next_step(const std::string& from_screen, const GoalPredicate& goal,
                                       const std::set<TransitionKey>& avoid = {}) const;

    // Shortest screen path (BFS over navigate transitions).
    std::optional<std::vector<RouteStep>> path_to_screen(const std::string& from, const std::string& to,
                                                         const std::set<TransitionKey>& avoid = {}) const;

    bool reachable(const std::string& from, const std::string& to, const std::set<TransitionKey>& avoid = {}) const;

    const AppModel& model() const { return *model_; }

  private:
    const AppModel* model_;
};

}  // namespace guitest
