#include "guitest/route.hpp"

#include <deque>
#include <map>

namespace guitest {

bool GoalPredicate::holds(const Observation& obs) const {
    switch (kind) {
        case Kind::on_screen:
            return obs.screen_id == screen_id;
        case Kind::element_present: {
            if (obs.screen_id != screen_id) return false;
            for (const auto& e : obs.elements)
                if (e.id == element_id) return true;
            return false;
        }
        case Kind::label_is: {
            if (obs.screen_id != screen_id) return false;
            for (const auto& e : obs.elements)
                if (e.id == element_id) return e.label == text;
            return false;
        }
        case Kind::state_changed:
            return false;
    }
    return false;
}

json goal_to_json(const GoalPredicate& g) {
    switch (g.kind) {
        case GoalPredicate::Kind::on_screen: return json{{"on_screen", g.screen_id}};
        case GoalPredicate::Kind::element_present: return json{{"element_present", {g.screen_id, g.element_id}}};
        case GoalPredicate::Kind::label_is: return json{{"label_is", {g.screen_id, g.element_id, g.text}}};
        case GoalPredicate::Kind::state_changed: return json{{"state_changed", true}};
    }
    return json{{"state_changed", true}};
}

GoalPredicate goal_from_json(const json& j) {
    if (j.contains("on_screen")) return GoalPredicate::on_screen(j["on_screen"].get<std::string>());
    if (j.contains("element_present"))
        return GoalPredicate::element_present(j["element_present"].at(0).get<std::string>(),
                                              j["element_present"].at(1).get<std::string>());
    if (j.contains("label_is"))
        return GoalPredicate::label_is(j["label_is"].at(0).get<std::string>(),
                                       j["label_is"].at(1).get<std::string>(),
                                       j["label_is"].at(2).get<std::string>());
    if (j.contains("state_changed")) return GoalPredicate::state_changed();
    throw ValidationError("unknown goal predicate: " + j.dump());
}

std::optional<std::vector<RouteStep>> RoutePlanner::path_to_screen(const std::string& from, const std::string& to,
                                                                   const std::set<TransitionKey>& avoid) const {
    if (from == to) return std::vector<RouteStep>{};
    // Deterministic BFS: transitions iterate in key order, so shortest-path
    // tie-breaks are stable across runs.
    std::map<std::string, std::pair<std::string, TransitionKey>> parent;
    std::deque<std::string> queue{from};
    std::set<std::string> seen{from};
    bool found = false;
    auto visit = [&](const std::string& cur, const std::string& next, const TransitionKey& key) {
        if (seen.contains(next) || avoid.contains(key)) return;
        seen.insert(next);
        parent[next] = {cur, key};
        if (next == to)
            found = true;
        else
            queue.push_back(next);
    };
    while (!queue.empty() && !found) {
        std::string cur = queue.front();
        queue.pop_front();
        for (const auto& [key, effect] : model_->transitions) {
            if (key.screen_id != cur || effect.kind != Effect::Kind::navigate) continue;
            visit(cur, effect.target_screen, key);
        }
        // The home gesture reaches the app root from anywhere.
        visit(cur, model_->initial_screen, TransitionKey{cur, "", ActionKind::press_home});
    }
    if (!found) return std::nullopt;
    std::vector<RouteStep> steps;
    std::string node = to;
    while (node != from) {
        auto& [prev, k] = parent.at(node);
        steps.push_back({k.screen_id, k.element_id, k.action, std::nullopt});
        node = prev;
    }
    std::reverse(steps.begin(), steps.end());
    return steps;
}

bool RoutePlanner::reachable(const std::string& from, const std::string& to,
                             const std::set<TransitionKey>& avoid) const {
    return path_to_screen(from, to, avoid).has_value();
}

std::optional<std::vector<RouteStep>> RoutePlanner::plan(const std::string& from_screen, const GoalPredicate& goal,
                                                         const std::set<TransitionKey>& avoid) const {
    switch (goal.kind) {
        case GoalPredicate::Kind::on_screen:
        case GoalPredicate::Kind::element_present:
            return path_to_screen(from_screen, goal.screen_id, avoid);
        case GoalPredicate::Kind::label_is: {
            // Find a mutate transition that sets the variable bound by the
            // target element's label template to the desired text, route to
            // it, perform it, then route to the display screen.
            const Element* display = model_->find_element(goal.screen_id, goal.element_id);
            if (!display) return std::nullopt;
            const std::string& tmpl = display->label;
            if (tmpl.size() < 4 || tmpl.substr(0, 2) != "${" || tmpl.back() != '}') return std::nullopt;
            std::string var = tmpl.substr(2, tmpl.size() - 3);
            std::optional<std::vector<RouteStep>> best;
            for (const auto& [key, effect] : model_->transitions) {
                if (effect.kind != Effect::Kind::mutate || effect.variable != var) continue;
                if (avoid.contains(key)) continue;
                bool takes_payload = effect.new_value.find("${text}") != std::string::npos;
                if (!takes_payload && effect.new_value != goal.text) continue;
                auto head = path_to_screen(from_screen, key.screen_id, avoid);
                if (!head) continue;
                auto tail = path_to_screen(key.screen_id, goal.screen_id, avoid);
                if (!tail) continue;
                std::vector<RouteStep> route = *head;
                RouteStep act{key.screen_id, key.element_id, key.action, std::nullopt};
                if (key.action == ActionKind::type) act.text = goal.text;
                route.push_back(act);
                route.insert(route.end(), tail->begin(), tail->end());
                if (!best || route.size() < best->size()) best = std::move(route);
            }
            return best;
        }
        case GoalPredicate::Kind::state_changed:
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<RouteStep> RoutePlanner::next_step(const std::string& from_screen, const GoalPredicate& goal,
                                                 const std::set<TransitionKey>& avoid) const {
    auto route = plan(from_screen, goal, avoid);
    if (!route || route->empty()) return std::nullopt;
    return route->front();
}

}  // namespace guitest
