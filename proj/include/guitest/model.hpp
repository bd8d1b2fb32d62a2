#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guitest/common.hpp"

namespace guitest {

using json = nlohmann::json;

// Coordinate space mirrors a 1080x2400 device; all bounds live inside it.
constexpr int kScreenWidth = 1080;
constexpr int kScreenHeight = 2400;

struct Point {
    int x = 0;
    int y = 0;
    bool operator==(const Point&) const = default;
};

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool contains(Point p) const {
        return p.x >= x && p.x < x + width && p.y >= y && p.y < y + height;
    }
    bool overlaps(const Rect& o) const {
        return x < o.x + o.width && o.x < x + width && y < o.y + o.height && o.y < y + height;
    }
    Point center() const { return {x + width / 2, y + height / 2}; }
    bool operator==(const Rect&) const = default;
};

enum class ElementKind { button, text_field, list_item, toggle, link, label };

struct Element {
    std::string id;
    ElementKind kind = ElementKind::button;
    // May contain ${var} placeholders resolved against the variable store
    // when the element is observed.
    std::string label;
    Rect bounds;
    bool enabled = true;
};

struct Screen {
    std::string id;
    std::string name;
    std::vector<Element> elements;
    bool scrollable = false;
    // Alternate element list revealed by scrolling (modeling choice; the
    // paper never specifies scroll semantics for the simulated app).
    std::vector<Element> scroll_elements;
};

enum class ActionKind {
    click,
    long_press,
    type,
    scroll,
    drag,
    open_app,
    press_home,
    press_back,
    finished,
    answer
};

enum class Direction { up, down, left, right };

struct Action {
    ActionKind kind = ActionKind::click;
    std::optional<Point> point;       // click / long_press; optional for type
    std::optional<std::string> text;  // type / answer
    std::optional<Direction> direction;  // scroll / drag

    // click/long_press carry a point; type carries text; scroll/drag carry a
    // direction; answer carries text.
    void validate() const;
};

struct Effect {
    enum class Kind { none, navigate, mutate };
    Kind kind = Kind::none;
    std::string target_screen;  // navigate
    std::string variable;       // mutate
    std::string new_value;      // mutate; "${text}" binds the typed payload

    static Effect none() { return {}; }
    static Effect navigate(std::string screen) {
        Effect e;
        e.kind = Kind::navigate;
        e.target_screen = std::move(screen);
        return e;
    }
    static Effect mutate(std::string var, std::string value) {
        Effect e;
        e.kind = Kind::mutate;
        e.variable = std::move(var);
        e.new_value = std::move(value);
        return e;
    }
    bool operator==(const Effect&) const = default;
};

// Transitions are keyed by (screen_id, element_id, action_kind); actions
// without an element target (scroll, press_back, ...) are handled by the
// environment itself.
struct TransitionKey {
    std::string screen_id;
    std::string element_id;
    ActionKind action = ActionKind::click;
    auto operator<=>(const TransitionKey&) const = default;
};

struct AppModel {
    std::string app_id;
    std::vector<Screen> screens;
    std::map<TransitionKey, Effect> transitions;
    std::string initial_screen;
    std::map<std::string, std::string> variables;

    const Screen* find_screen(const std::string& id) const;
    const Element* find_element(const std::string& screen_id, const std::string& element_id) const;
    // Throws ValidationError listing every violated invariant.
    void validate() const;
};

struct Observation {
    std::string screen_id;
    std::string screen_name;
    std::vector<Element> elements;  // labels rendered against variables
    std::string state_digest;       // lowercase hex, pure function of env state
    int step_index = 0;
};

struct Marker {
    std::optional<Point> point;
    ActionKind kind = ActionKind::click;
    std::optional<std::string> hit;  // hit-tested element id
};

struct AnnotatedObservation {
    Observation observation;
    Marker marker;
};

// --- enum <-> string ---
std::string to_string(ElementKind k);
std::string to_string(ActionKind k);
std::string to_string(Direction d);
ElementKind element_kind_from(const std::string& s);
ActionKind action_kind_from(const std::string& s);
Direction direction_from(const std::string& s);

// --- JSON (schema app_model_v1) ---
json to_json(const Element& e);
json to_json(const Action& a);
json to_json(const Effect& e);
json to_json(const Observation& o);
json to_json(const Marker& m);
Element element_from_json(const json& j);
Action action_from_json(const json& j);
Effect effect_from_json(const json& j);

json app_model_to_json(const AppModel& m);
AppModel app_model_from_json(const json& j);
AppModel load_app_model(const std::string& path);
void save_app_model(const AppModel& m, const std::string& path);

// Render ${var} placeholders in a label against the variable store.
std::string render_label(const std::string& label, const std::map<std::string, std::string>& vars);

}  // namespace guitest
