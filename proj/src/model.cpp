#include "guitest/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace guitest {

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

void Action::validate() const {
    switch (kind) {
        case ActionKind::click:
        case ActionKind::long_press:
            if (!point) throw InputError(to_string(kind) + " requires a point");
            break;
        case ActionKind::type:
            if (!text) throw InputError("type requires text");
            break;
        case ActionKind::scroll:
        case ActionKind::drag:
            if (!direction) throw InputError(to_string(kind) + " requires a direction");
            break;
        case ActionKind::answer:
            if (!text) throw InputError("answer requires text");
            break;
        default:
            break;
    }
    if (point && (point->x < 0 || point->x >= kScreenWidth || point->y < 0 || point->y >= kScreenHeight))
        throw InputError("action point outside the coordinate space");
}

const Screen* AppModel::find_screen(const std::string& id) const {
    for (const auto& s : screens)
        if (s.id == id) return &s;
    return nullptr;
}

const Element* AppModel::find_element(const std::string& screen_id, const std::string& element_id) const {
    const Screen* s = find_screen(screen_id);
    if (!s) return nullptr;
    for (const auto& e : s->elements)
        if (e.id == element_id) return &e;
    for (const auto& e : s->scroll_elements)
        if (e.id == element_id) return &e;
    return nullptr;
}

namespace {

void check_elements(const Screen& s, const std::vector<Element>& elems, std::vector<std::string>& problems) {
    std::set<std::string> ids;
    for (const auto& e : elems) {
        if (!ids.insert(e.id).second)
            problems.push_back("screen '" + s.id + "': duplicate element id '" + e.id + "'");
        const Rect& b = e.bounds;
        if (b.x < 0 || b.y < 0 || b.width <= 0 || b.height <= 0 || b.x + b.width > kScreenWidth ||
            b.y + b.height > kScreenHeight)
            problems.push_back("screen '" + s.id + "': element '" + e.id + "' bounds outside coordinate space");
    }
    for (size_t i = 0; i < elems.size(); ++i)
        for (size_t j = i + 1; j < elems.size(); ++j)
            if (elems[i].bounds.overlaps(elems[j].bounds))
                problems.push_back("screen '" + s.id + "': elements '" + elems[i].id + "' and '" + elems[j].id +
                                   "' overlap");
}

}  // namespace

void AppModel::validate() const {
    std::vector<std::string> problems;
    std::set<std::string> screen_ids;
    for (const auto& s : screens) {
        if (!screen_ids.insert(s.id).second) problems.push_back("duplicate screen id '" + s.id + "'");
        check_elements(s, s.elements, problems);
        check_elements(s, s.scroll_elements, problems);
        if (!s.scrollable && !s.scroll_elements.empty())
            problems.push_back("screen '" + s.id + "' has scroll elements but is not scrollable");
    }
    if (!find_screen(initial_screen)) problems.push_back("initial_screen '" + initial_screen + "' does not exist");
    for (const auto& [key, effect] : transitions) {
        if (!find_screen(key.screen_id))
            problems.push_back("transition source screen '" + key.screen_id + "' does not exist");
        else if (!key.element_id.empty() && !find_element(key.screen_id, key.element_id))
            problems.push_back("transition element '" + key.element_id + "' not on screen '" + key.screen_id + "'");
        if (effect.kind == Effect::Kind::navigate && !find_screen(effect.target_screen))
            problems.push_back("transition navigate target '" + effect.target_screen + "' does not exist");
    }
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid app model:";
        for (const auto& p : problems) msg << "\n  - " << p;
        throw ValidationError(msg.str());
    }
}

std::string render_label(const std::string& label, const std::map<std::string, std::string>& vars) {
    std::string out;
    size_t pos = 0;
    while (pos < label.size()) {
        size_t open = label.find("${", pos);
        if (open == std::string::npos) {
            out.append(label, pos, std::string::npos);
            break;
        }
        size_t close = label.find('}', open);
        if (close == std::string::npos) {
            out.append(label, pos, std::string::npos);
            break;
        }
        out.append(label, pos, open - pos);
        std::string key = label.substr(open + 2, close - open - 2);
        auto it = vars.find(key);
        out += (it != vars.end()) ? it->second : "";
        pos = close + 1;
    }
    return out;
}

// --- enum <-> string ---

std::string to_string(ElementKind k) {
    switch (k) {
        case ElementKind::button: return "button";
        case ElementKind::text_field: return "text_field";
        case ElementKind::list_item: return "list_item";
        case ElementKind::toggle: return "toggle";
        case ElementKind::link: return "link";
        case ElementKind::label: return "label";
    }
    return "button";
}

std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::click: return "click";
        case ActionKind::long_press: return "long_press";
        case ActionKind::type: return "type";
        case ActionKind::scroll: return "scroll";
        case ActionKind::drag: return "drag";
        case ActionKind::open_app: return "open_app";
        case ActionKind::press_home: return "press_home";
        case ActionKind::press_back: return "press_back";
        case ActionKind::finished: return "finished";
        case ActionKind::answer: return "answer";
    }
    return "click";
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::up: return "up";
        case Direction::down: return "down";
        case Direction::left: return "left";
        case Direction::right: return "right";
    }
    return "down";
}

ElementKind element_kind_from(const std::string& s) {
    if (s == "button") return ElementKind::button;
    if (s == "text_field") return ElementKind::text_field;
    if (s == "list_item") return ElementKind::list_item;
    if (s == "toggle") return ElementKind::toggle;
    if (s == "link") return ElementKind::link;
    if (s == "label") return ElementKind::label;
    throw ValidationError("unknown element kind '" + s + "'");
}

ActionKind action_kind_from(const std::string& s) {
    if (s == "click") return ActionKind::click;
    if (s == "long_press") return ActionKind::long_press;
    if (s == "type") return ActionKind::type;
    if (s == "scroll") return ActionKind::scroll;
    if (s == "drag") return ActionKind::drag;
    if (s == "open_app") return ActionKind::open_app;
    if (s == "press_home") return ActionKind::press_home;
    if (s == "press_back") return ActionKind::press_back;
    if (s == "finished") return ActionKind::finished;
    if (s == "answer") return ActionKind::answer;
    throw ValidationError("unknown action kind '" + s + "'");
}

Direction direction_from(const std::string& s) {
    if (s == "up") return Direction::up;
    if (s == "down") return Direction::down;
    if (s == "left") return Direction::left;
    if (s == "right") return Direction::right;
    throw ValidationError("unknown direction '" + s + "'");
}

// --- JSON ---

json to_json(const Element& e) {
    return json{{"id", e.id},
                {"kind", to_string(e.kind)},
                {"label", e.label},
                {"bounds", {e.bounds.x, e.bounds.y, e.bounds.width, e.bounds.height}},
                {"enabled", e.enabled}};
}

Element element_from_json(const json& j) {
    Element e;
    e.id = j.at("id").get<std::string>();
    e.kind = element_kind_from(j.at("kind").get<std::string>());
    e.label = j.value("label", "");
    const auto& b = j.at("bounds");
    e.bounds = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
    e.enabled = j.value("enabled", true);
    return e;
}

json to_json(const Action& a) {
    json j{{"kind", to_string(a.kind)}};
    if (a.point) j["point"] = {a.point->x, a.point->y};
    if (a.text) j["text"] = *a.text;
    if (a.direction) j["direction"] = to_string(*a.direction);
    return j;
}

Action action_from_json(const json& j) {
    Action a;
    a.kind = action_kind_from(j.at("kind").get<std::string>());
    if (j.contains("point")) a.point = Point{j["point"].at(0).get<int>(), j["point"].at(1).get<int>()};
    if (j.contains("text")) a.text = j["text"].get<std::string>();
    if (j.contains("direction")) a.direction = direction_from(j["direction"].get<std::string>());
    return a;
}

json to_json(const Effect& e) {
    switch (e.kind) {
        case Effect::Kind::none: return json("none");
        case Effect::Kind::navigate: return json{{"navigate", e.target_screen}};
        case Effect::Kind::mutate: return json{{"mutate", {e.variable, e.new_value}}};
    }
    return json("none");
}

Effect effect_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "none") return Effect::none();
        throw ValidationError("unknown effect '" + j.get<std::string>() + "'");
    }
    if (j.contains("navigate")) return Effect::navigate(j["navigate"].get<std::string>());
    if (j.contains("mutate"))
        return Effect::mutate(j["mutate"].at(0).get<std::string>(), j["mutate"].at(1).get<std::string>());
    throw ValidationError("unknown effect document: " + j.dump());
}

json to_json(const Observation& o) {
    json elems = json::array();
    for (const auto& e : o.elements) elems.push_back(to_json(e));
    return json{{"screen_id", o.screen_id},
                {"screen_name", o.screen_name},
                {"elements", std::move(elems)},
                {"state_digest", o.state_digest},
                {"step_index", o.step_index}};
}

json to_json(const Marker& m) {
    json j{{"kind", to_string(m.kind)}};
    j["point"] = m.point ? json{m.point->x, m.point->y} : json();
    j["hit"] = m.hit ? json(*m.hit) : json();
    return j;
}

namespace {

json screen_to_json(const Screen& s) {
    json elems = json::array();
    for (const auto& e : s.elements) elems.push_back(to_json(e));
    json j{{"id", s.id}, {"name", s.name}, {"scrollable", s.scrollable}, {"elements", std::move(elems)}};
    if (!s.scroll_elements.empty()) {
        json alt = json::array();
        for (const auto& e : s.scroll_elements) alt.push_back(to_json(e));
        j["scroll_elements"] = std::move(alt);
    }
    return j;
}

Screen screen_from_json(const json& j) {
    Screen s;
    s.id = j.at("id").get<std::string>();
    s.name = j.value("name", s.id);
    s.scrollable = j.value("scrollable", false);
    for (const auto& e : j.at("elements")) s.elements.push_back(element_from_json(e));
    if (j.contains("scroll_elements"))
        for (const auto& e : j["scroll_elements"]) s.scroll_elements.push_back(element_from_json(e));
    return s;
}

}  // namespace

json app_model_to_json(const AppModel& m) {
    json screens = json::array();
    for (const auto& s : m.screens) screens.push_back(screen_to_json(s));
    json transitions = json::array();
    for (const auto& [key, effect] : m.transitions)
        transitions.push_back(json{{"screen", key.screen_id},
                                   {"element", key.element_id},
                                   {"action", to_string(key.action)},
                                   {"effect", to_json(effect)}});
    return json{{"schema", "app_model_v1"},
                {"app_id", m.app_id},
                {"initial_screen", m.initial_screen},
                {"variables", m.variables},
                {"screens", std::move(screens)},
                {"transitions", std::move(transitions)}};
}

AppModel app_model_from_json(const json& j) {
    if (j.value("schema", "") != "app_model_v1")
        throw ValidationError("expected schema app_model_v1, got '" + j.value("schema", "") + "'");
    AppModel m;
    m.app_id = j.value("app_id", "app");
    m.initial_screen = j.at("initial_screen").get<std::string>();
    if (j.contains("variables"))
        for (auto it = j["variables"].begin(); it != j["variables"].end(); ++it)
            m.variables[it.key()] = it.value().get<std::string>();
    for (const auto& s : j.at("screens")) m.screens.push_back(screen_from_json(s));
    for (const auto& t : j.at("transitions")) {
        TransitionKey key{t.at("screen").get<std::string>(), t.at("element").get<std::string>(),
                          action_kind_from(t.at("action").get<std::string>())};
        m.transitions[key] = effect_from_json(t.at("effect"));
    }
    return m;
}

AppModel load_app_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open app model file: " + path);
    json j;
    in >> j;
    AppModel m = app_model_from_json(j);
    m.validate();
    return m;
}

void save_app_model(const AppModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write app model file: " + path);
    out << app_model_to_json(m).dump(2) << "\n";
}

}  // namespace guitest
