#pragma once

#include "guitest/agents.hpp"
#include "guitest/defects.hpp"
#include "guitest/environment.hpp"
#include "guitest/orchestrator.hpp"
#include "guitest/tasks.hpp"

namespace guitest::fixtures {

// Eight-screen hub-and-spoke app used across the test suite: a home hub, five
// direct destinations, and two deeper screens (reader behind library, results
// behind search). Settings offers a second entry into profile so
// alternative-path probes have something to find.
inline Element make_element(std::string id, ElementKind kind, std::string label, int y) {
    Element e;
    e.id = std::move(id);
    e.kind = kind;
    e.label = std::move(label);
    e.bounds = Rect{40, y, 1000, 200};
    return e;
}

inline AppModel demo_app() {
    AppModel m;
    m.app_id = "demo-notes";
    m.initial_screen = "home";
    m.variables = {{"dark_mode", "off"}, {"profile_saved", "no"}, {"query", ""}, {"page", "1"}};

    Screen home;
    home.id = "home";
    home.name = "Home";
    home.elements = {make_element("to_settings", ElementKind::button, "Settings", 200),
                     make_element("to_profile", ElementKind::button, "Profile", 450),
                     make_element("to_library", ElementKind::button, "Library", 700),
                     make_element("to_search", ElementKind::button, "Search", 950),
                     make_element("to_about", ElementKind::button, "About", 1200)};

    Screen settings;
    settings.id = "settings";
    settings.name = "Settings";
    settings.elements = {make_element("dark_toggle", ElementKind::toggle, "Dark mode", 200),
                         make_element("dark_label", ElementKind::label, "${dark_mode}", 450),
                         make_element("to_profile2", ElementKind::button, "Open profile", 700)};

    Screen profile;
    profile.id = "profile";
    profile.name = "Profile";
    profile.elements = {make_element("save_btn", ElementKind::button, "Save profile", 200),
                        make_element("save_label", ElementKind::label, "${profile_saved}", 450)};

    Screen library;
    library.id = "library";
    library.name = "Library";
    library.scrollable = true;
    library.elements = {make_element("open_reader", ElementKind::list_item, "Open reader", 200)};
    library.scroll_elements = {make_element("archived_item", ElementKind::list_item, "Archived", 200)};

    Screen search;
    search.id = "search";
    search.name = "Search";
    search.elements = {make_element("search_box", ElementKind::text_field, "Search", 200),
                       make_element("query_label", ElementKind::label, "${query}", 450),
                       make_element("go_btn", ElementKind::button, "Go", 700)};

    Screen about;
    about.id = "about";
    about.name = "About";
    about.elements = {make_element("version_label", ElementKind::label, "Version 1.0", 200)};

    Screen reader;
    reader.id = "reader";
    reader.name = "Reader";
    reader.elements = {make_element("next_page", ElementKind::button, "Next page", 200),
                       make_element("page_label", ElementKind::label, "${page}", 450)};

    Screen results;
    results.id = "results";
    results.name = "Results";
    results.elements = {make_element("results_label", ElementKind::label, "No results", 200)};

    m.screens = {home, settings, profile, library, search, about, reader, results};

    m.transitions[{"home", "to_settings", ActionKind::click}] = Effect::navigate("settings");
    m.transitions[{"home", "to_profile", ActionKind::click}] = Effect::navigate("profile");
    m.transitions[{"home", "to_library", ActionKind::click}] = Effect::navigate("library");
    m.transitions[{"home", "to_search", ActionKind::click}] = Effect::navigate("search");
    m.transitions[{"home", "to_about", ActionKind::click}] = Effect::navigate("about");
    m.transitions[{"settings", "dark_toggle", ActionKind::click}] = Effect::mutate("dark_mode", "on");
    m.transitions[{"settings", "to_profile2", ActionKind::click}] = Effect::navigate("profile");
    m.transitions[{"profile", "save_btn", ActionKind::click}] = Effect::mutate("profile_saved", "yes");
    m.transitions[{"library", "open_reader", ActionKind::click}] = Effect::navigate("reader");
    m.transitions[{"search", "search_box", ActionKind::type}] = Effect::mutate("query", "${text}");
    m.transitions[{"search", "go_btn", ActionKind::click}] = Effect::navigate("results");
    m.transitions[{"reader", "next_page", ActionKind::click}] = Effect::mutate("page", "2");
    return m;
}

inline DefectSpec defect_onr() {
    DefectSpec d;
    d.id = "d-onr";
    d.category = DefectCategory::UI;
    d.fault_mode = FaultMode::ONR;
    d.trigger = {"home", "to_about", ActionKind::click};
    d.expected_effect = Effect::navigate("about");
    d.actual_effect = Effect::none();
    d.description = {"none", "click 'About' on Home", "About button does nothing"};
    return d;
}

inline DefectSpec defect_nle() {
    DefectSpec d;
    d.id = "d-nle";
    d.category = DefectCategory::UI;
    d.fault_mode = FaultMode::NLE;
    d.trigger = {"home", "to_library", ActionKind::click};
    d.expected_effect = Effect::navigate("library");
    d.actual_effect = Effect::navigate("about");
    d.description = {"none", "click 'Library' on Home", "Library button opens About instead"};
    return d;
}

inline DefectSpec defect_utr() {
    DefectSpec d;
    d.id = "d-utr";
    d.category = DefectCategory::UI;
    d.fault_mode = FaultMode::UTR;
    d.trigger = {"settings", "dark_toggle", ActionKind::click};
    d.expected_effect = Effect::mutate("dark_mode", "on");
    d.actual_effect = Effect::mutate("dark_mode", "???");
    d.description = {"none", "toggle dark mode", "dark mode label shows garbage"};
    return d;
}

inline DefectSpec defect_multi() {
    DefectSpec d;
    d.id = "d-multi";
    d.category = DefectCategory::UI;
    d.fault_mode = FaultMode::ONR;
    d.trigger = {"search", "go_btn", ActionKind::click};
    d.preconditions = {{"search_box", ActionKind::type}};
    d.expected_effect = Effect::navigate("results");
    d.actual_effect = Effect::none();
    d.description = {"a query was typed", "click 'Go' on Search", "Go does nothing after typing"};
    return d;
}

inline DefectSpec defect_reader() {
    DefectSpec d;
    d.id = "d-reader";
    d.category = DefectCategory::UI;
    d.fault_mode = FaultMode::ONR;
    d.trigger = {"reader", "next_page", ActionKind::click};
    d.expected_effect = Effect::mutate("page", "2");
    d.actual_effect = Effect::none();
    d.description = {"none", "click 'Next page' in the reader", "page counter never advances"};
    return d;
}

inline DefectSpec defect_ux() {
    DefectSpec d;
    d.id = "d-ux";
    d.category = DefectCategory::UX;
    d.fault_mode = FaultMode::NLE;
    d.trigger = {"settings", "to_profile2", ActionKind::click};
    d.expected_effect = Effect::navigate("profile");
    d.actual_effect = Effect::navigate("home");
    d.description = {"none", "click 'Open profile' in Settings", "lands back on Home"};
    return d;
}

inline TaskSpec make_task(std::string id, std::string defect_id, std::vector<GoalPredicate> goals) {
    TaskSpec t;
    t.id = std::move(id);
    t.app_id = "demo-notes";
    t.defect_id = std::move(defect_id);
    t.kind = TaskKind::defect_oriented;
    t.instruction = "demo task";
    t.max_steps = 6;
    t.goals = std::move(goals);
    return t;
}

inline TaskSpec task_onr() { return make_task("t-onr", "d-onr", {GoalPredicate::on_screen("about")}); }
inline TaskSpec task_nle() { return make_task("t-nle", "d-nle", {GoalPredicate::on_screen("library")}); }
inline TaskSpec task_utr() {
    return make_task("t-utr", "d-utr", {GoalPredicate::label_is("settings", "dark_label", "on")});
}
inline TaskSpec task_multi() {
    return make_task("t-multi", "d-multi",
                     {GoalPredicate::label_is("search", "query_label", "route66"),
                      GoalPredicate::on_screen("results")});
}
inline TaskSpec task_reader() {
    return make_task("t-reader", "d-reader", {GoalPredicate::label_is("reader", "page_label", "2")});
}

inline RunRecord run_profile(ProfileKind kind, AgentMode mode, const TaskSpec& task,
                             const std::vector<DefectSpec>& defects, std::uint64_t seed,
                             bool insert_intents = true, RunLimits limits = {}) {
    const InstrumentedModel inst = inject(demo_app(), defects);
    BackendSet backends = make_scripted_backends(kind, mode, task, inst.model, seed, 0.3, insert_intents);
    return run_task(task, inst, backends, seed, limits);
}

}  // namespace guitest::fixtures
