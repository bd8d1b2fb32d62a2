#include "guitest/defects.hpp"

#include <fstream>
#include <sstream>

namespace guitest {

std::string to_string(DefectCategory c) { return c == DefectCategory::UI ? "UI" : "UX"; }

std::string to_string(FaultMode m) {
    switch (m) {
        case FaultMode::ONR: return "ONR";
        case FaultMode::UTR: return "UTR";
        case FaultMode::NLE: return "NLE";
    }
    return "ONR";
}

DefectCategory defect_category_from(const std::string& s) {
    if (s == "UI") return DefectCategory::UI;
    if (s == "UX") return DefectCategory::UX;
    throw ValidationError("unknown defect category '" + s + "'");
}

FaultMode fault_mode_from(const std::string& s) {
    if (s == "ONR") return FaultMode::ONR;
    if (s == "UTR") return FaultMode::UTR;
    if (s == "NLE") return FaultMode::NLE;
    throw ValidationError("unknown fault mode '" + s + "'");
}

void DefectSpec::validate() const {
    std::vector<std::string> problems;
    // Unresponsiveness is attributable to a specific element, so ONR is a
    // UI-only fault mode.
    if (category == DefectCategory::UX && fault_mode == FaultMode::ONR)
        problems.push_back("UX defects cannot use fault mode ONR");
    if (expected_effect == actual_effect)
        problems.push_back("expected_effect equals actual_effect");
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid defect '" << id << "':";
        for (const auto& p : problems) msg << "\n  - " << p;
        throw ValidationError(msg.str());
    }
}

InstrumentedModel inject(const AppModel& model, const std::vector<DefectSpec>& defects) {
    model.validate();
    for (const auto& d : defects) {
        d.validate();
        if (!model.find_element(d.trigger.screen_id, d.trigger.element_id))
            throw ValidationError("defect '" + d.id + "' trigger references unknown screen/element (" +
                                  d.trigger.screen_id + ", " + d.trigger.element_id + ")");
        TransitionKey key{d.trigger.screen_id, d.trigger.element_id, d.trigger.kind};
        if (!model.transitions.contains(key))
            throw ValidationError("defect '" + d.id + "' trigger has no declared expected transition");
    }
    for (size_t i = 0; i < defects.size(); ++i) {
        for (size_t j = i + 1; j < defects.size(); ++j) {
            const auto& a = defects[i];
            const auto& b = defects[j];
            if (a.trigger != b.trigger) continue;
            // Same trigger conflicts when both can be live at the same time:
            // equal precondition lists, or one unconditional.
            if (a.preconditions == b.preconditions || a.preconditions.empty() || b.preconditions.empty())
                throw ValidationError("defects '" + a.id + "' and '" + b.id +
                                      "' share a trigger with overlapping precondition satisfaction");
        }
    }
    return InstrumentedModel{model, defects};
}

size_t precondition_progress(const std::vector<ActionEvent>& history, const DefectSpec& defect) {
    size_t matched = 0;
    for (const auto& ev : history) {
        if (matched == defect.preconditions.size()) break;
        const auto& pat = defect.preconditions[matched];
        if (ev.element_id == pat.element_id && ev.kind == pat.kind) ++matched;
    }
    return matched;
}

const DefectSpec& InstrumentedModel::defect_by_id(const std::string& id) const {
    for (const auto& d : defects)
        if (d.id == id) return d;
    throw InputError("defect '" + id + "' is not armed");
}

std::optional<int> ground_truth_triggered(const DefectLedger& ledger, const InstrumentedModel& model,
                                          const std::string& defect_id) {
    bool armed = false;
    for (const auto& d : model.defects)
        if (d.id == defect_id) armed = true;
    if (!armed) throw InputError("defect '" + defect_id + "' is not armed");
    for (const auto& e : ledger.trigger_log)
        if (e.defect_id == defect_id) return e.step_index;
    return std::nullopt;
}

json defect_to_json(const DefectSpec& d) {
    json pre = json::array();
    for (const auto& p : d.preconditions)
        pre.push_back(json{{"element", p.element_id}, {"action", to_string(p.kind)}});
    return json{{"schema", "defect_v1"},
                {"id", d.id},
                {"category", to_string(d.category)},
                {"fault_mode", to_string(d.fault_mode)},
                {"trigger",
                 {{"screen", d.trigger.screen_id},
                  {"element", d.trigger.element_id},
                  {"action", to_string(d.trigger.kind)}}},
                {"preconditions", std::move(pre)},
                {"expected_effect", to_json(d.expected_effect)},
                {"actual_effect", to_json(d.actual_effect)},
                {"description",
                 {{"preconditions", d.description.preconditions},
                  {"trigger", d.description.trigger},
                  {"expected", d.description.expected}}}};
}

DefectSpec defect_from_json(const json& j) {
    if (j.value("schema", "") != "defect_v1")
        throw ValidationError("expected schema defect_v1, got '" + j.value("schema", "") + "'");
    DefectSpec d;
    d.id = j.at("id").get<std::string>();
    d.category = defect_category_from(j.at("category").get<std::string>());
    d.fault_mode = fault_mode_from(j.at("fault_mode").get<std::string>());
    const auto& t = j.at("trigger");
    d.trigger = {t.at("screen").get<std::string>(), t.at("element").get<std::string>(),
                 action_kind_from(t.at("action").get<std::string>())};
    for (const auto& p : j.value("preconditions", json::array()))
        d.preconditions.push_back({p.at("element").get<std::string>(), action_kind_from(p.at("action").get<std::string>())});
    d.expected_effect = effect_from_json(j.at("expected_effect"));
    d.actual_effect = effect_from_json(j.at("actual_effect"));
    if (j.contains("description")) {
        const auto& desc = j["description"];
        d.description = {desc.value("preconditions", ""), desc.value("trigger", ""), desc.value("expected", "")};
    }
    d.validate();
    return d;
}

DefectSpec load_defect(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open defect file: " + path);
    json j;
    in >> j;
    return defect_from_json(j);
}

void save_defect(const DefectSpec& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write defect file: " + path);
    out << defect_to_json(d).dump(2) << "\n";
}

}  // namespace guitest
