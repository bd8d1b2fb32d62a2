#include "guitest/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "guitest/wire.hpp"

namespace guitest {

namespace {

bool marker_matches(const StepRecord& step, const std::string& element_id, ActionKind kind) {
    return step.marker.hit && *step.marker.hit == element_id && step.action.kind == kind;
}

}  // namespace

bool verify_single_action(const RunRecord& run, const DefectSpec& defect) {
    if (!defect.single_action())
        throw InputError("defect '" + defect.id + "' has preconditions; use the judge path");
    for (const auto& step : run.steps) {
        if (step.pre.screen_id != defect.trigger.screen_id) continue;  // state matching
        if (marker_matches(step, defect.trigger.element_id, defect.trigger.kind)) return true;
    }
    return false;
}

JudgeVerdict RuleJudge::judge(const RunRecord& run, const DefectSpec& defect) {
    JudgeVerdict v;

    // Precondition check: the preconditions must appear, in order, as a
    // subsequence of the executed actions. Payload values are free.
    size_t matched = 0;
    size_t trigger_at = run.steps.size();
    for (size_t i = 0; i < run.steps.size(); ++i) {
        const StepRecord& step = run.steps[i];
        if (matched < defect.preconditions.size()) {
            const ActionPattern& want = defect.preconditions[matched];
            if (marker_matches(step, want.element_id, want.kind)) {
                ++matched;
                continue;
            }
        }
        if (matched == defect.preconditions.size() && trigger_at == run.steps.size() &&
            step.pre.screen_id == defect.trigger.screen_id &&
            marker_matches(step, defect.trigger.element_id, defect.trigger.kind)) {
            trigger_at = i;
        }
    }
    v.precondition_ok = matched == defect.preconditions.size();
    v.trigger_ok = trigger_at < run.steps.size();

    if (v.trigger_ok) {
        const StepRecord& t = run.steps[trigger_at];
        const Effect& actual = defect.actual_effect;
        switch (actual.kind) {
            case Effect::Kind::none:
                v.result_ok = t.post.state_digest == t.pre.state_digest;
                break;
            case Effect::Kind::navigate:
                v.result_ok = t.post.screen_id == actual.target_screen;
                break;
            case Effect::Kind::mutate: {
                std::string value = actual.new_value;
                if (value == "${text}") value = t.action.text.value_or("");
                for (const auto& e : t.post.elements)
                    if (e.label.find(value) != std::string::npos) v.result_ok = true;
                break;
            }
        }
    }

    v.value = (v.precondition_ok && v.trigger_ok && v.result_ok) ? JudgeVerdict::Value::GUI_BUG
                                                                 : JudgeVerdict::Value::EXECUTOR_ERROR;
    std::ostringstream why;
    why << "precondition_ok=" << v.precondition_ok << " trigger_ok=" << v.trigger_ok
        << " result_ok=" << v.result_ok;
    v.rationale = why.str();
    return v;
}

JudgeVerdict RemoteJudge::judge(const RunRecord& run, const DefectSpec& defect) {
    json steps = json::array();
    for (const auto& s : run.steps) steps.push_back(step_record_to_json(s));
    json req{{"subject", "judge"},
             {"task", run.task_id},
             {"defect", defect_to_json(defect)},
             {"steps", std::move(steps)},
             {"declarations", run.declaration_steps()}};
    json rsp = adapter_->call(req);
    if (!rsp.contains("verdict") || !rsp.contains("checklist"))
        throw ProtocolError("judge response missing 'verdict'/'checklist': " + rsp.dump());
    JudgeVerdict v;
    const std::string value = rsp["verdict"].get<std::string>();
    if (value != "GUI_BUG" && value != "EXECUTOR_ERROR")
        throw ProtocolError("judge verdict out of range: " + value);
    const auto& c = rsp["checklist"];
    v.precondition_ok = c.value("precondition_ok", false);
    v.trigger_ok = c.value("trigger_ok", false);
    v.result_ok = c.value("result_ok", false);
    v.rationale = rsp.value("rationale", "");
    const bool all = v.precondition_ok && v.trigger_ok && v.result_ok;
    if (all != (value == "GUI_BUG"))
        throw ProtocolError("judge verdict inconsistent with checklist: " + rsp.dump());
    v.value = all ? JudgeVerdict::Value::GUI_BUG : JudgeVerdict::Value::EXECUTOR_ERROR;
    return v;
}

JudgeVerdict judge_multi_action(const RunRecord& run, const DefectSpec& defect, JudgeBackend& judge) {
    if (defect.single_action())
        throw InputError("defect '" + defect.id + "' is single-action; use rule verification");
    return judge.judge(run, defect);
}

TaskResult score_run(const RunRecord& run, const DefectSpec& defect, JudgeBackend* judge, int window) {
    TaskResult r;
    r.task_id = run.task_id;
    r.run_index = run.run_index;
    r.category = defect.category;
    r.fault_mode = defect.fault_mode;
    r.declaration_steps = run.declaration_steps();
    r.declared = !r.declaration_steps.empty();
    for (const auto& e : run.trigger_log)
        if (e.defect_id == defect.id && !r.trigger_step) r.trigger_step = e.step_index;
    r.triggered = r.trigger_step.has_value();

    bool verified = false;
    if (defect.single_action()) {
        verified = verify_single_action(run, defect);
    } else {
        RuleJudge fallback;
        JudgeBackend& backend = judge ? *judge : static_cast<JudgeBackend&>(fallback);
        try {
            verified = judge_multi_action(run, defect, backend).value == JudgeVerdict::Value::GUI_BUG;
        } catch (const GuitestError&) {
            r.judge_failed = true;
            verified = false;
        }
    }

    bool in_window = false;
    if (r.declared && r.trigger_step) {
        const int last_decl = *std::max_element(r.declaration_steps.begin(), r.declaration_steps.end());
        in_window = *r.trigger_step <= last_decl + window;
    }
    r.detected = r.declared && r.triggered && verified && in_window;
    return r;
}

PassScore score_task(const std::vector<TaskResult>& results) {
    if (results.empty()) throw InputError("score_task requires at least one run result");
    PassScore s;
    s.task_id = results.front().task_id;
    for (const auto& r : results) {
        if (r.task_id != s.task_id) throw InputError("score_task results span multiple tasks");
        s.pass1_detected += r.detected ? 1.0 : 0.0;
        s.pass1_declared += r.declared ? 1.0 : 0.0;
        s.pass3_detected = s.pass3_detected || r.detected;
        s.pass3_declared = s.pass3_declared || r.declared;
    }
    s.pass1_detected /= static_cast<double>(results.size());
    s.pass1_declared /= static_cast<double>(results.size());
    return s;
}

std::string to_string(PassK k) { return k == PassK::pass1 ? "pass1" : "pass3"; }

PassK pass_k_from(const std::string& s) {
    if (s == "pass1") return PassK::pass1;
    if (s == "pass3") return PassK::pass3;
    throw ValidationError("unknown pass_k '" + s + "'");
}

double f1_score(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

void finish_cell(CellMetrics& c) {
    c.recall = c.total > 0.0 ? c.detected / c.total : 0.0;
    if (c.declared > 0.0) {
        c.precision = c.detected / c.declared;
        if (*c.precision + c.recall > 0.0) c.f1 = f1_score(*c.precision, c.recall);
    }
}

}  // namespace

EvalReport aggregate(const std::vector<TaskResult>& results, PassK pass_k) {
    std::set<std::pair<std::string, int>> seen;
    std::map<std::string, std::vector<TaskResult>> by_task;
    for (const auto& r : results) {
        if (!seen.insert({r.task_id, r.run_index}).second)
            throw InputError("duplicate result for task '" + r.task_id + "' run " +
                             std::to_string(r.run_index));
        by_task[r.task_id].push_back(r);
    }

    EvalReport report;
    report.pass_k = pass_k;
    for (const auto& [task_id, runs] : by_task) {
        const PassScore s = score_task(runs);
        const double detected = pass_k == PassK::pass1 ? s.pass1_detected : (s.pass3_detected ? 1.0 : 0.0);
        const double declared = pass_k == PassK::pass1 ? s.pass1_declared : (s.pass3_declared ? 1.0 : 0.0);
        const std::string cell = to_string(runs.front().category) + "-" + to_string(runs.front().fault_mode);
        for (const std::string& key : {cell, std::string("Overall")}) {
            CellMetrics& c = report.cells[key];
            c.total += 1.0;
            c.detected += detected;
            c.declared += declared;
        }
    }
    report.cells["Overall"];  // present even for an empty result set
    for (auto& [key, cell] : report.cells) finish_cell(cell);
    return report;
}

namespace {

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

json cell_to_json(const CellMetrics& c) {
    json j{{"total", c.total}, {"detected", round4(c.detected)}, {"declared", round4(c.declared)},
           {"recall", round4(c.recall)}};
    j["precision"] = c.precision ? json(round4(*c.precision)) : json();
    j["f1"] = c.f1 ? json(round4(*c.f1)) : json();
    return j;
}

CellMetrics cell_from_json(const json& j) {
    CellMetrics c;
    c.total = j.at("total").get<double>();
    c.detected = j.at("detected").get<double>();
    c.declared = j.at("declared").get<double>();
    c.recall = j.at("recall").get<double>();
    if (!j.at("precision").is_null()) c.precision = j["precision"].get<double>();
    if (!j.at("f1").is_null()) c.f1 = j["f1"].get<double>();
    return c;
}

}  // namespace

json report_to_json(const EvalReport& r) {
    json cells;
    for (const auto& [key, cell] : r.cells) cells[key] = cell_to_json(cell);
    return json{{"schema", "report_v1"},
                {"pass_k", to_string(r.pass_k)},
                {"cells", std::move(cells)},
                {"provenance", {{"bench_hash", r.bench_hash}, {"seed", r.seed}}}};
}

EvalReport report_from_json(const json& j) {
    if (j.value("schema", "") != "report_v1")
        throw ValidationError("expected schema report_v1, got '" + j.value("schema", "") + "'");
    EvalReport r;
    r.pass_k = pass_k_from(j.at("pass_k").get<std::string>());
    for (const auto& [key, cell] : j.at("cells").items()) r.cells[key] = cell_from_json(cell);
    if (j.contains("provenance")) {
        r.bench_hash = j["provenance"].value("bench_hash", "");
        r.seed = j["provenance"].value("seed", std::uint64_t{0});
    }
    return r;
}

void save_report(const EvalReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write report file: " + path);
    out << report_to_json(r).dump(2) << "\n";
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open report file: " + path);
    json j;
    in >> j;
    return report_from_json(j);
}

std::string render_report_table(const EvalReport& r) {
    static const char* columns[] = {"UI-ONR", "UI-UTR", "UI-NLE", "UX-UTR", "UX-NLE", "Overall"};
    std::ostringstream out;
    out << std::left << std::setw(11) << ("Pass@" + std::string(r.pass_k == PassK::pass1 ? "1" : "3"));
    for (const char* col : columns) out << std::right << std::setw(9) << col;
    out << "\n";

    auto row = [&](const std::string& name, auto value_of) {
        out << std::left << std::setw(11) << name;
        for (const char* col : columns) {
            auto it = r.cells.find(col);
            std::optional<double> v;
            if (it != r.cells.end() && it->second.total > 0.0) v = value_of(it->second);
            if (v)
                out << std::right << std::setw(9) << std::fixed << std::setprecision(2) << *v;
            else
                out << std::right << std::setw(9) << "--";
        }
        out << "\n";
    };
    row("Recall", [](const CellMetrics& c) { return std::optional<double>(c.recall); });
    row("Precision", [](const CellMetrics& c) { return c.precision; });
    row("F1", [](const CellMetrics& c) { return c.f1; });
    return out.str();
}

}  // namespace guitest
