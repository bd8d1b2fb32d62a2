#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"
#include "guitest/eval.hpp"
#include "guitest/wire.hpp"

using namespace guitest;
using namespace guitest::fixtures;

namespace {

StepRecord make_step(int index, const std::string& pre_screen, const std::string& hit, ActionKind kind,
                     const std::string& post_screen, const std::string& pre_digest,
                     const std::string& post_digest) {
    StepRecord s;
    s.step_index = index;
    s.pre.screen_id = pre_screen;
    s.pre.state_digest = pre_digest;
    s.action.kind = kind;
    s.marker.kind = kind;
    s.marker.hit = hit;
    s.post.screen_id = post_screen;
    s.post.state_digest = post_digest;
    return s;
}

TaskResult make_result(const std::string& task_id, int run_index, bool detected, bool declared,
                       DefectCategory cat = DefectCategory::UI, FaultMode mode = FaultMode::ONR) {
    TaskResult r;
    r.task_id = task_id;
    r.run_index = run_index;
    r.detected = detected;
    r.declared = declared;
    r.triggered = detected;
    r.category = cat;
    r.fault_mode = mode;
    return r;
}

struct ThrowingJudge : JudgeBackend {
    JudgeVerdict judge(const RunRecord&, const DefectSpec&) override {
        throw OrchestrationError("judge endpoint unavailable");
    }
};

}  // namespace

TEST_CASE("single-action verification matches state and action markers") {
    RunRecord run;
    run.steps.push_back(make_step(0, "home", "to_settings", ActionKind::click, "settings", "d0", "d1"));
    CHECK_FALSE(verify_single_action(run, defect_onr()));

    run.steps.push_back(make_step(1, "home", "to_about", ActionKind::click, "home", "d1", "d1"));
    CHECK(verify_single_action(run, defect_onr()));

    // Same marker on the wrong screen does not count.
    RunRecord elsewhere;
    elsewhere.steps.push_back(make_step(0, "settings", "to_about", ActionKind::click, "settings", "d0", "d0"));
    CHECK_FALSE(verify_single_action(elsewhere, defect_onr()));

    CHECK_THROWS_AS(verify_single_action(run, defect_multi()), InputError);
    RuleJudge judge;
    CHECK_THROWS_AS(judge_multi_action(run, defect_onr(), judge), InputError);
}

TEST_CASE("rule judge accepts a complete repro with a free payload") {
    // The precondition is "type into search_box"; the payload differs from
    // anything the defect mentions and must not matter.
    RunRecord run;
    StepRecord typed = make_step(0, "search", "search_box", ActionKind::type, "search", "d0", "d1");
    typed.action.text = "zebra stripes";
    run.steps.push_back(typed);
    run.steps.push_back(make_step(1, "search", "go_btn", ActionKind::click, "search", "d1", "d1"));

    RuleJudge judge;
    const JudgeVerdict v = judge.judge(run, defect_multi());
    CHECK(v.value == JudgeVerdict::Value::GUI_BUG);
    CHECK(v.precondition_ok);
    CHECK(v.trigger_ok);
    CHECK(v.result_ok);
    CHECK(v.rationale.find("trigger_ok=1") != std::string::npos);
}

TEST_CASE("rule judge rejects runs where the trigger precedes its preconditions") {
    RunRecord run;
    run.steps.push_back(make_step(0, "search", "go_btn", ActionKind::click, "search", "d0", "d0"));
    StepRecord typed = make_step(1, "search", "search_box", ActionKind::type, "search", "d0", "d1");
    typed.action.text = "late";
    run.steps.push_back(typed);

    RuleJudge judge;
    const JudgeVerdict v = judge.judge(run, defect_multi());
    CHECK(v.value == JudgeVerdict::Value::EXECUTOR_ERROR);
    CHECK(v.precondition_ok);
    CHECK_FALSE(v.trigger_ok);
}

TEST_CASE("rule judge checks the observed result against the actual effect") {
    DefectSpec d = defect_multi();

    SUBCASE("none effect requires an unchanged digest") {
        RunRecord run;
        StepRecord typed = make_step(0, "search", "search_box", ActionKind::type, "search", "d0", "d1");
        run.steps.push_back(typed);
        run.steps.push_back(make_step(1, "search", "go_btn", ActionKind::click, "results", "d1", "d2"));
        const JudgeVerdict v = RuleJudge().judge(run, d);
        CHECK(v.trigger_ok);
        CHECK_FALSE(v.result_ok);  // the click did something, so no ONR repro
        CHECK(v.value == JudgeVerdict::Value::EXECUTOR_ERROR);
    }
    SUBCASE("navigate effect requires landing on the actual target") {
        d.fault_mode = FaultMode::NLE;
        d.actual_effect = Effect::navigate("about");
        RunRecord run;
        run.steps.push_back(make_step(0, "search", "search_box", ActionKind::type, "search", "d0", "d1"));
        run.steps.push_back(make_step(1, "search", "go_btn", ActionKind::click, "about", "d1", "d2"));
        CHECK(RuleJudge().judge(run, d).value == JudgeVerdict::Value::GUI_BUG);
    }
    SUBCASE("mutate with a payload binding looks for the typed text on screen") {
        d.fault_mode = FaultMode::UTR;
        d.actual_effect = Effect::mutate("query", "${text}");
        RunRecord run;
        run.steps.push_back(make_step(0, "search", "search_box", ActionKind::type, "search", "d0", "d1"));
        StepRecord trig = make_step(1, "search", "go_btn", ActionKind::click, "search", "d1", "d2");
        trig.action.text = "needle";
        Element label;
        label.id = "query_label";
        label.label = "needle";
        trig.post.elements = {label};
        run.steps.push_back(trig);
        CHECK(RuleJudge().judge(run, d).value == JudgeVerdict::Value::GUI_BUG);
        trig.post.elements[0].label = "haystack";
        run.steps.back() = trig;
        CHECK(RuleJudge().judge(run, d).value == JudgeVerdict::Value::EXECUTOR_ERROR);
    }
}

TEST_CASE("judge verdict always equals the checklist conjunction") {
    // Sweep seeded random mini-runs; the invariant must hold on every one.
    Rng rng(11);
    const std::vector<std::string> elems{"search_box", "go_btn", "to_search"};
    const std::vector<ActionKind> kinds{ActionKind::click, ActionKind::type};
    RuleJudge judge;
    for (int trial = 0; trial < 200; ++trial) {
        RunRecord run;
        const size_t len = rng.below(6);
        for (size_t i = 0; i < len; ++i) {
            const bool changed = rng.below(2) == 0;
            run.steps.push_back(make_step(static_cast<int>(i), "search", elems[rng.below(elems.size())],
                                          kinds[rng.below(kinds.size())], "search",
                                          "d" + std::to_string(i), changed ? "x" : "d" + std::to_string(i)));
        }
        const JudgeVerdict v = judge.judge(run, defect_multi());
        CHECK((v.value == JudgeVerdict::Value::GUI_BUG) ==
              (v.precondition_ok && v.trigger_ok && v.result_ok));
    }
}

TEST_CASE("score_run detects only declared, triggered, verified runs inside the window") {
    const RunRecord hit = run_profile(ProfileKind::oracle_perfect, AgentMode::orchestrated, task_onr(),
                                      {defect_onr()}, 3);
    const TaskResult r = score_run(hit, defect_onr());
    CHECK(r.declared);
    CHECK(r.triggered);
    CHECK(r.detected);
    CHECK(r.trigger_step == hit.trigger_log.front().step_index);

    const RunRecord blind = run_profile(ProfileKind::blind_navigator, AgentMode::baseline, task_onr(),
                                        {defect_onr()}, 3);
    const TaskResult rb = score_run(blind, defect_onr());
    CHECK(rb.triggered);
    CHECK_FALSE(rb.declared);
    CHECK_FALSE(rb.detected);
}

TEST_CASE("a trigger firing after the detection window does not count") {
    RunRecord run;
    run.task_id = "t";
    for (int i = 0; i < 6; ++i)
        run.steps.push_back(make_step(i, "home", "to_settings", ActionKind::click, "settings", "a", "b"));
    run.steps.push_back(make_step(6, "home", "to_about", ActionKind::click, "home", "c", "c"));
    run.declarations.push_back({0, "answer"});
    run.steps[0].declared = true;

    run.trigger_log.push_back({"d-onr", 6});  // 6 > 0 + kDetectionWindow
    CHECK_FALSE(score_run(run, defect_onr()).detected);

    run.trigger_log[0].step_index = 3;  // exactly at the edge of the window
    CHECK(score_run(run, defect_onr()).detected);
}

TEST_CASE("a failing judge backend scores the run as not detected") {
    RunRecord run;
    run.task_id = "t";
    run.steps.push_back(make_step(0, "search", "search_box", ActionKind::type, "search", "d0", "d1"));
    run.steps.push_back(make_step(1, "search", "go_btn", ActionKind::click, "search", "d1", "d1"));
    run.declarations.push_back({1, "answer"});
    run.trigger_log.push_back({"d-multi", 1});

    ThrowingJudge judge;
    const TaskResult r = score_run(run, defect_multi(), &judge);
    CHECK(r.judge_failed);
    CHECK_FALSE(r.detected);
    CHECK(score_run(run, defect_multi()).detected);  // rule fallback succeeds
}

TEST_CASE("score_task averages pass@1 and ORs pass@3") {
    const std::vector<TaskResult> runs{make_result("t", 0, true, true), make_result("t", 1, false, true),
                                       make_result("t", 2, false, false)};
    const PassScore s = score_task(runs);
    CHECK(s.pass1_detected == doctest::Approx(1.0 / 3.0));
    CHECK(s.pass1_declared == doctest::Approx(2.0 / 3.0));
    CHECK(s.pass3_detected);
    CHECK(s.pass3_declared);

    CHECK_THROWS_AS(score_task({}), InputError);
    CHECK_THROWS_AS(score_task({make_result("a", 0, true, true), make_result("b", 0, true, true)}), InputError);
}

TEST_CASE("aggregate computes recall, precision and F1 per cell") {
    // Task A: one run, detected and declared. Task B: two runs, declared once,
    // never detected. Mass: total 2, detected 1, declared 1.5.
    std::vector<TaskResult> results{make_result("a", 0, true, true), make_result("b", 0, false, true),
                                    make_result("b", 1, false, false)};
    const EvalReport report = aggregate(results, PassK::pass1);
    const CellMetrics& overall = report.cells.at("Overall");
    CHECK(overall.total == doctest::Approx(2.0));
    CHECK(overall.recall == doctest::Approx(0.5));
    REQUIRE(overall.precision.has_value());
    CHECK(*overall.precision == doctest::Approx(2.0 / 3.0));
    REQUIRE(overall.f1.has_value());
    CHECK(*overall.f1 == doctest::Approx(4.0 / 7.0));
    CHECK(report.cells.at("UI-ONR").total == doctest::Approx(2.0));
    CHECK_FALSE(report.cells.contains("UX-NLE"));  // empty cells stay absent

    // Under pass@3 task B counts as fully declared, never detected.
    const EvalReport p3 = aggregate(results, PassK::pass3);
    CHECK(p3.cells.at("Overall").declared == doctest::Approx(2.0));
    CHECK(p3.cells.at("Overall").recall == doctest::Approx(0.5));
}

TEST_CASE("aggregate leaves precision absent when nothing was declared") {
    const EvalReport report = aggregate({make_result("a", 0, false, false)}, PassK::pass1);
    const CellMetrics& overall = report.cells.at("Overall");
    CHECK(overall.recall == 0.0);
    CHECK_FALSE(overall.precision.has_value());
    CHECK_FALSE(overall.f1.has_value());
}

TEST_CASE("aggregate rejects duplicated run results") {
    CHECK_THROWS_AS(aggregate({make_result("a", 0, true, true), make_result("a", 0, true, true)}, PassK::pass1),
                    InputError);
}

TEST_CASE("pass@3 detection dominates pass@1 on every seeded result set") {
    Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TaskResult> results;
        const int tasks = 1 + static_cast<int>(rng.below(4));
        for (int t = 0; t < tasks; ++t)
            for (int run = 0; run < 3; ++run) {
                const bool declared = rng.below(2) == 0;
                results.push_back(
                    make_result("t" + std::to_string(t), run, declared && rng.below(2) == 0, declared));
            }
        const double r1 = aggregate(results, PassK::pass1).cells.at("Overall").recall;
        const double r3 = aggregate(results, PassK::pass3).cells.at("Overall").recall;
        CHECK(r3 >= r1 - 1e-12);
    }
}

TEST_CASE("f1 is symmetric, bounded and monotone in each argument") {
    CHECK(f1_score(0.0, 0.0) == 0.0);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double p = rng.fraction();
        const double r = rng.fraction();
        const double f = f1_score(p, r);
        CHECK(f == doctest::Approx(f1_score(r, p)));
        CHECK(f <= std::max(p, r) + 1e-12);
        CHECK(f >= 0.0);
        CHECK(f1_score(p, std::min(1.0, r + 0.1)) >= f - 1e-12);
    }
}

TEST_CASE("published-scale mass reproduces the reference recall and F1") {
    // 10000 single-run tasks, 2695 detected, 6161 declared: recall 0.2695,
    // F1 0.3335, which pins precision near 0.4374.
    std::vector<TaskResult> results;
    results.reserve(10000);
    for (int i = 0; i < 10000; ++i)
        results.push_back(make_result("t" + std::to_string(i), 0, i < 2695, i < 6161));
    const CellMetrics& overall = aggregate(results, PassK::pass1).cells.at("Overall");
    CHECK(overall.recall == doctest::Approx(0.2695));
    REQUIRE(overall.precision.has_value());
    CHECK(*overall.precision == doctest::Approx(0.4374).epsilon(0.001));
    REQUIRE(overall.f1.has_value());
    CHECK(*overall.f1 == doctest::Approx(0.3335).epsilon(0.001));
}

TEST_CASE("report JSON round trips including provenance") {
    EvalReport report = aggregate({make_result("a", 0, true, true), make_result("b", 0, false, true)},
                                  PassK::pass3);
    report.bench_hash = "cafe1234";
    report.seed = 77;
    const json j = report_to_json(report);
    CHECK(j.at("schema") == "report_v1");
    const EvalReport back = report_from_json(j);
    CHECK(report_to_json(back).dump() == j.dump());
    CHECK(back.bench_hash == "cafe1234");
    CHECK(back.seed == 77);

    json bad = j;
    bad["schema"] = "report_v0";
    CHECK_THROWS_AS(report_from_json(bad), ValidationError);
}

TEST_CASE("the rendered table shows two decimals and dashes for absent cells") {
    const EvalReport report = aggregate({make_result("a", 0, true, true)}, PassK::pass1);
    const std::string table = render_report_table(report);
    CHECK(table.find("Pass@1") != std::string::npos);
    CHECK(table.find("UI-ONR") != std::string::npos);
    CHECK(table.find("Overall") != std::string::npos);
    CHECK(table.find("1.00") != std::string::npos);  // recall in the populated cell
    CHECK(table.find("--") != std::string::npos);    // the empty cells
    // Four lines: header plus one per metric.
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}

TEST_CASE("remote judge enforces verdict-checklist consistency") {
    auto serve = [](const json& rsp) {
        auto first = std::make_shared<bool>(true);
        auto stream = std::make_shared<LoopbackStream>([=](const std::string&) -> std::optional<std::string> {
            if (*first) {
                *first = false;
                Handshake h;
                h.role = WireRole::judge;
                return handshake_to_json(h).dump();
            }
            return rsp.dump();
        });
        return std::make_shared<RemoteAdapter>(stream, WireRole::judge);
    };
    RunRecord run;
    run.task_id = "t";

    SUBCASE("consistent verdict parses") {
        RemoteJudge judge(serve(json{
            {"verdict", "GUI_BUG"},
            {"checklist", {{"precondition_ok", true}, {"trigger_ok", true}, {"result_ok", true}}}}));
        const JudgeVerdict v = judge.judge(run, defect_multi());
        CHECK(v.value == JudgeVerdict::Value::GUI_BUG);
    }
    SUBCASE("inconsistent verdict is a protocol error") {
        RemoteJudge judge(serve(json{
            {"verdict", "GUI_BUG"},
            {"checklist", {{"precondition_ok", true}, {"trigger_ok", false}, {"result_ok", true}}}}));
        CHECK_THROWS_AS(judge.judge(run, defect_multi()), ProtocolError);
    }
    SUBCASE("out-of-range verdict is a protocol error") {
        RemoteJudge judge(serve(json{{"verdict", "MAYBE"}, {"checklist", json::object()}}));
        CHECK_THROWS_AS(judge.judge(run, defect_multi()), ProtocolError);
    }
}
