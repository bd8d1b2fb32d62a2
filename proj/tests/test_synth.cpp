#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fixtures.hpp"
#include "guitest/eval.hpp"
#include "guitest/synth.hpp"

using namespace guitest;
using namespace guitest::fixtures;
namespace fs = std::filesystem;

namespace {

Action click_center(int y) {
    Action a;
    a.kind = ActionKind::click;
    a.point = Point{540, y + 100};  // fixture elements are Rect{40, y, 1000, 200}
    return a;
}

ReproductionTrajectory repro_onr() {
    ReproductionTrajectory r;
    r.defect_id = "d-onr";
    r.actions = {click_center(1200)};  // to_about
    return r;
}

ReproductionTrajectory repro_multi() {
    ReproductionTrajectory r;
    r.defect_id = "d-multi";
    Action typed = click_center(200);  // search_box
    typed.kind = ActionKind::type;
    typed.text = "route66";
    r.actions = {click_center(950), typed, click_center(700)};  // to_search, type, go_btn
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("guitest-synth-" + std::to_string(::getpid()) + "-" +
                                                  std::to_string(counter++))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

}  // namespace

TEST_CASE("repro JSON round trips and rejects foreign schemas") {
    const ReproductionTrajectory r = repro_multi();
    const json j = repro_to_json(r);
    CHECK(j.at("schema") == "repro_v1");
    const ReproductionTrajectory back = repro_from_json(j);
    CHECK(repro_to_json(back).dump() == j.dump());

    json bad = j;
    bad["schema"] = "repro_v2";
    CHECK_THROWS_AS(repro_from_json(bad), ValidationError);
}

TEST_CASE("replay reports the trigger step and screen") {
    const InstrumentedModel inst = inject(demo_app(), {defect_multi()});
    const ReplayOutcome out = replay_repro(repro_multi(), inst);
    CHECK(out.triggered);
    CHECK(out.trigger_step == 2);
    CHECK(out.trigger_screen == "search");
    CHECK(out.events.size() == 3);
}

TEST_CASE("repro validation rejects empty, unknown, non-triggering and early-trigger repros") {
    const InstrumentedModel inst = inject(demo_app(), {defect_onr()});

    ReproductionTrajectory empty;
    empty.defect_id = "d-onr";
    CHECK_THROWS_AS(validate_repro(empty, inst), ValidationError);

    ReproductionTrajectory unknown = repro_onr();
    unknown.defect_id = "d-ghost";
    CHECK_THROWS_AS(validate_repro(unknown, inst), ValidationError);

    ReproductionTrajectory wrong = repro_onr();
    wrong.actions = {click_center(200)};  // to_settings, never triggers d-onr
    CHECK_THROWS_AS(validate_repro(wrong, inst), ValidationError);

    ReproductionTrajectory early = repro_onr();
    Action back;
    back.kind = ActionKind::press_back;
    early.actions.push_back(back);  // trigger is no longer the final action
    CHECK_THROWS_AS(validate_repro(early, inst), ValidationError);

    CHECK_NOTHROW(validate_repro(repro_onr(), inst));
}

TEST_CASE("defect-oriented synthesis abstracts the repro into instruction and goals") {
    const InstrumentedModel inst = inject(demo_app(), {defect_multi()});
    TemplateIntentGenerator gen;
    const TaskSpec task = synthesize_defect_oriented(repro_multi(), inst, gen);

    CHECK(task.id == "d-multi-repro");
    CHECK(task.kind == TaskKind::defect_oriented);
    CHECK(task.defect_id == "d-multi");
    // The instruction narrates the expected path, never the defect.
    CHECK(task.instruction.find("Search") != std::string::npos);
    CHECK(task.instruction.find("route66") != std::string::npos);
    CHECK(task.instruction.find(", then ") != std::string::npos);
    CHECK(task.instruction.find("defect") == std::string::npos);

    REQUIRE(task.goals.size() == 3);
    CHECK(task.goals[0] == GoalPredicate::on_screen("search"));
    CHECK(task.goals[1] == GoalPredicate::label_is("search", "query_label", "route66"));
    CHECK(task.goals[2] == GoalPredicate::on_screen("results"));
}

TEST_CASE("a synthesized task re-triggers its defect under the validation agent") {
    const InstrumentedModel inst = inject(demo_app(), {defect_multi()});
    TemplateIntentGenerator gen;
    const TaskSpec task = synthesize_defect_oriented(repro_multi(), inst, gen);

    const std::uint64_t seed = 11;
    const RunRecord run = run_task(task, inst, oracle_validator(inst)(task, seed), seed);
    REQUIRE_FALSE(run.trigger_log.empty());
    CHECK(run.trigger_log.front().defect_id == "d-multi");
    CHECK(score_run(run, defect_multi()).detected);
}

TEST_CASE("ONR repros fall back to the trigger screen goal") {
    const InstrumentedModel inst = inject(demo_app(), {defect_onr()});
    TemplateIntentGenerator gen;
    const TaskSpec task = synthesize_defect_oriented(repro_onr(), inst, gen);
    REQUIRE(task.goals.size() == 1);
    CHECK(task.goals[0] == GoalPredicate::on_screen("about"));
    CHECK(task.instruction.find("About") != std::string::npos);
}

TEST_CASE("exploration synthesis yields exactly the n_pre x n_post grid") {
    const InstrumentedModel inst = inject(demo_app(), {defect_reader()});
    ReproductionTrajectory repro;
    repro.defect_id = "d-reader";
    repro.actions = {click_center(700), click_center(200), click_center(200)};  // library, reader, next_page
    TemplateIntentGenerator gen;

    const auto candidates = synthesize_exploration_candidates(repro, inst, gen, 5, 3);
    REQUIRE(candidates.size() == 15);
    CHECK(candidates.front().id == "d-reader-x0-0");
    CHECK(candidates.back().id == "d-reader-x4-2");
    for (const auto& t : candidates) {
        CHECK(t.kind == TaskKind::exploration_oriented);
        CHECK(t.goals.size() == 2);
        REQUIRE(t.pre_intent.has_value());
        REQUIRE(t.post_intent.has_value());
        CHECK(t.instruction.find(*t.pre_intent) == 0);
    }

    CHECK(synthesize_exploration_candidates(repro, inst, gen, 1, 1).size() == 1);
    // The demo app has 8 screens, so 9 pre-defect intents cannot be produced.
    CHECK_THROWS_AS(synthesize_exploration_candidates(repro, inst, gen, 9, 1), ValidationError);
    CHECK_THROWS_AS(synthesize_exploration_candidates(repro, inst, gen, 0, 1), InputError);
}

TEST_CASE("the filter keeps only candidates whose validation reaches the trigger screen") {
    const InstrumentedModel inst = inject(demo_app(), {defect_reader()});
    ReproductionTrajectory repro;
    repro.defect_id = "d-reader";
    repro.actions = {click_center(700), click_center(200), click_center(200)};
    TemplateIntentGenerator gen;
    const auto candidates = synthesize_exploration_candidates(repro, inst, gen, 5, 3);

    const FilterResult result = filter_candidates(candidates, inst, oracle_validator(inst), 7);
    CHECK(result.generated == 15);
    // The reader screen is a bottleneck: only runs steered there survive.
    CHECK_FALSE(result.retained.empty());
    CHECK(result.retained.size() < result.generated);
    for (const auto& t : result.retained) {
        const bool names_reader = t.goals[0] == GoalPredicate::on_screen("reader") ||
                                  t.goals[1] == GoalPredicate::on_screen("reader");
        CHECK(names_reader);
        CHECK(result.trajectory_hash.contains(t.id));
        CHECK(result.trajectory_hash.at(t.id).size() == 16);  // fixed-width hex digest
    }

    // Same seed, same retained set and hashes.
    const FilterResult again = filter_candidates(candidates, inst, oracle_validator(inst), 7);
    REQUIRE(again.retained.size() == result.retained.size());
    CHECK(again.trajectory_hash == result.trajectory_hash);
}

TEST_CASE("bench bundles round trip through the filesystem with digest checks") {
    TempDir dir;
    BenchBundle bench;
    bench.app = demo_app();
    bench.defects = {defect_onr(), defect_multi()};
    bench.tasks = {task_onr(), task_multi()};
    save_bench(bench, dir.path.string());

    const std::string hash = bench_hash(dir.path.string());
    CHECK(hash.size() == 16);

    const BenchBundle back = load_bench(dir.path.string());
    CHECK(back.app.app_id == "demo-notes");
    REQUIRE(back.defects.size() == 2);
    REQUIRE(back.tasks.size() == 2);
    CHECK(back.defect("d-multi").trigger.element_id == "go_btn");
    CHECK_THROWS_AS(back.defect("d-ghost"), InputError);

    // Re-saving identical content keeps the hash stable.
    save_bench(back, dir.path.string());
    CHECK(bench_hash(dir.path.string()) == hash);
}

TEST_CASE("a tampered bench file is rejected on load") {
    TempDir dir;
    BenchBundle bench;
    bench.app = demo_app();
    bench.defects = {defect_onr()};
    bench.tasks = {task_onr()};
    save_bench(bench, dir.path.string());

    {
        std::ofstream out(dir.path / "defects" / "d-onr.json", std::ios::app);
        out << "\n";
    }
    CHECK_THROWS_AS(load_bench(dir.path.string()), InputError);
    CHECK_THROWS_AS(load_bench((dir.path / "nope").string()), InputError);
}
