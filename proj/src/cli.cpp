#include "guitest/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "guitest/agents.hpp"
#include "guitest/wire.hpp"

namespace fs = std::filesystem;

namespace guitest {

json config_echo(const RunConfig& config) {
    json j{{"bench", config.bench_path},
           {"agent", config.agent},
           {"mode", config.mode},
           {"seed", config.seed},
           {"runs", config.runs},
           {"max_steps", config.max_steps},
           {"budget", config.budget},
           {"noise_delay", config.noise_delay}};
    j["endpoint"] = config.endpoint ? json(*config.endpoint) : json();
    return j;
}

namespace {

BackendSet backends_for(const RunConfig& config, const TaskSpec& task, const AppModel& model,
                        std::uint64_t run_seed) {
    const AgentMode mode = config.mode == "baseline" ? AgentMode::baseline : AgentMode::orchestrated;
    if (config.agent == "oracle")
        return make_scripted_backends(ProfileKind::oracle_perfect, mode, task, model, run_seed);
    if (config.agent == "flaky")
        return make_scripted_backends(ProfileKind::flaky_executor, mode, task, model, run_seed);
    if (config.agent == "blind")
        return make_scripted_backends(ProfileKind::blind_navigator, AgentMode::baseline, task, model, run_seed);
    if (config.agent == "baseline")
        return make_scripted_backends(ProfileKind::oracle_perfect, AgentMode::baseline, task, model, run_seed);
    if (config.agent == "remote") {
        auto endpoint = resolve_endpoint(config.endpoint);
        if (!endpoint) throw InputError("remote agent requires --endpoint or GUITEST_ENDPOINT");
        return make_remote_backends(*endpoint, mode);
    }
    throw InputError("unknown agent '" + config.agent + "'");
}

}  // namespace

int cmd_run(const RunConfig& config) {
    if (config.runs < 1) throw InputError("--runs must be at least 1");
    const BenchBundle bench = load_bench(config.bench_path);
    bench.app.validate();
    const std::string hash = bench_hash(config.bench_path);

    fs::create_directories(fs::path(config.out_dir) / "trajectories");
    NoiseConfig noise;
    noise.enabled = config.noise_delay > 0;
    if (noise.enabled) noise.max_delay = config.noise_delay;
    RunLimits limits{config.max_steps, config.budget};

    json run_entries = json::array();
    for (const auto& task : bench.tasks) {
        const InstrumentedModel inst = inject(bench.app, {bench.defect(task.defect_id)});
        for (int r = 0; r < config.runs; ++r) {
            const std::uint64_t run_seed = derive_seed(config.seed, task.id, r);
            const RunRecord run =
                run_task(task, inst, backends_for(config, task, bench.app, run_seed), run_seed, limits, noise);
            const std::string rel = "trajectories/" + task.id + "-r" + std::to_string(r) + ".jsonl";
            save_run_record(run, (fs::path(config.out_dir) / rel).string());
            run_entries.push_back(json{{"task", task.id}, {"run", r}, {"seed", run_seed}, {"path", rel}});
        }
    }

    json manifest{{"schema", "manifest_v1"},
                  {"bench_hash", hash},
                  {"config", config_echo(config)},
                  {"runs", std::move(run_entries)}};
    std::ofstream out(fs::path(config.out_dir) / "manifest.json");
    if (!out) throw InputError("cannot write manifest in " + config.out_dir);
    out << manifest.dump(2) << "\n";
    std::cout << "wrote " << manifest["runs"].size() << " trajectories to " << config.out_dir << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& run_dir, const std::string& bench_path, PassK pass_k,
             const std::string& out_path, const std::optional<std::string>& endpoint) {
    std::ifstream in(fs::path(run_dir) / "manifest.json");
    if (!in) throw InputError("not a run directory (missing manifest.json): " + run_dir);
    json manifest;
    in >> manifest;
    if (manifest.value("schema", "") != "manifest_v1")
        throw ValidationError("expected schema manifest_v1, got '" + manifest.value("schema", "") + "'");

    const std::string expected = manifest.value("bench_hash", "");
    const std::string actual = bench_hash(bench_path);
    if (expected != actual) {
        std::cerr << "bench hash mismatch: trajectories were produced against " << expected
                  << ", bench at '" << bench_path << "' hashes to " << actual << "\n";
        return kExitInputMismatch;
    }

    const BenchBundle bench = load_bench(bench_path);
    RuleJudge rule_judge;
    std::unique_ptr<RemoteJudge> remote_judge;
    if (auto ep = resolve_endpoint(endpoint)) {
        auto adapter = std::make_shared<RemoteAdapter>(std::make_shared<TcpStream>(*ep), WireRole::judge);
        remote_judge = std::make_unique<RemoteJudge>(std::move(adapter));
    }
    JudgeBackend& judge = remote_judge ? static_cast<JudgeBackend&>(*remote_judge) : rule_judge;

    std::map<std::string, const TaskSpec*> tasks;
    for (const auto& t : bench.tasks) tasks[t.id] = &t;

    std::vector<TaskResult> results;
    for (const auto& entry : manifest.at("runs")) {
        const std::string task_id = entry.at("task").get<std::string>();
        auto it = tasks.find(task_id);
        if (it == tasks.end()) throw InputError("manifest names task '" + task_id + "' missing from bench");
        const RunRecord run = load_run_record((fs::path(run_dir) / entry.at("path").get<std::string>()).string());
        results.push_back(score_run(run, bench.defect(it->second->defect_id), &judge));
    }

    EvalReport report = aggregate(results, pass_k);
    report.bench_hash = actual;
    report.seed = manifest.at("config").value("seed", std::uint64_t{0});
    save_report(report, out_path);
    std::cout << render_report_table(report);
    return kExitOk;
}

int cmd_synth(const std::string& app_path, const std::vector<std::string>& defect_paths,
              const std::vector<std::string>& repro_paths, size_t n_pre, size_t n_post, std::uint64_t seed,
              const std::string& out_dir) {
    if (n_pre < 1 || n_post < 1) throw InputError("--n-pre and --n-post must be at least 1");
    BenchBundle bench;
    bench.app = load_app_model(app_path);
    bench.app.validate();
    for (const auto& p : defect_paths) bench.defects.push_back(load_defect(p));
    inject(bench.app, bench.defects);  // full cross-defect validation

    TemplateIntentGenerator generator;
    json log_entries = json::array();
    for (const auto& p : repro_paths) {
        const ReproductionTrajectory repro = load_repro(p);
        const InstrumentedModel inst = inject(bench.app, {bench.defect(repro.defect_id)});
        bench.tasks.push_back(synthesize_defect_oriented(repro, inst, generator));
        const auto candidates = synthesize_exploration_candidates(repro, inst, generator, n_pre, n_post);
        const FilterResult filtered = filter_candidates(candidates, inst, oracle_validator(inst), seed);
        for (const auto& t : filtered.retained) bench.tasks.push_back(t);
        json entry{{"defect", repro.defect_id},
                   {"candidates", filtered.generated},
                   {"retained", filtered.retained.size()}};
        if (filtered.retained.empty()) entry["warning"] = "no exploration candidate reaches the trigger screen";
        std::cout << repro.defect_id << ": " << filtered.generated << " candidates, "
                  << filtered.retained.size() << " retained\n";
        log_entries.push_back(std::move(entry));
    }

    save_bench(bench, out_dir);
    json log{{"schema", "synth_log_v1"}, {"seed", seed}, {"defects", std::move(log_entries)}};
    std::ofstream out(fs::path(out_dir) / "synth_log.json");
    if (!out) throw InputError("cannot write synth log in " + out_dir);
    out << log.dump(2) << "\n";
    std::cout << "bench bundle written to " << out_dir << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& bench_path) {
    const BenchBundle bench = load_bench(bench_path);
    bench.app.validate();
    for (const auto& d : bench.defects) d.validate();
    inject(bench.app, bench.defects);
    for (const auto& t : bench.tasks) {
        if (t.goals.empty()) throw ValidationError("task '" + t.id + "' has no goals");
        bench.defect(t.defect_id);
    }
    std::cout << "bench OK: app=" << bench.app.app_id << " defects=" << bench.defects.size()
              << " tasks=" << bench.tasks.size() << "\n";
    return kExitOk;
}

int cmd_render(const std::string& report_path) {
    std::cout << render_report_table(load_report(report_path));
    return kExitOk;
}

int run_main(const std::vector<std::string>& argv) {
    CLI::App app{"Deterministic bench for exploratory GUI defect discovery"};
    app.require_subcommand(1);

    RunConfig config;
    auto* run = app.add_subcommand("run", "Execute an agent over a bench bundle");
    run->add_option("--bench", config.bench_path, "Bench bundle directory")->required();
    run->add_option("--agent", config.agent, "oracle | blind | flaky | baseline | remote");
    run->add_option("--mode", config.mode, "orchestrated | baseline");
    run->add_option("--seed", config.seed, "Root seed");
    run->add_option("--runs", config.runs, "Independent runs per task");
    run->add_option("--max-steps", config.max_steps, "Per-subtask step cap");
    run->add_option("--budget", config.budget, "Global action budget per run");
    run->add_option("--out", config.out_dir, "Output directory")->required();
    std::string endpoint;
    run->add_option("--endpoint", endpoint, "Remote agent endpoint host:port");
    run->add_option("--noise-delay", config.noise_delay, "Max loading delay in steps (0 = off)");

    std::string eval_dir, eval_bench, eval_out = "report.json", pass_k = "pass1", eval_endpoint;
    auto* eval = app.add_subcommand("eval", "Score trajectories against a bench");
    eval->add_option("trajectories", eval_dir, "Run directory with manifest.json")->required();
    eval->add_option("--bench", eval_bench, "Bench bundle directory")->required();
    eval->add_option("--pass-k", pass_k, "pass1 | pass3");
    eval->add_option("--out", eval_out, "Report output path");
    eval->add_option("--endpoint", eval_endpoint, "Remote judge endpoint host:port");

    std::string synth_app, synth_out;
    std::vector<std::string> synth_defects, synth_repros;
    std::uint64_t synth_seed = 0;
    size_t n_pre = 5, n_post = 3;
    auto* synth = app.add_subcommand("synth", "Synthesize a bench bundle from repro trajectories");
    synth->add_option("--app", synth_app, "App model file")->required();
    synth->add_option("--defects", synth_defects, "Defect files")->required();
    synth->add_option("--repro", synth_repros, "Reproduction trajectory files")->required();
    synth->add_option("--n-pre", n_pre, "Pre-defect intents per defect");
    synth->add_option("--n-post", n_post, "Post-defect intents per defect");
    synth->add_option("--seed", synth_seed, "Validation seed");
    synth->add_option("--out", synth_out, "Bundle output directory")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Validate a bench bundle");
    validate->add_option("bench", validate_path, "Bench bundle directory")->required();

    std::string render_path;
    auto* render = app.add_subcommand("render", "Render a report as a plain-text table");
    render->add_option("report", render_path, "Report file (schema report_v1)")->required();

    std::vector<std::string> args(argv.begin() + 1, argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInputMismatch;
    }

    try {
        if (run->parsed()) {
            if (!endpoint.empty()) config.endpoint = endpoint;
            return cmd_run(config);
        }
        if (eval->parsed())
            return cmd_eval(eval_dir, eval_bench, pass_k_from(pass_k), eval_out,
                            eval_endpoint.empty() ? std::nullopt : std::optional<std::string>(eval_endpoint));
        if (synth->parsed())
            return cmd_synth(synth_app, synth_defects, synth_repros, n_pre, n_post, synth_seed, synth_out);
        if (validate->parsed()) return cmd_validate(validate_path);
        if (render->parsed()) return cmd_render(render_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputMismatch;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputMismatch;
    } catch (const GuitestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitInputMismatch;
}

}  // namespace guitest
