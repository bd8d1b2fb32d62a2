#pragma once

#include <optional>
#include <string>
#include <vector>

#include "guitest/eval.hpp"
#include "guitest/synth.hpp"

namespace guitest {

// Exit codes: stable contract.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;       // execution failure
constexpr int kExitInputMismatch = 2; // invalid input, schema or hash mismatch

struct RunConfig {
    std::string bench_path;
    std::string agent = "oracle";       // oracle | blind | flaky | baseline | remote
    std::string mode = "orchestrated";  // orchestrated | baseline
    std::uint64_t seed = 0;
    int runs = 3;
    int max_steps = 6;
    int budget = 60;
    std::optional<std::string> endpoint;
    int noise_delay = 0;  // 0 disables loading-delay noise
    std::string out_dir;
};

// Configuration echo written into the manifest; out_dir is deliberately
// excluded so re-runs into a different directory stay byte-identical.
json config_echo(const RunConfig& config);

int cmd_run(const RunConfig& config);
int cmd_eval(const std::string& run_dir, const std::string& bench_path, PassK pass_k,
             const std::string& out_path, const std::optional<std::string>& endpoint = std::nullopt);
int cmd_synth(const std::string& app_path, const std::vector<std::string>& defect_paths,
              const std::vector<std::string>& repro_paths, size_t n_pre, size_t n_post, std::uint64_t seed,
              const std::string& out_dir);
int cmd_validate(const std::string& bench_path);
int cmd_render(const std::string& report_path);

// Full argv entry point, callable from tests. argv[0] is the program name.
int run_main(const std::vector<std::string>& argv);

}  // namespace guitest
