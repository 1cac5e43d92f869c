#pragma once

// Command implementations behind the CLI binary, exposed as a library so the
// end-to-end tests can drive them in-process as well as through the
// executable. Each command writes a run manifest before any output and maps
// errors to the documented exit codes (0 ok, 2 model validation, 3 adjustment
// misuse, 4 file/schema, 1 other).

#include <cstdint>
#include <optional>
#include <string>

namespace decon::cli {

struct SimulateOptions {
    std::string scm_path;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out_csv;
};
int cmd_simulate(const SimulateOptions& opt);

struct AdjustOptions {
    std::string train_csv;
    std::string test_csv;  // empty: train-only adjustment
    std::string target = "direct";
    std::string out_dir;
    bool recenter_test = false;
    std::uint64_t seed = 0;  // recorded in the manifest; adjustment is deterministic
};
int cmd_adjust(const AdjustOptions& opt);

struct ExperimentOptions {
    std::string variant;  // empty -> config file / default
    std::optional<std::size_t> reps;
    std::optional<std::size_t> n_features;
    std::optional<std::size_t> n_train;
    std::optional<std::size_t> n_test;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;  // fallback: DECON_THREADS, then hardware
    std::string config_path;          // optional JSON config
    std::string out_dir;
};
int cmd_experiment(const ExperimentOptions& opt);

struct ReportOptions {
    std::string results_dir;
    std::string out_dir;
};
int cmd_report(const ReportOptions& opt);

}  // namespace decon::cli
