#include <CLI11.hpp>

#include "decon/cli_commands.hpp"
#include "decon/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Linear-SCM simulation, causality-aware counterfactual adjustment, and "
                 "dataset-shift stability experiments"};
    app.set_version_flag("--version", decon::kVersion);
    app.require_subcommand(1);

    decon::cli::SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate a dataset from an SCM file");
    simulate->add_option("scm", sim.scm_path, "SCM JSON file (decon-scm/1)")->required();
    simulate->add_option("--n", sim.n, "sample count")->required();
    simulate->add_option("--seed", sim.seed, "random seed")->default_val(0);
    simulate->add_option("--out", sim.out_csv, "output CSV path")->required();

    decon::cli::AdjustOptions adj;
    CLI::App* adjust = app.add_subcommand("adjust", "Generate counterfactual features");
    adjust->add_option("--train", adj.train_csv, "labeled training CSV")->required();
    adjust->add_option("--test", adj.test_csv, "unlabeled test CSV (direct target only)");
    adjust->add_option("--target", adj.target, "direct|indirect|confounding")
        ->default_val("direct");
    adjust->add_option("--out", adj.out_dir, "output directory")->required();
    adjust->add_flag("--recenter-test", adj.recenter_test,
                     "recenter adjusted test features onto the adjusted training mean");

    decon::cli::ExperimentOptions exp;
    CLI::App* experiment =
        app.add_subcommand("experiment", "Run the dataset-shift stability experiment");
    experiment->add_option("--variant", exp.variant, "fixed-vary|increasing-vary");
    experiment->add_option("--reps", exp.reps, "replication count");
    experiment->add_option("--n-features", exp.n_features, "feature count");
    experiment->add_option("--n-train", exp.n_train, "training samples per replication");
    experiment->add_option("--n-test", exp.n_test, "test samples per test set");
    experiment->add_option("--seed", exp.seed, "base seed");
    experiment->add_option("--threads", exp.threads,
                           "worker threads (default: DECON_THREADS or hardware)");
    experiment->add_option("--config", exp.config_path, "JSON config file");
    experiment->add_option("--out", exp.out_dir, "output directory")->required();

    decon::cli::ReportOptions rep;
    CLI::App* report = app.add_subcommand("report", "Summarize experiment results");
    report->add_option("--results", rep.results_dir, "directory with results.csv/stability.csv")
        ->required();
    report->add_option("--out", rep.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) return decon::cli::cmd_simulate(sim);
    if (adjust->parsed()) return decon::cli::cmd_adjust(adj);
    if (experiment->parsed()) return decon::cli::cmd_experiment(exp);
    if (report->parsed()) return decon::cli::cmd_report(rep);
    return 1;
}
