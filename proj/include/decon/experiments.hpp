#pragma once

// Dataset-shift stability experiments: confounded training data plus nine
// test sets with shifted (C, Y) moments, four adjustment strategies compared
// by MSE and by the standard deviation of MSE across the shifted test sets
// ("stability error"). Includes the closed-form expected-MSE calculator used
// as the analytic oracle.

#include <cstdint>
#include <string>
#include <vector>

#include "decon/dataset.hpp"
#include "decon/linalg.hpp"

namespace decon {

enum class Variant { FixedVarY, IncreasingVarY };
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

enum class AdjustmentMethod { CausalityAware, Baseline1, Baseline2, NoAdjustment };
const char* method_name(AdjustmentMethod m);
AdjustmentMethod method_from_name(const std::string& name);

// Target second moments of (C, Y) for one data distribution.
struct MomentSpec {
    double var_c = 1.0;
    double cov_yc = 0.8;
    double var_y = 1.0;

    void validate() const;  // InputError unless the 2x2 moment matrix is PD
};

// Error second moments solving the target (C, Y) moments for a given
// confounder->response effect.
struct PhiMoments {
    double cc = 0.0;
    double cy = 0.0;
    double yy = 0.0;
};

// phi_cc = Var(C); phi_cy = Cov(Y,C) - beta_yc Var(C);
// phi_yy = Var(Y) - beta_yc^2 Var(C) - 2 beta_yc phi_cy.
// Throws PsdError when the resulting error covariance is not PSD.
PhiMoments solve_error_moments(const MomentSpec& spec, double beta_yc);

// Feature error covariance: 1 on the diagonal, rho^|i-j| off it.
linalg::Matrix ar1_error_cov(std::size_t p, double rho);

struct ReplicationParams {
    std::vector<double> beta_xy;  // response -> feature effects
    std::vector<double> beta_xc;  // confounder -> feature effects
    double beta_yc = 0.0;
    double rho = 0.0;
};

struct ExperimentConfig {
    std::size_t n_features = 10;
    std::size_t n_train = 1000;
    std::size_t n_test = 1000;
    std::size_t n_reps = 1000;
    MomentSpec train_moments{};
    Variant variant = Variant::FixedVarY;
    std::vector<MomentSpec> test_grid;  // empty -> default_grid(variant)
    std::vector<AdjustmentMethod> methods{
        AdjustmentMethod::CausalityAware, AdjustmentMethod::Baseline1,
        AdjustmentMethod::Baseline2, AdjustmentMethod::NoAdjustment};
    std::uint64_t base_seed = 0;
    std::size_t max_param_retries = 100;

    static std::vector<MomentSpec> default_grid(Variant v);
    std::vector<MomentSpec> effective_grid() const;
    void validate() const;
};

// Parameter draw for one replication, resampled (fresh sub-seed) until the
// error moments are PSD at the training point and every grid point.
struct SampledParams {
    ReplicationParams params;
    std::size_t rejected_draws = 0;
};
SampledParams sample_replication_params(std::uint64_t seed, const ExperimentConfig& config);

// The experiment model as a LinearScm over (C, Y, X1..Xp). Baseline variants
// drop the confounder->feature or confounder->response edges while keeping
// the error covariance (and hence the sampled error terms) identical.
LinearScm experiment_scm(const ReplicationParams& params, const PhiMoments& phi,
                         bool drop_beta_xc, bool drop_beta_yc);

// Three training sets built from one error draw: confounded, baseline 1
// (no confounder->feature effects), baseline 2 (no confounder->response).
struct TrainingSets {
    Dataset confounded;
    Dataset baseline1;
    Dataset baseline2;
};
TrainingSets generate_training_sets(const ReplicationParams& params, const MomentSpec& moments,
                                    std::size_t n, std::uint64_t seed);

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
};

// Closed-form E[MSE] of a fixed linear model on a test population with the
// given moments; adjusted_test selects the causality-aware feature moments
// (functions of Var(Y) only) instead of the confounded ones.
double expected_mse_analytic(const LinearModel& model, const ReplicationParams& params,
                             const MomentSpec& test_moments, bool adjusted_test);

struct MseRecord {
    std::size_t replication = 0;
    AdjustmentMethod method = AdjustmentMethod::CausalityAware;
    std::size_t test_index = 0;  // 1-based, matching the grid order
    double mse = 0.0;
};

struct StabilityRecord {
    std::size_t replication = 0;
    AdjustmentMethod method = AdjustmentMethod::CausalityAware;
    double stability_error = 0.0;
};

struct ReplicationResult {
    std::vector<MseRecord> records;
    std::size_t rejected_draws = 0;
    bool failed = false;
    std::string error;
};

ReplicationResult run_replication(std::size_t rep_index, const ExperimentConfig& config);

struct ResultsTable {
    std::vector<MseRecord> records;
    std::vector<StabilityRecord> stability;
    std::size_t rejected_draws = 0;
    std::vector<std::size_t> failed_replications;
};

// Runs all replications (optionally across a worker pool) and aggregates in
// replication order; output is identical for any thread count.
ResultsTable run_experiment(const ExperimentConfig& config, unsigned threads = 1);

// results.csv / stability.csv / metadata.json in `dir`.
void write_results(const ResultsTable& table, const ExperimentConfig& config,
                   const std::string& dir);

struct LoadedResults {
    std::vector<MseRecord> records;
    std::vector<StabilityRecord> stability;
};
LoadedResults load_results(const std::string& dir);

}  // namespace decon
