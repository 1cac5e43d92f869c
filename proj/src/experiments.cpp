#include "decon/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "decon/counterfactual.hpp"
#include "decon/errors.hpp"
#include "decon/kernels.hpp"
#include "decon/regression.hpp"
#include "decon/rng.hpp"
#include "decon/scm.hpp"
#include "decon/stats.hpp"
#include "decon/version.hpp"

namespace decon {

const char* variant_name(Variant v) {
    return v == Variant::FixedVarY ? "fixed-vary" : "increasing-vary";
}

Variant variant_from_name(const std::string& name) {
    if (name == "fixed-vary") return Variant::FixedVarY;
    if (name == "increasing-vary") return Variant::IncreasingVarY;
    throw InputError("unknown variant '" + name + "' (fixed-vary|increasing-vary)");
}

const char* method_name(AdjustmentMethod m) {
    switch (m) {
        case AdjustmentMethod::CausalityAware:
            return "causality_aware";
        case AdjustmentMethod::Baseline1:
            return "baseline1";
        case AdjustmentMethod::Baseline2:
            return "baseline2";
        case AdjustmentMethod::NoAdjustment:
            return "no_adjustment";
    }
    return "unknown";
}

AdjustmentMethod method_from_name(const std::string& name) {
    if (name == "causality_aware") return AdjustmentMethod::CausalityAware;
    if (name == "baseline1") return AdjustmentMethod::Baseline1;
    if (name == "baseline2") return AdjustmentMethod::Baseline2;
    if (name == "no_adjustment") return AdjustmentMethod::NoAdjustment;
    throw SchemaError("unknown adjustment method '" + name + "'");
}

void MomentSpec::validate() const {
    if (!(var_c > 0.0) || !(var_y > 0.0) || !(var_c * var_y - cov_yc * cov_yc > 0.0))
        throw InputError("moment spec (var_c=" + std::to_string(var_c) +
                         ", cov_yc=" + std::to_string(cov_yc) +
                         ", var_y=" + std::to_string(var_y) + ") is not positive definite");
}

PhiMoments solve_error_moments(const MomentSpec& spec, double beta_yc) {
    PhiMoments phi;
    phi.cc = spec.var_c;
    phi.cy = spec.cov_yc - beta_yc * spec.var_c;
    phi.yy = spec.var_y - beta_yc * beta_yc * spec.var_c - 2.0 * beta_yc * phi.cy;
    const double det = phi.cc * phi.yy - phi.cy * phi.cy;
    const double scale = std::max({1.0, std::abs(phi.cc), std::abs(phi.yy)});
    if (phi.cc < -1e-12 * scale || phi.yy < -1e-12 * scale || det < -1e-12 * scale * scale)
        throw PsdError("error moments for beta_yc=" + std::to_string(beta_yc) +
                       " are not PSD (phi_yy=" + std::to_string(phi.yy) +
                       ", det=" + std::to_string(det) + ")");
    return phi;
}

linalg::Matrix ar1_error_cov(std::size_t p, double rho) {
    if (!(std::abs(rho) < 1.0)) throw InputError("ar1_error_cov requires |rho| < 1");
    linalg::Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            m(i, j) = (i == j) ? 1.0
                               : std::pow(rho, std::abs(static_cast<double>(i) -
                                                        static_cast<double>(j)));
    return m;
}

std::vector<MomentSpec> ExperimentConfig::default_grid(Variant v) {
    std::vector<MomentSpec> grid(9);
    for (std::size_t k = 0; k < 9; ++k) {
        grid[k].cov_yc = 0.8 - 0.2 * static_cast<double>(k);
        if (v == Variant::FixedVarY) {
            grid[k].var_c = 1.0 + 0.25 * static_cast<double>(k);
            grid[k].var_y = 1.0;
        } else {
            grid[k].var_c = 1.0;
            grid[k].var_y = 1.0 + 0.25 * static_cast<double>(k);
        }
    }
    return grid;
}

std::vector<MomentSpec> ExperimentConfig::effective_grid() const {
    return test_grid.empty() ? default_grid(variant) : test_grid;
}

void ExperimentConfig::validate() const {
    if (n_features == 0) throw InputError("n_features must be positive");
    if (n_reps == 0) throw InputError("n_reps must be positive");
    if (n_train <= n_features + 2 || n_test == 0)
        throw InputError("training size too small for the regression fits");
    train_moments.validate();
    const std::vector<MomentSpec> grid = effective_grid();
    if (grid.size() != 9)
        throw InputError("test grid must contain 9 moment specs, got " +
                         std::to_string(grid.size()));
    for (const MomentSpec& spec : grid) spec.validate();
    if (methods.empty()) throw InputError("no adjustment methods selected");
}

SampledParams sample_replication_params(std::uint64_t seed, const ExperimentConfig& config) {
    const std::vector<MomentSpec> grid = config.effective_grid();
    for (std::size_t attempt = 0; attempt <= config.max_param_retries; ++attempt) {
        rng::Stream stream(rng::derive_seed(seed, attempt), rng::tag("params"));
        ReplicationParams p;
        p.beta_xy.resize(config.n_features);
        p.beta_xc.resize(config.n_features);
        for (double& b : p.beta_xy) b = stream.next_uniform(-1.0, 1.0);
        for (double& b : p.beta_xc) b = stream.next_uniform(-1.0, 1.0);
        p.beta_yc = stream.next_uniform(-1.0, 1.0);
        p.rho = stream.next_uniform(-0.5, 0.5);

        bool ok = true;
        try {
            solve_error_moments(config.train_moments, p.beta_yc);
            for (const MomentSpec& spec : grid) solve_error_moments(spec, p.beta_yc);
        } catch (const PsdError&) {
            ok = false;
        }
        if (ok) return {std::move(p), attempt};
    }
    throw ParamSearchError("no PSD-feasible parameter draw after " +
                           std::to_string(config.max_param_retries) + " retries");
}

LinearScm experiment_scm(const ReplicationParams& params, const PhiMoments& phi,
                         bool drop_beta_xc, bool drop_beta_yc) {
    const std::size_t p = params.beta_xy.size();
    if (params.beta_xc.size() != p) throw ShapeError("beta_xy and beta_xc lengths disagree");

    LinearScm scm;
    scm.names = {"C", "Y"};
    scm.roles = {Role::Confounder, Role::Response};
    for (std::size_t j = 0; j < p; ++j) {
        scm.names.push_back("X" + std::to_string(j + 1));
        scm.roles.push_back(Role::Feature);
    }
    const std::size_t total = p + 2;
    scm.theta = linalg::Matrix(total, total);
    scm.mu.assign(total, 0.0);
    if (!drop_beta_yc) scm.theta(1, 0) = params.beta_yc;
    for (std::size_t j = 0; j < p; ++j) {
        scm.theta(2 + j, 1) = params.beta_xy[j];
        if (!drop_beta_xc) scm.theta(2 + j, 0) = params.beta_xc[j];
    }

    scm.error_cov = linalg::Matrix(total, total);
    scm.error_cov(0, 0) = phi.cc;
    scm.error_cov(0, 1) = phi.cy;
    scm.error_cov(1, 0) = phi.cy;
    scm.error_cov(1, 1) = phi.yy;
    const linalg::Matrix ux = ar1_error_cov(p, params.rho);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) scm.error_cov(2 + i, 2 + j) = ux(i, j);
    return scm;
}

TrainingSets generate_training_sets(const ReplicationParams& params, const MomentSpec& moments,
                                    std::size_t n, std::uint64_t seed) {
    const PhiMoments phi = solve_error_moments(moments, params.beta_yc);
    // One seed, three structural variants: identical error covariance means the
    // underlying draws coincide term by term.
    TrainingSets out{simulate(experiment_scm(params, phi, false, false), n, seed),
                     simulate(experiment_scm(params, phi, true, false), n, seed),
                     simulate(experiment_scm(params, phi, false, true), n, seed)};
    return out;
}

double expected_mse_analytic(const LinearModel& model, const ReplicationParams& params,
                             const MomentSpec& test_moments, bool adjusted_test) {
    const std::size_t p = params.beta_xy.size();
    if (model.coefficients.size() != p)
        throw ShapeError("model has " + std::to_string(model.coefficients.size()) +
                         " coefficients for " + std::to_string(p) + " features");
    test_moments.validate();

    const double vy = test_moments.var_y;
    const double vc = test_moments.var_c;
    const double cyc = test_moments.cov_yc;

    auto var_x = [&](std::size_t j) {
        const double bxy = params.beta_xy[j], bxc = params.beta_xc[j];
        if (adjusted_test) return 1.0 + bxy * bxy * vy;
        return 1.0 + bxy * bxy * vy + bxc * bxc * vc + 2.0 * bxy * bxc * cyc;
    };
    auto cov_xx = [&](std::size_t j, std::size_t k) {
        const double bxyj = params.beta_xy[j], bxyk = params.beta_xy[k];
        const double bxcj = params.beta_xc[j], bxck = params.beta_xc[k];
        const double u = std::pow(params.rho, std::abs(static_cast<double>(j) -
                                                       static_cast<double>(k)));
        if (adjusted_test) return bxyj * bxyk * vy + u;
        return bxyj * bxyk * vy + (bxyj * bxck + bxyk * bxcj) * cyc + bxcj * bxck * vc + u;
    };
    auto cov_xy = [&](std::size_t j) {
        if (adjusted_test) return params.beta_xy[j] * vy;
        return params.beta_xy[j] * vy + params.beta_xc[j] * cyc;
    };

    double e = vy + model.intercept * model.intercept;
    for (std::size_t j = 0; j < p; ++j) {
        const double wj = model.coefficients[j];
        e += wj * wj * var_x(j) - 2.0 * wj * cov_xy(j);
        for (std::size_t k = j + 1; k < p; ++k)
            e += 2.0 * wj * model.coefficients[k] * cov_xx(j, k);
    }
    return e;
}

namespace {

std::vector<std::span<const double>> feature_columns(const Dataset& d,
                                                     const std::vector<std::string>& names) {
    std::vector<std::span<const double>> cols;
    cols.reserve(names.size());
    for (const std::string& n : names) cols.push_back(d.column_by_name(n));
    return cols;
}

double model_mse(const LinearModel& model, const std::vector<std::span<const double>>& cols,
                 std::span<const double> y) {
    const std::size_t n = y.size();
    std::vector<double> yhat(n, model.intercept);
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (model.coefficients[j] != 0.0)
            kernels::axpy(model.coefficients[j], cols[j].data(), yhat.data(), n);
    return kernels::sq_diff_sum(yhat.data(), y.data(), n) / static_cast<double>(n);
}

LinearModel fit_prediction_model(const std::vector<std::span<const double>>& cols,
                                 std::span<const double> y) {
    const OlsFit fit = ols(cols, y);
    return {fit.intercept, fit.coefficients};
}

}  // namespace

ReplicationResult run_replication(std::size_t rep_index, const ExperimentConfig& config) {
    config.validate();
    ReplicationResult out;
    const std::uint64_t rep_seed = rng::derive_seed(config.base_seed, rep_index);
    const std::vector<MomentSpec> grid = config.effective_grid();

    try {
        const SampledParams sampled =
            sample_replication_params(rng::derive_seed(rep_seed, rng::tag("params")), config);
        const ReplicationParams& params = sampled.params;
        out.rejected_draws = sampled.rejected_draws;

        const TrainingSets trains = generate_training_sets(
            params, config.train_moments, config.n_train, rng::derive_seed(rep_seed, rng::tag("train")));

        std::vector<Dataset> tests;
        tests.reserve(grid.size());
        const std::uint64_t test_seed_base = rng::derive_seed(rep_seed, rng::tag("test"));
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const PhiMoments phi = solve_error_moments(grid[k], params.beta_yc);
            tests.push_back(simulate(experiment_scm(params, phi, false, false), config.n_test,
                                     rng::derive_seed(test_seed_base, k)));
        }

        std::vector<std::string> feature_names;
        for (std::size_t j = 0; j < config.n_features; ++j)
            feature_names.push_back("X" + std::to_string(j + 1));

        for (const AdjustmentMethod method : config.methods) {
            LinearModel model;
            std::vector<Dataset> adjusted_tests;  // only for the causality-aware route

            switch (method) {
                case AdjustmentMethod::CausalityAware: {
                    Dataset adjusted_train;
                    bool have_train = false;
                    for (const Dataset& test : tests) {
                        auto [xtr, xts] = algorithm1_adjust(trains.confounded, test);
                        if (!have_train) {
                            adjusted_train = std::move(xtr);
                            have_train = true;
                        }
                        adjusted_tests.push_back(std::move(xts));
                    }
                    model = fit_prediction_model(
                        feature_columns(adjusted_train, feature_names),
                        trains.confounded.column_by_name("Y"));
                    break;
                }
                case AdjustmentMethod::Baseline1:
                    model = fit_prediction_model(feature_columns(trains.baseline1, feature_names),
                                                 trains.baseline1.column_by_name("Y"));
                    break;
                case AdjustmentMethod::Baseline2:
                    model = fit_prediction_model(feature_columns(trains.baseline2, feature_names),
                                                 trains.baseline2.column_by_name("Y"));
                    break;
                case AdjustmentMethod::NoAdjustment:
                    model = fit_prediction_model(feature_columns(trains.confounded, feature_names),
                                                 trains.confounded.column_by_name("Y"));
                    break;
            }

            for (std::size_t k = 0; k < tests.size(); ++k) {
                const Dataset& scoring =
                    (method == AdjustmentMethod::CausalityAware) ? adjusted_tests[k] : tests[k];
                const double mse = model_mse(model, feature_columns(scoring, feature_names),
                                             tests[k].column_by_name("Y"));
                out.records.push_back({rep_index, method, k + 1, mse});
            }
        }
    } catch (const Error& e) {
        out.failed = true;
        out.error = e.what();
        out.records.clear();
    }
    return out;
}

ResultsTable run_experiment(const ExperimentConfig& config, unsigned threads) {
    config.validate();
    const std::size_t reps = config.n_reps;
    std::vector<ReplicationResult> results(reps);

    if (threads <= 1) {
        for (std::size_t r = 0; r < reps; ++r) results[r] = run_replication(r, config);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t r = next.fetch_add(1);
                if (r >= reps) return;
                results[r] = run_replication(r, config);
            }
        };
        std::vector<std::thread> pool;
        const unsigned count = std::min<unsigned>(threads, static_cast<unsigned>(reps));
        pool.reserve(count);
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ResultsTable table;
    for (std::size_t r = 0; r < reps; ++r) {
        table.rejected_draws += results[r].rejected_draws;
        if (results[r].failed) {
            table.failed_replications.push_back(r);
            continue;
        }
        table.records.insert(table.records.end(), results[r].records.begin(),
                             results[r].records.end());
        for (const AdjustmentMethod method : config.methods) {
            std::vector<double> mses;
            for (const MseRecord& rec : results[r].records)
                if (rec.method == method) mses.push_back(rec.mse);
            if (mses.size() > 1)
                table.stability.push_back({r, method, stats::sample_sd(mses)});
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Results files
// ---------------------------------------------------------------------------

namespace {

void format_double(double v, std::string& out) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

nlohmann::json moment_spec_json(const MomentSpec& m) {
    return {{"var_c", m.var_c}, {"cov_yc", m.cov_yc}, {"var_y", m.var_y}};
}

}  // namespace

void write_results(const ResultsTable& table, const ExperimentConfig& config,
                   const std::string& dir) {
    {
        std::ofstream os(dir + "/results.csv", std::ios::binary);
        if (!os) throw SchemaError("cannot open '" + dir + "/results.csv' for writing");
        os << "replication,method,test_index,mse\n";
        std::string line;
        for (const MseRecord& r : table.records) {
            line.clear();
            line += std::to_string(r.replication);
            line += ',';
            line += method_name(r.method);
            line += ',';
            line += std::to_string(r.test_index);
            line += ',';
            format_double(r.mse, line);
            line += '\n';
            os << line;
        }
    }
    {
        std::ofstream os(dir + "/stability.csv", std::ios::binary);
        if (!os) throw SchemaError("cannot open '" + dir + "/stability.csv' for writing");
        os << "replication,method,stability_error\n";
        std::string line;
        for (const StabilityRecord& r : table.stability) {
            line.clear();
            line += std::to_string(r.replication);
            line += ',';
            line += method_name(r.method);
            line += ',';
            format_double(r.stability_error, line);
            line += '\n';
            os << line;
        }
    }
    {
        nlohmann::json j;
        j["library_version"] = kVersion;
        j["rejected_draws"] = table.rejected_draws;
        j["failed_replications"] = table.failed_replications;
        nlohmann::json cfg;
        cfg["n_features"] = config.n_features;
        cfg["n_train"] = config.n_train;
        cfg["n_test"] = config.n_test;
        cfg["n_reps"] = config.n_reps;
        cfg["variant"] = variant_name(config.variant);
        cfg["base_seed"] = config.base_seed;
        cfg["train_moments"] = moment_spec_json(config.train_moments);
        nlohmann::json grid = nlohmann::json::array();
        for (const MomentSpec& m : config.effective_grid()) grid.push_back(moment_spec_json(m));
        cfg["test_grid"] = grid;
        nlohmann::json methods = nlohmann::json::array();
        for (const AdjustmentMethod m : config.methods) methods.push_back(method_name(m));
        cfg["methods"] = methods;
        j["config"] = cfg;
        std::ofstream os(dir + "/metadata.json", std::ios::binary);
        if (!os) throw SchemaError("cannot open '" + dir + "/metadata.json' for writing");
        os << j.dump(2) << "\n";
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SchemaError("cannot parse number '" + s + "'");
    return v;
}

std::size_t parse_index(const std::string& s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SchemaError("cannot parse index '" + s + "'");
    return v;
}

}  // namespace

LoadedResults load_results(const std::string& dir) {
    LoadedResults out;
    {
        std::ifstream is(dir + "/results.csv", std::ios::binary);
        if (!is) throw SchemaError("cannot open '" + dir + "/results.csv'");
        std::string line;
        if (!std::getline(is, line) ||
            split_line(line) != std::vector<std::string>{"replication", "method", "test_index", "mse"})
            throw SchemaError("results.csv: unexpected header");
        while (std::getline(is, line)) {
            if (line.empty() || line == "\r") continue;
            const std::vector<std::string> cells = split_line(line);
            if (cells.size() != 4) throw SchemaError("results.csv: malformed row");
            out.records.push_back({parse_index(cells[0]), method_from_name(cells[1]),
                                   parse_index(cells[2]), parse_double(cells[3])});
        }
    }
    {
        std::ifstream is(dir + "/stability.csv", std::ios::binary);
        if (!is) throw SchemaError("cannot open '" + dir + "/stability.csv'");
        std::string line;
        if (!std::getline(is, line) ||
            split_line(line) != std::vector<std::string>{"replication", "method", "stability_error"})
            throw SchemaError("stability.csv: unexpected header");
        while (std::getline(is, line)) {
            if (line.empty() || line == "\r") continue;
            const std::vector<std::string> cells = split_line(line);
            if (cells.size() != 3) throw SchemaError("stability.csv: malformed row");
            out.stability.push_back(
                {parse_index(cells[0]), method_from_name(cells[1]), parse_double(cells[2])});
        }
    }
    if (out.records.empty()) throw SchemaError("results.csv contains no records");
    return out;
}

}  // namespace decon
