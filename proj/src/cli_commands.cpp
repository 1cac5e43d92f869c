#include "decon/cli_commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "decon/counterfactual.hpp"
#include "decon/dataset.hpp"
#include "decon/errors.hpp"
#include "decon/experiments.hpp"
#include "decon/report.hpp"
#include "decon/scm_json.hpp"
#include "decon/version.hpp"

namespace decon::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitAdjustMisuse = 3;
constexpr int kExitSchema = 4;

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_path, std::uint64_t base_seed,
                    const std::string& out_dir, const nlohmann::json& effective_config) {
    nlohmann::json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["base_seed"] = base_seed;
    j["output_dir"] = out_dir;
    j["started_at"] = timestamp_utc();
    j["artifact_version"] = kVersion;
    j["effective_config"] = effective_config;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SchemaError("cannot write manifest '" + path + "'");
    os << j.dump(2) << "\n";
}

int validation_exit(const Error& e, const char* prefix) {
    std::cerr << prefix << ": " << e.what() << "\n";
    return kExitValidation;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw SchemaError("cannot create output directory '" + dir + "'");
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt) {
    try {
        const LinearScm scm = load_scm_file(opt.scm_path);
        validate(scm);

        const std::string parent =
            std::filesystem::path(opt.out_csv).parent_path().string();
        if (!parent.empty()) ensure_dir(parent);
        nlohmann::json cfg;
        cfg["scm"] = opt.scm_path;
        cfg["n"] = opt.n;
        cfg["seed"] = opt.seed;
        write_manifest(opt.out_csv + ".manifest.json", "simulate", opt.scm_path, opt.seed,
                       parent.empty() ? "." : parent, cfg);

        const Dataset d = simulate(scm, opt.n, opt.seed);
        write_csv_file(d, opt.out_csv);
        return kExitOk;
    } catch (const SchemaError& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return kExitSchema;
    } catch (const CycleError& e) {
        return validation_exit(e, "simulate");
    } catch (const RoleError& e) {
        return validation_exit(e, "simulate");
    } catch (const PsdError& e) {
        return validation_exit(e, "simulate");
    } catch (const InputError& e) {
        return validation_exit(e, "simulate");
    } catch (const ShapeError& e) {
        return validation_exit(e, "simulate");
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return kExitOther;
    }
}

int cmd_adjust(const AdjustOptions& opt) {
    try {
        const PathTarget target = path_target_from_name(opt.target);
        if (!opt.test_csv.empty() && target != PathTarget::Direct) {
            std::cerr << "adjust: test-set adjustment for target '" << opt.target
                      << "' requires response labels, which test sets do not carry\n";
            return kExitAdjustMisuse;
        }

        const Dataset train = read_csv_file(opt.train_csv);
        ensure_dir(opt.out_dir);
        nlohmann::json cfg;
        cfg["train"] = opt.train_csv;
        cfg["test"] = opt.test_csv;
        cfg["target"] = opt.target;
        cfg["recenter_test"] = opt.recenter_test;
        write_manifest(opt.out_dir + "/manifest.json", "adjust", "", opt.seed, opt.out_dir, cfg);

        const AnticausalFit fit = fit_anticausal(train);
        const Dataset xstar_train =
            generate_cf_features(fit, train, target, CfForm::ResidualAddition);
        write_csv_file(xstar_train, opt.out_dir + "/xstar_train.csv");

        if (!opt.test_csv.empty()) {
            const Dataset test = read_csv_file(opt.test_csv);
            Dataset xstar_test = generate_cf_features(fit, test, target, CfForm::Subtraction);
            if (opt.recenter_test) {
                for (std::size_t j = 0; j < xstar_test.n_cols(); ++j) {
                    auto col = xstar_test.column(j);
                    double mean_ts = 0.0, mean_tr = 0.0;
                    for (const double v : col) mean_ts += v;
                    mean_ts /= static_cast<double>(col.size());
                    const auto tr_col = xstar_train.column(j);
                    for (const double v : tr_col) mean_tr += v;
                    mean_tr /= static_cast<double>(tr_col.size());
                    for (double& v : col) v += mean_tr - mean_ts;
                }
            }
            write_csv_file(xstar_test, opt.out_dir + "/xstar_test.csv");
        }

        nlohmann::json coefs;
        coefs["target"] = opt.target;
        coefs["response"] = fit.response_name;
        nlohmann::json features = nlohmann::json::array();
        for (std::size_t j = 0; j < fit.feature_names.size(); ++j) {
            nlohmann::json f;
            f["name"] = fit.feature_names[j];
            f["intercept"] = fit.feature_fits[j].intercept;
            nlohmann::json c;
            for (std::size_t r = 0; r < fit.feature_fits[j].regressor_names.size(); ++r)
                c[fit.feature_fits[j].regressor_names[r]] = fit.feature_fits[j].coefficients[r];
            f["coefficients"] = c;
            features.push_back(f);
        }
        coefs["features"] = features;
        nlohmann::json mediators = nlohmann::json::array();
        for (std::size_t k = 0; k < fit.mediator_names.size(); ++k) {
            nlohmann::json f;
            f["name"] = fit.mediator_names[k];
            f["intercept"] = fit.mediator_fits[k].intercept;
            nlohmann::json c;
            for (std::size_t r = 0; r < fit.mediator_fits[k].regressor_names.size(); ++r)
                c[fit.mediator_fits[k].regressor_names[r]] = fit.mediator_fits[k].coefficients[r];
            f["coefficients"] = c;
            mediators.push_back(f);
        }
        coefs["mediators"] = mediators;
        std::ofstream os(opt.out_dir + "/coefficients.json", std::ios::binary);
        if (!os) throw SchemaError("cannot write coefficients.json");
        os << coefs.dump(2) << "\n";
        return kExitOk;
    } catch (const SchemaError& e) {
        std::cerr << "adjust: " << e.what() << "\n";
        return kExitSchema;
    } catch (const RoleError& e) {
        std::cerr << "adjust: " << e.what() << "\n";
        return kExitAdjustMisuse;
    } catch (const MissingColumnError& e) {
        std::cerr << "adjust: " << e.what() << "\n";
        return kExitSchema;
    } catch (const Error& e) {
        return validation_exit(e, "adjust");
    } catch (const std::exception& e) {
        std::cerr << "adjust: " << e.what() << "\n";
        return kExitOther;
    }
}

namespace {

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("variant")) cfg.variant = variant_from_name(j["variant"].get<std::string>());
    if (j.contains("n_features")) cfg.n_features = j["n_features"].get<std::size_t>();
    if (j.contains("n_train")) cfg.n_train = j["n_train"].get<std::size_t>();
    if (j.contains("n_test")) cfg.n_test = j["n_test"].get<std::size_t>();
    if (j.contains("n_reps")) cfg.n_reps = j["n_reps"].get<std::size_t>();
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("train_moments")) {
        const auto& m = j["train_moments"];
        cfg.train_moments = {m.at("var_c").get<double>(), m.at("cov_yc").get<double>(),
                             m.at("var_y").get<double>()};
    }
    if (j.contains("test_grid")) {
        for (const auto& m : j["test_grid"])
            cfg.test_grid.push_back({m.at("var_c").get<double>(), m.at("cov_yc").get<double>(),
                                     m.at("var_y").get<double>()});
    }
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& m : j["methods"]) cfg.methods.push_back(method_from_name(m.get<std::string>()));
    }
    return cfg;
}

unsigned resolve_threads(const std::optional<unsigned>& flag) {
    if (flag) return std::max(1u, *flag);
    if (const char* env = std::getenv("DECON_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace

int cmd_experiment(const ExperimentOptions& opt) {
    try {
        ExperimentConfig cfg;
        if (!opt.config_path.empty()) {
            std::ifstream is(opt.config_path, std::ios::binary);
            if (!is) throw SchemaError("cannot open config '" + opt.config_path + "'");
            nlohmann::json j;
            try {
                is >> j;
            } catch (const nlohmann::json::exception& e) {
                throw SchemaError(std::string("config: ") + e.what());
            }
            cfg = config_from_json(j);
        }
        // Flags override config-file values which override defaults.
        if (!opt.variant.empty()) cfg.variant = variant_from_name(opt.variant);
        if (opt.reps) cfg.n_reps = *opt.reps;
        if (opt.n_features) cfg.n_features = *opt.n_features;
        if (opt.n_train) cfg.n_train = *opt.n_train;
        if (opt.n_test) cfg.n_test = *opt.n_test;
        if (opt.seed) cfg.base_seed = *opt.seed;
        cfg.validate();

        const unsigned threads = resolve_threads(opt.threads);

        ensure_dir(opt.out_dir);
        nlohmann::json echo;
        echo["variant"] = variant_name(cfg.variant);
        echo["n_features"] = cfg.n_features;
        echo["n_train"] = cfg.n_train;
        echo["n_test"] = cfg.n_test;
        echo["n_reps"] = cfg.n_reps;
        echo["base_seed"] = cfg.base_seed;
        echo["threads"] = threads;
        write_manifest(opt.out_dir + "/manifest.json", "experiment", opt.config_path,
                       cfg.base_seed, opt.out_dir, echo);

        const ResultsTable table = run_experiment(cfg, threads);
        if (table.records.empty()) {
            std::cerr << "experiment: all " << cfg.n_reps << " replications failed\n";
            return kExitOther;
        }
        write_results(table, cfg, opt.out_dir);

        const LoadedResults loaded{table.records, table.stability};
        const std::string summary = summary_text(loaded);
        std::ofstream os(opt.out_dir + "/summary.txt", std::ios::binary);
        os << summary;
        std::cout << summary;
        return kExitOk;
    } catch (const SchemaError& e) {
        std::cerr << "experiment: " << e.what() << "\n";
        return kExitSchema;
    } catch (const Error& e) {
        return validation_exit(e, "experiment");
    } catch (const std::exception& e) {
        std::cerr << "experiment: " << e.what() << "\n";
        return kExitOther;
    }
}

int cmd_report(const ReportOptions& opt) {
    try {
        const LoadedResults results = load_results(opt.results_dir);
        ensure_dir(opt.out_dir);
        nlohmann::json cfg;
        cfg["results_dir"] = opt.results_dir;
        write_manifest(opt.out_dir + "/manifest.json", "report", "", 0, opt.out_dir, cfg);

        const std::vector<QuantileRow> rows = summarize_results(results);
        {
            std::ofstream os(opt.out_dir + "/report.csv", std::ios::binary);
            if (!os) throw SchemaError("cannot write report.csv");
            os << quantile_csv(rows);
        }
        {
            std::ofstream os(opt.out_dir + "/report.svg", std::ios::binary);
            if (!os) throw SchemaError("cannot write report.svg");
            os << render_report_svg(rows);
        }
        return kExitOk;
    } catch (const SchemaError& e) {
        std::cerr << "report: " << e.what() << "\n";
        return kExitSchema;
    } catch (const Error& e) {
        std::cerr << "report: " << e.what() << "\n";
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "report: " << e.what() << "\n";
        return kExitOther;
    }
}

}  // namespace decon::cli
