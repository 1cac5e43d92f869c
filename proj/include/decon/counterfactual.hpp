#pragma once

// Causality-aware counterfactual generation. Anticausal tasks regenerate the
// features so that only a chosen path family (direct, indirect, or
// confounding) contributes to the feature-response association; causal tasks
// regenerate the response. Population-level closed forms are provided as
// oracles, including the negative controls for interventions that alter Y.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "decon/dataset.hpp"
#include "decon/regression.hpp"
#include "decon/scm.hpp"

namespace decon {

enum class PathTarget { Direct, Indirect, ConfoundingOnly };

const char* path_target_name(PathTarget t);
PathTarget path_target_from_name(const std::string& name);

// How the counterfactual features are assembled on a given dataset. Auto uses
// the subtraction form for Direct (valid on unlabeled data) and the
// recomputed-residual form otherwise.
enum class CfForm { Auto, ResidualAddition, Subtraction };

// Per-feature regressions of X_j on (C, M, Y) and per-mediator regressions of
// M_j on (C, Y). Coefficient layout follows the regressor order [C.., M.., Y].
struct AnticausalFit {
    std::vector<std::string> feature_names;
    std::vector<std::string> confounder_names;
    std::vector<std::string> mediator_names;
    std::string response_name;
    std::vector<OlsFit> feature_fits;
    std::vector<OlsFit> mediator_fits;
    std::vector<double> feature_train_means;
    std::size_t n_train = 0;

    double gamma_xc(std::size_t j, std::size_t i) const;
    double gamma_xm(std::size_t j, std::size_t k) const;
    double gamma_xy(std::size_t j) const;
    double gamma_mc(std::size_t k, std::size_t i) const;
    double gamma_my(std::size_t k) const;
};

AnticausalFit fit_anticausal(const Dataset& train);

Dataset generate_cf_features(const AnticausalFit& fit, const Dataset& data, PathTarget target,
                             CfForm form = CfForm::Auto);

// Confounder-only feature adjustment: per feature, fit X_j on (Y, C) in the
// training set, return the counterfactual training features (residual
// addition) and test features (confounder subtraction). Mediator columns are
// rejected; use fit_anticausal explicitly for total-effect adjustment with
// unobserved mediators.
std::pair<Dataset, Dataset> algorithm1_adjust(const Dataset& train, const Dataset& test,
                                              bool recenter_test = false);

// Regression of Y on (C, M, X) plus per-mediator regressions of M_j on (C, X).
struct CausalFit {
    std::vector<std::string> feature_names;
    std::vector<std::string> confounder_names;
    std::vector<std::string> mediator_names;
    std::string response_name;
    OlsFit response_fit;
    std::vector<OlsFit> mediator_fits;
    std::size_t n_train = 0;

    double gamma_yc(std::size_t i) const;
    double gamma_ym(std::size_t k) const;
    double gamma_yx(std::size_t j) const;
    double gamma_mc(std::size_t k, std::size_t i) const;
    double gamma_mx(std::size_t k, std::size_t j) const;
};

CausalFit fit_causal(const Dataset& train);

// Counterfactual responses; requires fully labeled data.
std::vector<double> generate_cf_response(const CausalFit& fit, const Dataset& data,
                                         PathTarget target);

// Closed-form population covariance of the counterfactual construction:
// anticausal -> Cov(X*, Y) as an n_X x 1 column, causal -> Cov(Y*, X) as a
// 1 x n_X row.
Matrix population_cf_covariance(const LinearScm& scm, TaskKind task, PathTarget target);

// The two rejected interventions that alter Y (fixing the confounder, or
// cutting the confounder->response edge). Both yield
// Cov(X*, Y*) = theta_xy (1 - theta_yc^2) in the standardized univariate
// confounder-only model: a negative control showing they do not recover the
// direct effect.
enum class AlteredYVariant { FixConfounder, CutConfounderToY };
double altered_y_covariance(const LinearScm& scm, AlteredYVariant variant);

}  // namespace decon
