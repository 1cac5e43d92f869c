#pragma once

// Linear structural causal models: representation, validation, analytic
// moments, simulation, and the block reparameterization that pushes
// within-role covariance into correlated error terms.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "decon/dataset.hpp"
#include "decon/linalg.hpp"

namespace decon {

using linalg::Matrix;

// Whether the response drives the features (anticausal) or vice versa.
enum class TaskKind { Anticausal, Causal };

struct LinearScm {
    std::vector<std::string> names;
    std::vector<Role> roles;
    Matrix theta;      // theta(k, j) = direct effect of variable j on variable k
    std::vector<double> mu;
    Matrix error_cov;  // Cov(U), symmetric PSD

    std::size_t size() const { return names.size(); }
};

// PSD tolerance on the minimum eigenvalue of the error covariance.
inline constexpr double kPsdTol = 1e-10;

// Validation product: a topological order plus role bookkeeping. theta is
// strictly lower triangular in `order`; role/template legality has been
// checked and (I - theta) is therefore invertible.
struct ScmAnalysis {
    std::vector<std::size_t> order;         // topological order (indices into names)
    std::vector<std::size_t> features;      // role index lists in table order
    std::vector<std::size_t> confounders;
    std::vector<std::size_t> mediators;
    std::size_t response = 0;
    bool anticausal_ok = false;             // edges fit the anticausal template
    bool causal_ok = false;                 // edges fit the causal template
};

// Full validation; throws CycleError / RoleError / PsdError.
ScmAnalysis analyze(const LinearScm& scm);

// Spec-facing shorthand: validates and returns the topological order.
std::vector<std::size_t> validate(const LinearScm& scm);

struct Moments {
    std::vector<double> mean;
    Matrix cov;
};

// Analytic joint moments: mean = (I-Theta)^{-1} mu, cov = (I-Theta)^{-1} Psi
// (I-Theta)^{-T}, computed by substitution along the topological order.
Moments implied_moments(const LinearScm& scm);

// Draw n samples (Gaussian errors), solving variables in topological order.
// Deterministic in (scm shape, n, seed).
Dataset simulate(const LinearScm& scm, std::size_t n, std::uint64_t seed);

// Block coefficients of the reparameterized model (anticausal layout):
//   C = W_C,  Y = G_yc C + W_Y,  M = G_mc C + G_my Y + W_M,
//   X = G_xc C + G_xm M + G_xy Y + W_X
struct ReparameterizedScm {
    Matrix gamma_yc;  // 1 x n_C
    Matrix gamma_mc;  // n_M x n_C
    Matrix gamma_my;  // n_M x 1
    Matrix gamma_xc;  // n_X x n_C
    Matrix gamma_xm;  // n_X x n_M
    Matrix gamma_xy;  // n_X x 1
    Matrix w_cov_c;   // Cov(W_C)
    Matrix w_cov_m;   // Cov(W_M)
    Matrix w_cov_x;   // Cov(W_X)
    double w_var_y = 0.0;
    std::vector<double> mu_c, mu_m, mu_x;  // block means of the W-shifted intercepts
    double mu_y = 0.0;
};

// Causal-task layout:
//   C = W_C,  X = G_xc C + W_X,  M = G_mc C + G_mx X + W_M,
//   Y = G_yc C + G_ym M + G_yx X + W_Y
struct CausalReparameterizedScm {
    Matrix gamma_xc;  // n_X x n_C
    Matrix gamma_mc;  // n_M x n_C
    Matrix gamma_mx;  // n_M x n_X
    Matrix gamma_yc;  // 1 x n_C
    Matrix gamma_ym;  // 1 x n_M
    Matrix gamma_yx;  // 1 x n_X
    Matrix w_cov_c, w_cov_m, w_cov_x;
    double w_var_y = 0.0;
    std::vector<double> mu_c, mu_m, mu_x;
    double mu_y = 0.0;
};

ReparameterizedScm reparameterize(const LinearScm& scm);
CausalReparameterizedScm reparameterize_causal(const LinearScm& scm);

// The reparameterized model as a LinearScm over the same variables (gammas as
// path coefficients, W covariances as block-diagonal error covariance); its
// implied moments match the original model.
LinearScm to_linear_scm(const ReparameterizedScm& r, const LinearScm& original);

// Total effects with unobserved mediators (anticausal):
//   xy = G_xy + G_xm G_my,  xc = G_xc + G_xm G_mc
struct TotalEffects {
    Matrix xy;  // n_X x 1
    Matrix xc;  // n_X x n_C
};
TotalEffects total_effects(const LinearScm& scm);

// Wright-style decomposition of Cov(X, Y) into the four path families.
// Components sum exactly to the implied feature-response covariance.
struct CovDecomposition {
    std::vector<double> direct;            // G_xy Var(Y)
    std::vector<double> indirect;          // G_xm G_my Var(Y)
    std::vector<double> confounding_direct;  // G_xc Cov(C) G_yc^T
    std::vector<double> confounding_via_m;   // G_xm G_mc Cov(C) G_yc^T
};
CovDecomposition covariance_decomposition(const LinearScm& scm);

// Equivalent standardized model: every variable rescaled to unit implied
// variance and zero mean (theta' = D^{-1} theta D, psi' = D^{-1} psi D^{-1}).
LinearScm standardize(const LinearScm& scm);

// Replace the error variances (diagonal psi) so every implied variance is 1,
// keeping theta. Useful for building models specified by standardized path
// coefficients. Throws InputError when the coefficients admit no such model.
LinearScm with_unit_variances(const LinearScm& scm);

}  // namespace decon
