#pragma once

// Least squares by Householder QR. The factorization is shared so several
// targets can be solved against one design (the per-feature fits all use the
// same regressor set). No regularization: a numerically rank-deficient design
// is an error, not a silently ridged fit.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "decon/linalg.hpp"

namespace decon {

struct OlsFit {
    double intercept = 0.0;
    std::vector<double> coefficients;   // per regressor, design order
    std::vector<double> std_errors;     // per regressor
    double intercept_std_error = 0.0;
    std::vector<double> residuals;      // y - fitted, length n
    std::vector<std::string> regressor_names;
    double sigma2 = 0.0;                // RSS / (n - regressors - intercept)
    std::size_t n = 0;

    double fitted_one(std::span<const double> regressors) const;
};

// Relative singular-value threshold below which a design is rank-deficient.
inline constexpr double kRankTol = 1e-10;

// Reusable design factorization (intercept column prepended when requested).
// The regressor spans must stay valid for the lifetime of the design.
class OlsDesign {
  public:
    OlsDesign(std::vector<std::span<const double>> columns, std::vector<std::string> names,
              bool with_intercept = true);

    OlsFit solve(std::span<const double> target) const;

    std::size_t n() const { return n_; }

  private:
    std::size_t n_ = 0;
    bool intercept_ = false;
    std::vector<std::string> names_;
    std::vector<std::span<const double>> columns_;
    linalg::TallQr qr_;
    std::vector<double> normal_inv_diag_;

    static linalg::TallQr build_qr(const std::vector<std::span<const double>>& columns,
                                   bool with_intercept);
};

OlsFit ols(std::vector<std::span<const double>> columns, std::span<const double> target,
           bool with_intercept = true, std::vector<std::string> names = {});

}  // namespace decon
