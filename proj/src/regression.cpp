#include "decon/regression.hpp"

#include <cmath>

#include "decon/errors.hpp"
#include "decon/kernels.hpp"

namespace decon {

double OlsFit::fitted_one(std::span<const double> regressors) const {
    if (regressors.size() != coefficients.size())
        throw ShapeError("fitted_one: regressor count mismatch");
    double acc = intercept;
    for (std::size_t j = 0; j < regressors.size(); ++j) acc += coefficients[j] * regressors[j];
    return acc;
}

linalg::TallQr OlsDesign::build_qr(const std::vector<std::span<const double>>& columns,
                                   bool with_intercept) {
    const std::size_t k = columns.size();
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) throw ShapeError("design columns differ in length");
    const std::size_t total = k + (with_intercept ? 1 : 0);
    if (total == 0) throw InputError("design has no regressors");
    if (n <= total) {
        throw SampleSizeError("need n > " + std::to_string(total) + " samples for " +
                              std::to_string(total) + " coefficients, got " + std::to_string(n));
    }

    std::vector<double> cm(total * n);
    std::size_t col = 0;
    if (with_intercept) {
        std::fill(cm.begin(), cm.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
        col = 1;
    }
    for (std::size_t j = 0; j < k; ++j, ++col) {
        double* dst = &cm[col * n];
        const double* src = columns[j].data();
        std::copy(src, src + n, dst);
    }
    linalg::TallQr qr(std::move(cm), n, total);
    if (qr.sv_ratio() < kRankTol)
        throw RankError("design is numerically rank-deficient (sv ratio " +
                        std::to_string(qr.sv_ratio()) + ")");
    return qr;
}

OlsDesign::OlsDesign(std::vector<std::span<const double>> columns, std::vector<std::string> names,
                     bool with_intercept)
    : n_(columns.empty() ? 0 : columns.front().size()),
      intercept_(with_intercept),
      names_(std::move(names)),
      columns_(std::move(columns)),
      qr_(build_qr(columns_, with_intercept)),
      normal_inv_diag_(qr_.normal_inverse_diag()) {
    if (names_.empty()) {
        for (std::size_t j = 0; j < columns_.size(); ++j) names_.push_back("x" + std::to_string(j));
    }
    if (names_.size() != columns_.size())
        throw ShapeError("regressor names do not match column count");
}

OlsFit OlsDesign::solve(std::span<const double> target) const {
    if (target.size() != n_) throw ShapeError("target length does not match design");
    for (const double v : target)
        if (!std::isfinite(v)) throw InputError("target contains a non-finite value");

    const std::vector<double> beta = qr_.solve(target);

    OlsFit fit;
    fit.n = n_;
    fit.regressor_names = names_;
    std::size_t off = 0;
    if (intercept_) {
        fit.intercept = beta[0];
        off = 1;
    }
    fit.coefficients.assign(beta.begin() + static_cast<std::ptrdiff_t>(off), beta.end());

    fit.residuals.assign(target.begin(), target.end());
    if (intercept_ && fit.intercept != 0.0) {
        for (double& r : fit.residuals) r -= fit.intercept;
    }
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (fit.coefficients[j] != 0.0)
            kernels::axpy(-fit.coefficients[j], columns_[j].data(), fit.residuals.data(), n_);
    }

    const double rss = kernels::dot(fit.residuals.data(), fit.residuals.data(), n_);
    const std::size_t dof = n_ - beta.size();
    fit.sigma2 = rss / static_cast<double>(dof);
    if (intercept_) fit.intercept_std_error = std::sqrt(fit.sigma2 * normal_inv_diag_[0]);
    fit.std_errors.resize(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j)
        fit.std_errors[j] = std::sqrt(fit.sigma2 * normal_inv_diag_[j + off]);
    return fit;
}

OlsFit ols(std::vector<std::span<const double>> columns, std::span<const double> target,
           bool with_intercept, std::vector<std::string> names) {
    const OlsDesign design(std::move(columns), std::move(names), with_intercept);
    return design.solve(target);
}

}  // namespace decon
