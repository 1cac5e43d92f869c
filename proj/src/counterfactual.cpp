#include "decon/counterfactual.hpp"

#include <cmath>

#include "decon/errors.hpp"
#include "decon/kernels.hpp"

namespace decon {

const char* path_target_name(PathTarget t) {
    switch (t) {
        case PathTarget::Direct:
            return "direct";
        case PathTarget::Indirect:
            return "indirect";
        case PathTarget::ConfoundingOnly:
            return "confounding";
    }
    return "unknown";
}

PathTarget path_target_from_name(const std::string& name) {
    if (name == "direct") return PathTarget::Direct;
    if (name == "indirect") return PathTarget::Indirect;
    if (name == "confounding") return PathTarget::ConfoundingOnly;
    throw InputError("unknown path target '" + name + "' (direct|indirect|confounding)");
}

namespace {

std::vector<std::string> names_at(const Dataset& d, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (const std::size_t i : idx) out.push_back(d.names()[i]);
    return out;
}

double column_mean(std::span<const double> col) {
    return kernels::sum(col.data(), col.size()) / static_cast<double>(col.size());
}

}  // namespace

double AnticausalFit::gamma_xc(std::size_t j, std::size_t i) const {
    return feature_fits[j].coefficients[i];
}
double AnticausalFit::gamma_xm(std::size_t j, std::size_t k) const {
    return feature_fits[j].coefficients[confounder_names.size() + k];
}
double AnticausalFit::gamma_xy(std::size_t j) const {
    return feature_fits[j].coefficients[confounder_names.size() + mediator_names.size()];
}
double AnticausalFit::gamma_mc(std::size_t k, std::size_t i) const {
    return mediator_fits[k].coefficients[i];
}
double AnticausalFit::gamma_my(std::size_t k) const {
    return mediator_fits[k].coefficients[confounder_names.size()];
}

AnticausalFit fit_anticausal(const Dataset& train) {
    train.check_finite();
    const std::vector<std::size_t> features = train.role_indices(Role::Feature);
    const std::vector<std::size_t> confounders = train.role_indices(Role::Confounder);
    const std::vector<std::size_t> mediators = train.role_indices(Role::Mediator);
    const std::vector<std::size_t> response = train.role_indices(Role::Response);
    if (response.size() != 1) throw RoleError("training data needs exactly one response column");
    if (features.empty()) throw RoleError("training data has no feature columns");

    AnticausalFit fit;
    fit.feature_names = names_at(train, features);
    fit.confounder_names = names_at(train, confounders);
    fit.mediator_names = names_at(train, mediators);
    fit.response_name = train.names()[response[0]];
    fit.n_train = train.n();

    std::vector<std::span<const double>> design;
    std::vector<std::string> design_names;
    for (const std::size_t i : confounders) {
        design.push_back(train.column(i));
        design_names.push_back(train.names()[i]);
    }
    for (const std::size_t i : mediators) {
        design.push_back(train.column(i));
        design_names.push_back(train.names()[i]);
    }
    design.push_back(train.column(response[0]));
    design_names.push_back(train.names()[response[0]]);
    const OlsDesign feature_design(design, design_names);
    for (const std::size_t j : features) {
        fit.feature_fits.push_back(feature_design.solve(train.column(j)));
        fit.feature_train_means.push_back(column_mean(train.column(j)));
    }

    if (!mediators.empty()) {
        std::vector<std::span<const double>> mdesign;
        std::vector<std::string> mnames;
        for (const std::size_t i : confounders) {
            mdesign.push_back(train.column(i));
            mnames.push_back(train.names()[i]);
        }
        mdesign.push_back(train.column(response[0]));
        mnames.push_back(train.names()[response[0]]);
        const OlsDesign mediator_design(mdesign, mnames);
        for (const std::size_t k : mediators)
            fit.mediator_fits.push_back(mediator_design.solve(train.column(k)));
    }
    return fit;
}

namespace {

struct BoundColumns {
    std::vector<std::span<const double>> confounders;
    std::vector<std::span<const double>> mediators;
    std::vector<std::span<const double>> features;
    std::span<const double> response;
    bool has_response = false;
};

BoundColumns bind_columns(const AnticausalFit& fit, const Dataset& data, bool need_features,
                          bool need_response) {
    BoundColumns b;
    for (const auto& n : fit.confounder_names) b.confounders.push_back(data.column_by_name(n));
    for (const auto& n : fit.mediator_names) b.mediators.push_back(data.column_by_name(n));
    if (need_features)
        for (const auto& n : fit.feature_names) b.features.push_back(data.column_by_name(n));
    if (need_response) {
        b.response = data.column_by_name(fit.response_name);
        b.has_response = true;
    }
    return b;
}

// Residuals of feature j on `data` recomputed from the fitted coefficients:
// X_j - (mu + G_xc C + G_xm M + G_xy Y).
std::vector<double> recompute_residuals(const AnticausalFit& fit, const BoundColumns& b,
                                        std::size_t j, std::size_t n) {
    std::vector<double> w(b.features[j].begin(), b.features[j].end());
    const OlsFit& f = fit.feature_fits[j];
    for (double& v : w) v -= f.intercept;
    std::size_t c = 0;
    for (const auto& col : b.confounders)
        kernels::axpy(-f.coefficients[c++], col.data(), w.data(), n);
    for (const auto& col : b.mediators)
        kernels::axpy(-f.coefficients[c++], col.data(), w.data(), n);
    kernels::axpy(-f.coefficients[c], b.response.data(), w.data(), n);
    return w;
}

}  // namespace

Dataset generate_cf_features(const AnticausalFit& fit, const Dataset& data, PathTarget target,
                             CfForm form) {
    const std::size_t nx = fit.feature_names.size();
    if (nx == 0) throw ShapeError("fit has no features");
    if (target == PathTarget::Indirect && fit.mediator_names.empty())
        throw RoleError("indirect target requires at least one mediator");
    if (target == PathTarget::ConfoundingOnly && fit.confounder_names.empty())
        throw RoleError("confounding target requires at least one confounder");

    const std::size_t n = data.n();
    const bool residual_addition = (form == CfForm::ResidualAddition);
    if (residual_addition && n != fit.n_train)
        throw ShapeError("residual-addition form only applies to the fitting set (n mismatch)");
    if (form == CfForm::Subtraction && target != PathTarget::Direct)
        throw InputError("subtraction form exists only for the direct target");

    // Direct via subtraction needs no response column; everything else does.
    const bool need_response = !(target == PathTarget::Direct && !residual_addition);
    const BoundColumns b = bind_columns(fit, data, /*need_features=*/true, need_response);

    std::vector<Role> roles(nx, Role::Feature);
    Dataset out(fit.feature_names, roles, n,
                std::string("adjusted:") + path_target_name(target));

    for (std::size_t j = 0; j < nx; ++j) {
        auto dst = out.column(j);
        const OlsFit& f = fit.feature_fits[j];

        if (target == PathTarget::Direct) {
            if (residual_addition) {
                // mu + G_xy Y + W
                for (std::size_t r = 0; r < n; ++r)
                    dst[r] = f.intercept + fit.gamma_xy(j) * b.response[r] + f.residuals[r];
            } else {
                // X - G_xc C - G_xm M
                std::copy(b.features[j].begin(), b.features[j].end(), dst.begin());
                std::size_t c = 0;
                for (const auto& col : b.confounders)
                    kernels::axpy(-f.coefficients[c++], col.data(), dst.data(), n);
                for (const auto& col : b.mediators)
                    kernels::axpy(-f.coefficients[c++], col.data(), dst.data(), n);
            }
            continue;
        }

        std::vector<double> w = residual_addition ? f.residuals
                                                  : recompute_residuals(fit, b, j, n);

        if (target == PathTarget::Indirect) {
            // X* = G_xm (M - G_mc C) + W
            std::copy(w.begin(), w.end(), dst.begin());
            for (std::size_t k = 0; k < b.mediators.size(); ++k) {
                std::vector<double> mstar(b.mediators[k].begin(), b.mediators[k].end());
                for (std::size_t i = 0; i < b.confounders.size(); ++i)
                    kernels::axpy(-fit.gamma_mc(k, i), b.confounders[i].data(), mstar.data(), n);
                kernels::axpy(fit.gamma_xm(j, k), mstar.data(), dst.data(), n);
            }
        } else {  // ConfoundingOnly: X* = G_xc C + W
            std::copy(w.begin(), w.end(), dst.begin());
            for (std::size_t i = 0; i < b.confounders.size(); ++i)
                kernels::axpy(fit.gamma_xc(j, i), b.confounders[i].data(), dst.data(), n);
        }
    }
    return out;
}

std::pair<Dataset, Dataset> algorithm1_adjust(const Dataset& train, const Dataset& test,
                                              bool recenter_test) {
    train.check_finite();
    test.check_finite();
    if (!train.role_indices(Role::Mediator).empty() || !test.role_indices(Role::Mediator).empty())
        throw RoleError(
            "mediator columns present: the confounder-only adjustment does not apply "
            "(fit the total-effect regression on (C, Y) explicitly instead)");
    const std::vector<std::size_t> features = train.role_indices(Role::Feature);
    const std::vector<std::size_t> confounders = train.role_indices(Role::Confounder);
    const std::vector<std::size_t> response = train.role_indices(Role::Response);
    if (response.size() != 1) throw RoleError("training data needs exactly one response column");
    if (features.empty()) throw RoleError("training data has no feature columns");

    // Regressors: [Y, C...]
    std::vector<std::span<const double>> design;
    std::vector<std::string> design_names;
    design.push_back(train.column(response[0]));
    design_names.push_back(train.names()[response[0]]);
    for (const std::size_t i : confounders) {
        design.push_back(train.column(i));
        design_names.push_back(train.names()[i]);
    }
    const OlsDesign tr_design(design, design_names);

    const std::size_t n_tr = train.n();
    const std::size_t n_ts = test.n();
    std::vector<std::span<const double>> test_conf;
    for (const std::size_t i : confounders)
        test_conf.push_back(test.column_by_name(train.names()[i]));

    std::vector<Role> roles(features.size(), Role::Feature);
    Dataset out_tr(names_at(train, features), roles, n_tr, "adjusted:direct");
    Dataset out_ts(names_at(train, features), roles, n_ts, "adjusted:direct");

    const auto y_tr = train.column(response[0]);
    for (std::size_t j = 0; j < features.size(); ++j) {
        const OlsFit fit = tr_design.solve(train.column(features[j]));

        auto tr = out_tr.column(j);
        for (std::size_t r = 0; r < n_tr; ++r)
            tr[r] = fit.intercept + fit.coefficients[0] * y_tr[r] + fit.residuals[r];

        auto ts = out_ts.column(j);
        const auto x_ts = test.column_by_name(train.names()[features[j]]);
        std::copy(x_ts.begin(), x_ts.end(), ts.begin());
        for (std::size_t i = 0; i < confounders.size(); ++i)
            kernels::axpy(-fit.coefficients[1 + i], test_conf[i].data(), ts.data(), n_ts);

        if (recenter_test) {
            const double shift = column_mean(tr) - column_mean(ts);
            for (double& v : ts) v += shift;
        }
    }
    return {std::move(out_tr), std::move(out_ts)};
}

double CausalFit::gamma_yc(std::size_t i) const { return response_fit.coefficients[i]; }
double CausalFit::gamma_ym(std::size_t k) const {
    return response_fit.coefficients[confounder_names.size() + k];
}
double CausalFit::gamma_yx(std::size_t j) const {
    return response_fit.coefficients[confounder_names.size() + mediator_names.size() + j];
}
double CausalFit::gamma_mc(std::size_t k, std::size_t i) const {
    return mediator_fits[k].coefficients[i];
}
double CausalFit::gamma_mx(std::size_t k, std::size_t j) const {
    return mediator_fits[k].coefficients[confounder_names.size() + j];
}

CausalFit fit_causal(const Dataset& train) {
    train.check_finite();
    const std::vector<std::size_t> features = train.role_indices(Role::Feature);
    const std::vector<std::size_t> confounders = train.role_indices(Role::Confounder);
    const std::vector<std::size_t> mediators = train.role_indices(Role::Mediator);
    const std::vector<std::size_t> response = train.role_indices(Role::Response);
    if (response.size() != 1) throw RoleError("training data needs exactly one response column");
    if (features.empty()) throw RoleError("training data has no feature columns");

    CausalFit fit;
    fit.feature_names = names_at(train, features);
    fit.confounder_names = names_at(train, confounders);
    fit.mediator_names = names_at(train, mediators);
    fit.response_name = train.names()[response[0]];
    fit.n_train = train.n();

    std::vector<std::span<const double>> design;
    std::vector<std::string> design_names;
    for (const std::size_t i : confounders) {
        design.push_back(train.column(i));
        design_names.push_back(train.names()[i]);
    }
    for (const std::size_t i : mediators) {
        design.push_back(train.column(i));
        design_names.push_back(train.names()[i]);
    }
    for (const std::size_t i : features) {
        design.push_back(train.column(i));
        design_names.push_back(train.names()[i]);
    }
    fit.response_fit = ols(design, train.column(response[0]), true, design_names);

    if (!mediators.empty()) {
        std::vector<std::span<const double>> mdesign;
        std::vector<std::string> mnames;
        for (const std::size_t i : confounders) {
            mdesign.push_back(train.column(i));
            mnames.push_back(train.names()[i]);
        }
        for (const std::size_t i : features) {
            mdesign.push_back(train.column(i));
            mnames.push_back(train.names()[i]);
        }
        const OlsDesign mediator_design(mdesign, mnames);
        for (const std::size_t k : mediators)
            fit.mediator_fits.push_back(mediator_design.solve(train.column(k)));
    }
    return fit;
}

std::vector<double> generate_cf_response(const CausalFit& fit, const Dataset& data,
                                         PathTarget target) {
    if (target == PathTarget::Indirect && fit.mediator_names.empty())
        throw RoleError("indirect target requires at least one mediator");
    if (target == PathTarget::ConfoundingOnly && fit.confounder_names.empty())
        throw RoleError("confounding target requires at least one confounder");

    const std::size_t n = data.n();
    std::vector<std::span<const double>> conf, medi, feat;
    for (const auto& nm : fit.confounder_names) conf.push_back(data.column_by_name(nm));
    for (const auto& nm : fit.mediator_names) medi.push_back(data.column_by_name(nm));
    for (const auto& nm : fit.feature_names) feat.push_back(data.column_by_name(nm));
    const auto y = data.column_by_name(fit.response_name);

    if (target == PathTarget::Direct) {
        // Y* = Y - G_yc C - G_ym M  (== mu + G_yx X + W_Y on the fitting set)
        std::vector<double> out(y.begin(), y.end());
        for (std::size_t i = 0; i < conf.size(); ++i)
            kernels::axpy(-fit.gamma_yc(i), conf[i].data(), out.data(), n);
        for (std::size_t k = 0; k < medi.size(); ++k)
            kernels::axpy(-fit.gamma_ym(k), medi[k].data(), out.data(), n);
        return out;
    }

    // W_Y = Y - mu - G_yc C - G_ym M - G_yx X
    std::vector<double> w(y.begin(), y.end());
    for (double& v : w) v -= fit.response_fit.intercept;
    for (std::size_t i = 0; i < conf.size(); ++i)
        kernels::axpy(-fit.gamma_yc(i), conf[i].data(), w.data(), n);
    for (std::size_t k = 0; k < medi.size(); ++k)
        kernels::axpy(-fit.gamma_ym(k), medi[k].data(), w.data(), n);
    for (std::size_t j = 0; j < feat.size(); ++j)
        kernels::axpy(-fit.gamma_yx(j), feat[j].data(), w.data(), n);

    if (target == PathTarget::Indirect) {
        // Y* = G_ym (M - G_mc C) + W_Y
        std::vector<double> out = w;
        for (std::size_t k = 0; k < medi.size(); ++k) {
            std::vector<double> mstar(medi[k].begin(), medi[k].end());
            for (std::size_t i = 0; i < conf.size(); ++i)
                kernels::axpy(-fit.gamma_mc(k, i), conf[i].data(), mstar.data(), n);
            kernels::axpy(fit.gamma_ym(k), mstar.data(), out.data(), n);
        }
        return out;
    }

    // ConfoundingOnly: Y* = G_yc C + W_Y
    std::vector<double> out = w;
    for (std::size_t i = 0; i < conf.size(); ++i)
        kernels::axpy(fit.gamma_yc(i), conf[i].data(), out.data(), n);
    return out;
}

Matrix population_cf_covariance(const LinearScm& scm, TaskKind task, PathTarget target) {
    const ScmAnalysis a = analyze(scm);
    const Moments m = implied_moments(scm);

    if (task == TaskKind::Anticausal) {
        if (!a.anticausal_ok) throw RoleError("model does not fit the anticausal task template");
        const ReparameterizedScm r = reparameterize(scm);
        const double var_y = m.cov(a.response, a.response);
        switch (target) {
            case PathTarget::Direct:
                return r.gamma_xy.scaled(var_y);
            case PathTarget::Indirect:
                if (a.mediators.empty())
                    throw RoleError("indirect target requires at least one mediator");
                return (r.gamma_xm * r.gamma_my).scaled(var_y);
            case PathTarget::ConfoundingOnly:
                if (a.confounders.empty())
                    throw RoleError("confounding target requires at least one confounder");
                return r.gamma_xc * m.cov.select(a.confounders, a.confounders) *
                       r.gamma_yc.transposed();
        }
    }

    if (!a.causal_ok) throw RoleError("model does not fit the causal task template");
    const CausalReparameterizedScm r = reparameterize_causal(scm);
    const Matrix cov_x = m.cov.select(a.features, a.features);
    switch (target) {
        case PathTarget::Direct:
            return r.gamma_yx * cov_x;
        case PathTarget::Indirect:
            if (a.mediators.empty())
                throw RoleError("indirect target requires at least one mediator");
            return r.gamma_ym * r.gamma_mx * cov_x;
        case PathTarget::ConfoundingOnly:
            if (a.confounders.empty())
                throw RoleError("confounding target requires at least one confounder");
            return r.gamma_yc * m.cov.select(a.confounders, a.confounders) *
                   r.gamma_xc.transposed();
    }
    throw InputError("unreachable path target");
}

double altered_y_covariance(const LinearScm& scm, AlteredYVariant) {
    const ScmAnalysis a = analyze(scm);
    if (!a.anticausal_ok) throw InputError("negative control applies to anticausal tasks");
    if (a.features.size() != 1 || a.confounders.size() != 1 || !a.mediators.empty())
        throw InputError(
            "negative control applies to the univariate confounder-only model (1 feature, "
            "1 confounder, no mediators)");
    const Moments m = implied_moments(scm);
    for (std::size_t i = 0; i < scm.size(); ++i) {
        if (std::abs(m.cov(i, i) - 1.0) > 1e-8 || std::abs(m.mean[i]) > 1e-8)
            throw InputError("negative control requires a standardized model (unit variances, "
                             "zero means)");
    }
    const double theta_xy = scm.theta(a.features[0], a.response);
    const double theta_yc = scm.theta(a.response, a.confounders[0]);
    // Both rejected interventions alter Y and land on the same covariance.
    return theta_xy * (1.0 - theta_yc * theta_yc);
}

}  // namespace decon
