#include "decon/scm.hpp"

#include <algorithm>
#include <cmath>

#include "decon/errors.hpp"
#include "decon/kernels.hpp"
#include "decon/rng.hpp"

namespace decon {

namespace {

bool edge_legal_anticausal(Role to, Role from) {
    if (to == from) return true;
    switch (to) {
        case Role::Response:
            return from == Role::Confounder;
        case Role::Mediator:
            return from == Role::Confounder || from == Role::Response;
        case Role::Feature:
            return from == Role::Confounder || from == Role::Mediator || from == Role::Response;
        case Role::Confounder:
            return false;
    }
    return false;
}

bool edge_legal_causal(Role to, Role from) {
    if (to == from) return true;
    switch (to) {
        case Role::Feature:
            return from == Role::Confounder;
        case Role::Mediator:
            return from == Role::Confounder || from == Role::Feature;
        case Role::Response:
            return from == Role::Confounder || from == Role::Mediator || from == Role::Feature;
        case Role::Confounder:
            return false;
    }
    return false;
}

}  // namespace

ScmAnalysis analyze(const LinearScm& scm) {
    const std::size_t p = scm.size();
    if (p == 0) throw InputError("model has no variables");
    if (scm.roles.size() != p) throw ShapeError("roles length does not match names");
    if (scm.theta.rows() != p || scm.theta.cols() != p)
        throw ShapeError("theta must be " + std::to_string(p) + "x" + std::to_string(p));
    if (scm.mu.size() != p) throw ShapeError("mu length does not match names");
    if (scm.error_cov.rows() != p || scm.error_cov.cols() != p)
        throw ShapeError("error_cov must be " + std::to_string(p) + "x" + std::to_string(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (scm.names[i] == scm.names[j])
                throw InputError("duplicate variable name '" + scm.names[i] + "'");

    ScmAnalysis out;
    bool have_response = false;
    for (std::size_t i = 0; i < p; ++i) {
        switch (scm.roles[i]) {
            case Role::Feature:
                out.features.push_back(i);
                break;
            case Role::Confounder:
                out.confounders.push_back(i);
                break;
            case Role::Mediator:
                out.mediators.push_back(i);
                break;
            case Role::Response:
                if (have_response) throw RoleError("more than one response variable");
                have_response = true;
                out.response = i;
                break;
        }
    }
    if (!have_response) throw RoleError("exactly one response variable is required");
    if (out.features.empty()) throw RoleError("at least one feature variable is required");

    // Edge legality against the two task templates.
    out.anticausal_ok = true;
    out.causal_ok = true;
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t j = 0; j < p; ++j) {
            if (scm.theta(k, j) == 0.0) continue;
            if (k == j)
                throw CycleError("self-loop on variable '" + scm.names[k] + "'");
            const bool a = edge_legal_anticausal(scm.roles[k], scm.roles[j]);
            const bool c = edge_legal_causal(scm.roles[k], scm.roles[j]);
            if (!a && !c)
                throw RoleError("edge " + scm.names[j] + " -> " + scm.names[k] +
                                " (" + std::string(role_name(scm.roles[j])) + " -> " +
                                role_name(scm.roles[k]) + ") is not allowed in any task template");
            out.anticausal_ok = out.anticausal_ok && a;
            out.causal_ok = out.causal_ok && c;
        }
    }
    if (!out.anticausal_ok && !out.causal_ok)
        throw RoleError("edges mix anticausal-only and causal-only directions");

    // Kahn topological sort on edges j -> k where theta(k, j) != 0.
    std::vector<std::size_t> in_deg(p, 0);
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t j = 0; j < p; ++j)
            if (scm.theta(k, j) != 0.0) ++in_deg[k];
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < p; ++i)
        if (in_deg[i] == 0) queue.push_back(i);
    while (!queue.empty()) {
        // Smallest index first, for a deterministic canonical order.
        const auto it = std::min_element(queue.begin(), queue.end());
        const std::size_t j = *it;
        queue.erase(it);
        out.order.push_back(j);
        for (std::size_t k = 0; k < p; ++k) {
            if (scm.theta(k, j) != 0.0 && --in_deg[k] == 0) queue.push_back(k);
        }
    }
    if (out.order.size() != p) {
        std::string stuck;
        for (std::size_t i = 0; i < p; ++i)
            if (in_deg[i] > 0) stuck += (stuck.empty() ? "" : ", ") + scm.names[i];
        throw CycleError("theta admits no topological order; cycle through {" + stuck + "}");
    }

    // Error covariance: symmetric PSD within tolerance.
    double asym = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            asym = std::max(asym, std::abs(scm.error_cov(i, j) - scm.error_cov(j, i)));
    if (asym > 1e-9 * std::max(1.0, scm.error_cov.max_abs()))
        throw PsdError("error_cov is not symmetric");
    const linalg::EigenSym eig = linalg::eigen_sym(scm.error_cov);
    const double lmax = std::max(std::abs(eig.values.back()), 1.0);
    if (eig.values.front() < -kPsdTol * lmax)
        throw PsdError("error_cov is not PSD (min eigenvalue " +
                       std::to_string(eig.values.front()) + ")");

    return out;
}

std::vector<std::size_t> validate(const LinearScm& scm) { return analyze(scm).order; }

namespace {

// Solve (I - theta) t = rhs by substitution along the topological order.
std::vector<double> solve_i_minus_theta(const Matrix& theta,
                                        const std::vector<std::size_t>& order,
                                        const std::vector<double>& rhs) {
    std::vector<double> t = rhs;
    for (const std::size_t k : order) {
        double acc = rhs[k];
        for (std::size_t j = 0; j < theta.cols(); ++j) {
            const double c = theta(k, j);
            if (c != 0.0 && j != k) acc += c * t[j];
        }
        t[k] = acc;
    }
    return t;
}

// Full (I - theta)^{-1}, column by column.
Matrix total_map(const Matrix& theta, const std::vector<std::size_t>& order) {
    const std::size_t p = theta.rows();
    Matrix t(p, p);
    std::vector<double> e(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        e.assign(p, 0.0);
        e[c] = 1.0;
        const std::vector<double> col = solve_i_minus_theta(theta, order, e);
        for (std::size_t r = 0; r < p; ++r) t(r, c) = col[r];
    }
    return t;
}

}  // namespace

Moments implied_moments(const LinearScm& scm) {
    const ScmAnalysis a = analyze(scm);
    const Matrix t = total_map(scm.theta, a.order);
    Moments m;
    m.mean = solve_i_minus_theta(scm.theta, a.order, scm.mu);
    m.cov = t * scm.error_cov * t.transposed();
    return m;
}

Dataset simulate(const LinearScm& scm, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("sample count must be at least 1");
    const ScmAnalysis a = analyze(scm);
    const std::size_t p = scm.size();

    const Matrix factor = linalg::psd_factor(scm.error_cov, kPsdTol);
    const Matrix t = total_map(scm.theta, a.order);
    const Matrix b = t * factor;  // standard normals -> centered variables
    const std::vector<double> mean = solve_i_minus_theta(scm.theta, a.order, scm.mu);

    Dataset out(scm.names, scm.roles, n, "simulated");
    for (std::size_t k = 0; k < p; ++k) {
        auto col = out.column(k);
        std::fill(col.begin(), col.end(), mean[k]);
    }

    rng::Stream stream(seed, rng::tag("simulate"));
    std::vector<double> g(n);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) g[i] = stream.next_normal();
        for (std::size_t k = 0; k < p; ++k) {
            const double w = b(k, j);
            if (w != 0.0) kernels::axpy(w, g.data(), out.column(k).data(), n);
        }
    }
    return out;
}

namespace {

// Positions of `block` within `order`, translated to block-local indices.
std::vector<std::size_t> block_topo(const std::vector<std::size_t>& block,
                                    const std::vector<std::size_t>& order) {
    std::vector<std::size_t> local;
    local.reserve(block.size());
    for (const std::size_t global : order) {
        const auto it = std::find(block.begin(), block.end(), global);
        if (it != block.end()) local.push_back(static_cast<std::size_t>(it - block.begin()));
    }
    return local;
}

// Solve (I - theta_zz) X = rhs for a within-block coefficient matrix.
Matrix solve_block(const Matrix& theta_zz, const std::vector<std::size_t>& local_topo,
                   const Matrix& rhs) {
    Matrix x = rhs;
    for (const std::size_t k : local_topo) {
        for (std::size_t c = 0; c < rhs.cols(); ++c) {
            double acc = rhs(k, c);
            for (std::size_t m = 0; m < theta_zz.cols(); ++m) {
                const double w = theta_zz(k, m);
                if (w != 0.0 && m != k) acc += w * x(m, c);
            }
            x(k, c) = acc;
        }
    }
    return x;
}

std::vector<double> solve_block_vec(const Matrix& theta_zz,
                                    const std::vector<std::size_t>& local_topo,
                                    const std::vector<double>& rhs) {
    Matrix r(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) r(i, 0) = rhs[i];
    const Matrix x = solve_block(theta_zz, local_topo, r);
    std::vector<double> out(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
    return out;
}

std::vector<double> select_vec(const std::vector<double>& v,
                               const std::vector<std::size_t>& idx) {
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

}  // namespace

ReparameterizedScm reparameterize(const LinearScm& scm) {
    const ScmAnalysis a = analyze(scm);
    if (!a.anticausal_ok) throw RoleError("model does not fit the anticausal task template");
    const std::vector<std::size_t> y{a.response};

    const Matrix theta_cc = scm.theta.select(a.confounders, a.confounders);
    const Matrix theta_mm = scm.theta.select(a.mediators, a.mediators);
    const Matrix theta_xx = scm.theta.select(a.features, a.features);
    const std::vector<std::size_t> topo_c = block_topo(a.confounders, a.order);
    const std::vector<std::size_t> topo_m = block_topo(a.mediators, a.order);
    const std::vector<std::size_t> topo_x = block_topo(a.features, a.order);

    ReparameterizedScm r;
    r.gamma_yc = scm.theta.select(y, a.confounders);
    r.gamma_mc = solve_block(theta_mm, topo_m, scm.theta.select(a.mediators, a.confounders));
    r.gamma_my = solve_block(theta_mm, topo_m, scm.theta.select(a.mediators, y));
    r.gamma_xc = solve_block(theta_xx, topo_x, scm.theta.select(a.features, a.confounders));
    r.gamma_xm = solve_block(theta_xx, topo_x, scm.theta.select(a.features, a.mediators));
    r.gamma_xy = solve_block(theta_xx, topo_x, scm.theta.select(a.features, y));

    const Matrix t_cc = solve_block(theta_cc, topo_c, Matrix::identity(a.confounders.size()));
    const Matrix t_mm = solve_block(theta_mm, topo_m, Matrix::identity(a.mediators.size()));
    const Matrix t_xx = solve_block(theta_xx, topo_x, Matrix::identity(a.features.size()));
    r.w_cov_c = t_cc * scm.error_cov.select(a.confounders, a.confounders) * t_cc.transposed();
    r.w_cov_m = t_mm * scm.error_cov.select(a.mediators, a.mediators) * t_mm.transposed();
    r.w_cov_x = t_xx * scm.error_cov.select(a.features, a.features) * t_xx.transposed();
    r.w_var_y = scm.error_cov(a.response, a.response);

    r.mu_c = linalg::mat_vec(t_cc, select_vec(scm.mu, a.confounders));
    r.mu_m = linalg::mat_vec(t_mm, select_vec(scm.mu, a.mediators));
    r.mu_x = linalg::mat_vec(t_xx, select_vec(scm.mu, a.features));
    r.mu_y = scm.mu[a.response];
    return r;
}

CausalReparameterizedScm reparameterize_causal(const LinearScm& scm) {
    const ScmAnalysis a = analyze(scm);
    if (!a.causal_ok) throw RoleError("model does not fit the causal task template");
    const std::vector<std::size_t> y{a.response};

    const Matrix theta_cc = scm.theta.select(a.confounders, a.confounders);
    const Matrix theta_mm = scm.theta.select(a.mediators, a.mediators);
    const Matrix theta_xx = scm.theta.select(a.features, a.features);
    const std::vector<std::size_t> topo_c = block_topo(a.confounders, a.order);
    const std::vector<std::size_t> topo_m = block_topo(a.mediators, a.order);
    const std::vector<std::size_t> topo_x = block_topo(a.features, a.order);

    CausalReparameterizedScm r;
    r.gamma_xc = solve_block(theta_xx, topo_x, scm.theta.select(a.features, a.confounders));
    r.gamma_mc = solve_block(theta_mm, topo_m, scm.theta.select(a.mediators, a.confounders));
    r.gamma_mx = solve_block(theta_mm, topo_m, scm.theta.select(a.mediators, a.features));
    r.gamma_yc = scm.theta.select(y, a.confounders);
    r.gamma_ym = scm.theta.select(y, a.mediators);
    r.gamma_yx = scm.theta.select(y, a.features);

    const Matrix t_cc = solve_block(theta_cc, topo_c, Matrix::identity(a.confounders.size()));
    const Matrix t_mm = solve_block(theta_mm, topo_m, Matrix::identity(a.mediators.size()));
    const Matrix t_xx = solve_block(theta_xx, topo_x, Matrix::identity(a.features.size()));
    r.w_cov_c = t_cc * scm.error_cov.select(a.confounders, a.confounders) * t_cc.transposed();
    r.w_cov_m = t_mm * scm.error_cov.select(a.mediators, a.mediators) * t_mm.transposed();
    r.w_cov_x = t_xx * scm.error_cov.select(a.features, a.features) * t_xx.transposed();
    r.w_var_y = scm.error_cov(a.response, a.response);

    r.mu_c = linalg::mat_vec(t_cc, select_vec(scm.mu, a.confounders));
    r.mu_m = linalg::mat_vec(t_mm, select_vec(scm.mu, a.mediators));
    r.mu_x = linalg::mat_vec(t_xx, select_vec(scm.mu, a.features));
    r.mu_y = scm.mu[a.response];
    return r;
}

LinearScm to_linear_scm(const ReparameterizedScm& r, const LinearScm& original) {
    const ScmAnalysis a = analyze(original);
    const std::size_t p = original.size();

    LinearScm out;
    out.names = original.names;
    out.roles = original.roles;
    out.theta = Matrix(p, p);
    out.mu.assign(p, 0.0);
    out.error_cov = Matrix(p, p);

    auto put_block = [&](const Matrix& g, const std::vector<std::size_t>& to,
                         const std::vector<std::size_t>& from) {
        for (std::size_t i = 0; i < to.size(); ++i)
            for (std::size_t j = 0; j < from.size(); ++j) out.theta(to[i], from[j]) = g(i, j);
    };
    const std::vector<std::size_t> y{a.response};
    put_block(r.gamma_yc, y, a.confounders);
    put_block(r.gamma_mc, a.mediators, a.confounders);
    put_block(r.gamma_my, a.mediators, y);
    put_block(r.gamma_xc, a.features, a.confounders);
    put_block(r.gamma_xm, a.features, a.mediators);
    put_block(r.gamma_xy, a.features, y);

    auto put_cov = [&](const Matrix& s, const std::vector<std::size_t>& idx) {
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) out.error_cov(idx[i], idx[j]) = s(i, j);
    };
    put_cov(r.w_cov_c, a.confounders);
    put_cov(r.w_cov_m, a.mediators);
    put_cov(r.w_cov_x, a.features);
    out.error_cov(a.response, a.response) = r.w_var_y;

    // Cross-block error covariances also move through the within-block maps:
    // Cov(W_V, W_Z) = T_VV Psi_VZ T_ZZ^T.
    const std::vector<std::vector<std::size_t>> blocks = {a.confounders, {a.response},
                                                          a.mediators, a.features};
    std::vector<Matrix> tmaps;
    for (const auto& blk : blocks) {
        const Matrix theta_blk = original.theta.select(blk, blk);
        tmaps.push_back(
            solve_block(theta_blk, block_topo(blk, a.order), Matrix::identity(blk.size())));
    }
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        for (std::size_t bj = 0; bj < blocks.size(); ++bj) {
            if (bi == bj) continue;
            const Matrix cross =
                tmaps[bi] * original.error_cov.select(blocks[bi], blocks[bj]) *
                tmaps[bj].transposed();
            for (std::size_t i = 0; i < blocks[bi].size(); ++i)
                for (std::size_t j = 0; j < blocks[bj].size(); ++j)
                    out.error_cov(blocks[bi][i], blocks[bj][j]) = cross(i, j);
        }
    }

    for (std::size_t i = 0; i < a.confounders.size(); ++i) out.mu[a.confounders[i]] = r.mu_c[i];
    for (std::size_t i = 0; i < a.mediators.size(); ++i) out.mu[a.mediators[i]] = r.mu_m[i];
    for (std::size_t i = 0; i < a.features.size(); ++i) out.mu[a.features[i]] = r.mu_x[i];
    out.mu[a.response] = r.mu_y;
    return out;
}

TotalEffects total_effects(const LinearScm& scm) {
    const ReparameterizedScm r = reparameterize(scm);
    TotalEffects t;
    if (r.gamma_xm.cols() == 0) {
        t.xy = r.gamma_xy;
        t.xc = r.gamma_xc;
    } else {
        t.xy = r.gamma_xy + r.gamma_xm * r.gamma_my;
        t.xc = r.gamma_xc + r.gamma_xm * r.gamma_mc;
    }
    return t;
}

CovDecomposition covariance_decomposition(const LinearScm& scm) {
    const ScmAnalysis a = analyze(scm);
    const ReparameterizedScm r = reparameterize(scm);
    const Moments m = implied_moments(scm);
    const double var_y = m.cov(a.response, a.response);
    const Matrix cov_c = m.cov.select(a.confounders, a.confounders);
    const std::size_t nx = a.features.size();

    auto col0 = [](const Matrix& m1) {
        std::vector<double> v(m1.rows());
        for (std::size_t i = 0; i < m1.rows(); ++i) v[i] = m1.empty() ? 0.0 : m1(i, 0);
        return v;
    };

    CovDecomposition d;
    d.direct = col0(r.gamma_xy.scaled(var_y));
    d.indirect.assign(nx, 0.0);
    if (r.gamma_xm.cols() > 0) d.indirect = col0((r.gamma_xm * r.gamma_my).scaled(var_y));
    d.confounding_direct.assign(nx, 0.0);
    d.confounding_via_m.assign(nx, 0.0);
    if (!a.confounders.empty()) {
        d.confounding_direct = col0(r.gamma_xc * cov_c * r.gamma_yc.transposed());
        if (r.gamma_xm.cols() > 0)
            d.confounding_via_m = col0(r.gamma_xm * r.gamma_mc * cov_c * r.gamma_yc.transposed());
    }
    return d;
}

LinearScm standardize(const LinearScm& scm) {
    const Moments m = implied_moments(scm);
    const std::size_t p = scm.size();
    std::vector<double> sd(p);
    for (std::size_t i = 0; i < p; ++i) {
        if (m.cov(i, i) <= 0.0)
            throw InputError("cannot standardize: variable '" + scm.names[i] +
                             "' has non-positive variance");
        sd[i] = std::sqrt(m.cov(i, i));
    }
    LinearScm out = scm;
    out.mu.assign(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t j = 0; j < p; ++j) {
            out.theta(k, j) = scm.theta(k, j) * sd[j] / sd[k];
            out.error_cov(k, j) = scm.error_cov(k, j) / (sd[k] * sd[j]);
        }
    }
    return out;
}

LinearScm with_unit_variances(const LinearScm& scm) {
    const ScmAnalysis a = analyze(scm);
    const std::size_t p = scm.size();
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (i != j && scm.error_cov(i, j) != 0.0)
                throw InputError("with_unit_variances requires a diagonal error covariance");

    LinearScm out = scm;
    out.mu.assign(p, 0.0);
    Matrix cov(p, p);
    for (const std::size_t k : a.order) {
        double pred_var = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double wj = scm.theta(k, j);
            if (wj == 0.0) continue;
            for (std::size_t m2 = 0; m2 < p; ++m2) {
                const double wm = scm.theta(k, m2);
                if (wm != 0.0) pred_var += wj * wm * cov(j, m2);
            }
        }
        const double psi = 1.0 - pred_var;
        if (psi <= 1e-12)
            throw InputError("path coefficients admit no unit-variance model (variable '" +
                             scm.names[k] + "' needs error variance " + std::to_string(psi) + ")");
        out.error_cov(k, k) = psi;
        for (std::size_t j = 0; j < p; ++j) {
            if (j == k) continue;
            double c = 0.0;
            for (std::size_t m2 = 0; m2 < p; ++m2) {
                const double w = scm.theta(k, m2);
                if (w != 0.0) c += w * cov(m2, j);
            }
            cov(k, j) = c;
            cov(j, k) = c;
        }
        cov(k, k) = 1.0;
    }
    return out;
}

}  // namespace decon
