#include "hsad/gmm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "hsad/clustering.hpp"
#include "hsad/errors.hpp"
#include "hsad/log.hpp"
#include "hsad/mahalanobis.hpp"

namespace hsad {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double chol_log_det(const Matrix& lower) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
    return 2.0 * s;
}

// Per-sample, per-component log( w_k N(x; mu_k, Sigma_k) ).
Matrix component_log_densities(const GmmModel& model, const Matrix& X) {
    const Eigen::Index n = X.rows();
    Matrix logp(n, model.k);
    for (int c = 0; c < model.k; ++c) {
        Matrix centered = (X.rowwise() - model.means[static_cast<size_t>(c)].transpose()).transpose();
        model.chol_lower[static_cast<size_t>(c)]
            .triangularView<Eigen::Lower>()
            .solveInPlace(centered);
        Vector d2 = centered.colwise().squaredNorm().transpose();
        double base = std::log(model.weights(c)) -
                      0.5 * (model.dim * kLog2Pi + model.log_dets[static_cast<size_t>(c)]);
        logp.col(c) = (-0.5 * d2.array() + base).matrix();
    }
    return logp;
}

// Row-wise log-sum-exp.
Vector log_sum_exp_rows(const Matrix& logp) {
    Vector mx = logp.rowwise().maxCoeff();
    Vector out(logp.rows());
    for (Eigen::Index i = 0; i < logp.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < logp.cols(); ++c)
            s += std::exp(logp(i, c) - mx(i));
        out(i) = mx(i) + std::log(s);
    }
    return out;
}

} // namespace

void GmmModel::refresh_factorizations() {
    chol_lower.resize(static_cast<size_t>(k));
    log_dets.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) {
        Eigen::LLT<Matrix> llt(covariances[static_cast<size_t>(c)]);
        if (llt.info() != Eigen::Success)
            throw SingularityError("gmm: component covariance not positive definite");
        chol_lower[static_cast<size_t>(c)] = llt.matrixL();
        log_dets[static_cast<size_t>(c)] = chol_log_det(chol_lower[static_cast<size_t>(c)]);
    }
}

GmmModel gmm_fit(const Matrix& samples, int k, uint64_t seed, int max_iter,
                 double tol, double ridge) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    if (k < 1)
        throw ParamError("gmm_fit: k must be >= 1");
    if (n < static_cast<Eigen::Index>(k) * (d + 1))
        throw ParamError("gmm_fit: need at least k*(d+1) = " +
                         std::to_string(static_cast<long>(k) * (d + 1)) +
                         " samples, got " + std::to_string(n));

    GmmModel model;
    model.k = k;
    model.dim = static_cast<int>(d);
    model.weights.resize(k);
    model.means.resize(static_cast<size_t>(k));
    model.covariances.resize(static_cast<size_t>(k));

    HardClustering init = kmeans_fit(samples, k, seed, 100, ridge);
    for (int c = 0; c < k; ++c) {
        model.weights(c) = static_cast<double>(init.counts[static_cast<size_t>(c)]) / n;
        model.means[static_cast<size_t>(c)] = init.centroids.row(c).transpose();
        const Matrix& L = init.per_cluster_chol[static_cast<size_t>(c)];
        model.covariances[static_cast<size_t>(c)] = L * L.transpose();
    }
    model.refresh_factorizations();

    Matrix resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // E step
        Matrix logp = component_log_densities(model, samples);
        Vector lse = log_sum_exp_rows(logp);
        double ll = lse.sum();
        model.log_lik_trace.push_back(ll);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c)
                resp(i, c) = std::exp(logp(i, c) - lse(i));

        if (iter > 0 && ll - prev_ll < tol) break;
        prev_ll = ll;

        // M step
        bool reseeded = false;
        for (int c = 0; c < k; ++c) {
            double nk = resp.col(c).sum();
            if (nk / n < 1e-12) {
                // component collapsed: re-seed from the lowest-likelihood sample
                Eigen::Index worst;
                lse.minCoeff(&worst);
                Matrix cov = covariance_about(samples, samples.colwise().mean().transpose());
                double eps = relative_ridge(cov, ridge);
                cov.diagonal().array() += eps;
                model.means[static_cast<size_t>(c)] = samples.row(worst).transpose();
                model.covariances[static_cast<size_t>(c)] = cov;
                model.weights(c) = 1.0 / n;
                reseeded = true;
                log_warn("gmm_fit: component " + std::to_string(c) +
                         " collapsed; re-seeded from lowest-likelihood sample");
                continue;
            }
            model.weights(c) = nk / n;
            Vector mu = (resp.col(c).transpose() * samples).transpose() / nk;
            Matrix centered = samples.rowwise() - mu.transpose();
            Matrix cov = centered.transpose() * resp.col(c).asDiagonal() * centered / nk;
            double eps = relative_ridge(cov, ridge);
            cov.diagonal().array() += eps;
            model.means[static_cast<size_t>(c)] = mu;
            model.covariances[static_cast<size_t>(c)] = cov;
        }
        model.weights /= model.weights.sum();
        if (reseeded) prev_ll = -std::numeric_limits<double>::infinity();
        model.refresh_factorizations();
    }
    return model;
}

double gmm_nll(const GmmModel& model, const Vector& x) {
    if (x.size() != model.dim)
        throw ShapeError("gmm_nll: input dimension " + std::to_string(x.size()) +
                         " != model dimension " + std::to_string(model.dim));
    Matrix X = x.transpose();
    return -log_sum_exp_rows(component_log_densities(model, X))(0);
}

Vector gmm_nll_all(const GmmModel& model, const Matrix& X) {
    if (X.cols() != model.dim)
        throw ShapeError("gmm_nll: input dimension " + std::to_string(X.cols()) +
                         " != model dimension " + std::to_string(model.dim));
    return -log_sum_exp_rows(component_log_densities(model, X));
}

} // namespace hsad
