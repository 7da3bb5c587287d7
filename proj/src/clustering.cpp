#include "hsad/clustering.hpp"

#include <limits>

#include "hsad/errors.hpp"
#include "hsad/mahalanobis.hpp"
#include "hsad/rng.hpp"

namespace hsad {

namespace {

// Squared distances from every sample to one point.
Vector sq_dist_to(const Matrix& samples, const Vector& p) {
    return (samples.rowwise() - p.transpose()).rowwise().squaredNorm();
}

// n x k squared distances via the expansion |x|^2 + |c|^2 - 2 x.c, clamped
// at zero against rounding.
Matrix sq_dist_matrix(const Matrix& samples, const Matrix& centroids) {
    Vector xs = samples.rowwise().squaredNorm();
    Vector cs = centroids.rowwise().squaredNorm();
    Matrix d = -2.0 * samples * centroids.transpose();
    d.colwise() += xs;
    d.rowwise() += cs.transpose();
    return d.cwiseMax(0.0);
}

} // namespace

std::vector<size_t> kmeanspp_indices(const Matrix& samples, int k, uint64_t seed) {
    const size_t n = static_cast<size_t>(samples.rows());
    Rng rng(seed);
    std::vector<size_t> chosen;
    std::vector<char> used(n, 0);
    chosen.reserve(static_cast<size_t>(k));

    size_t first = static_cast<size_t>(rng.uniform_int(n));
    chosen.push_back(first);
    used[first] = 1;
    Vector d2 = sq_dist_to(samples, samples.row(first).transpose());

    while (chosen.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (!used[i]) total += d2(static_cast<Eigen::Index>(i));
        size_t pick = n;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                if (used[i]) continue;
                acc += d2(static_cast<Eigen::Index>(i));
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // all remaining points coincide with a centroid
            for (size_t i = 0; i < n; ++i)
                if (!used[i]) {
                    pick = i;
                    break;
                }
        }
        if (pick == n) break;
        chosen.push_back(pick);
        used[pick] = 1;
        Vector nd = sq_dist_to(samples, samples.row(static_cast<Eigen::Index>(pick)).transpose());
        d2 = d2.cwiseMin(nd);
    }
    return chosen;
}

HardClustering kmeans_fit(const Matrix& samples, int k, uint64_t seed,
                          int max_iter, double ridge_rel) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    if (k < 1)
        throw ParamError("kmeans_fit: k must be >= 1");
    if (n < k)
        throw ParamError("kmeans_fit: k = " + std::to_string(k) +
                         " exceeds sample count " + std::to_string(n));

    HardClustering out;
    out.k = k;
    out.centroids.resize(k, d);
    auto seeds = kmeanspp_indices(samples, k, seed);
    for (int c = 0; c < k; ++c)
        out.centroids.row(c) = samples.row(static_cast<Eigen::Index>(seeds[static_cast<size_t>(c)]));

    out.assignment.assign(static_cast<size_t>(n), -1);
    out.counts.assign(static_cast<size_t>(k), 0);

    for (int iter = 0; iter < max_iter; ++iter) {
        Matrix d2 = sq_dist_matrix(samples, out.centroids);
        bool changed = false;
        std::fill(out.counts.begin(), out.counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bestd = d2(i, 0);
            for (int c = 1; c < k; ++c)
                if (d2(i, c) < bestd) {
                    bestd = d2(i, c);
                    best = c;
                }
            if (out.assignment[static_cast<size_t>(i)] != best) {
                out.assignment[static_cast<size_t>(i)] = best;
                changed = true;
            }
            ++out.counts[static_cast<size_t>(best)];
        }

        // re-seed empty clusters from the farthest sample
        for (int c = 0; c < k; ++c) {
            if (out.counts[static_cast<size_t>(c)] > 0) continue;
            Eigen::Index far = 0;
            double fard = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                int a = out.assignment[static_cast<size_t>(i)];
                if (out.counts[static_cast<size_t>(a)] <= 1) continue;
                double dist = d2(i, a);
                if (dist > fard) {
                    fard = dist;
                    far = i;
                }
            }
            int old = out.assignment[static_cast<size_t>(far)];
            --out.counts[static_cast<size_t>(old)];
            out.assignment[static_cast<size_t>(far)] = c;
            out.counts[static_cast<size_t>(c)] = 1;
            out.centroids.row(c) = samples.row(far);
            changed = true;
        }

        Matrix sums = Matrix::Zero(k, d);
        for (Eigen::Index i = 0; i < n; ++i)
            sums.row(out.assignment[static_cast<size_t>(i)]) += samples.row(i);
        for (int c = 0; c < k; ++c)
            if (out.counts[static_cast<size_t>(c)] > 0)
                out.centroids.row(c) =
                    sums.row(c) / static_cast<double>(out.counts[static_cast<size_t>(c)]);

        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            inertia += (samples.row(i) -
                        out.centroids.row(out.assignment[static_cast<size_t>(i)]))
                           .squaredNorm();
        out.inertia_trace.push_back(inertia);
        out.inertia = inertia;
        if (!changed) break;
    }

    out.per_cluster_chol.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) {
        int cnt = out.counts[static_cast<size_t>(c)];
        Matrix cov;
        if (cnt >= 2) {
            Matrix members(cnt, d);
            int r = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (out.assignment[static_cast<size_t>(i)] == c)
                    members.row(r++) = samples.row(i);
            cov = covariance_about(members, out.centroids.row(c).transpose());
        } else {
            cov = Matrix::Zero(d, d);
        }
        out.per_cluster_chol[static_cast<size_t>(c)] =
            ridged_cholesky(cov, ridge_rel);
    }
    return out;
}

FuzzyClustering fcm_fit(const Matrix& samples, int k, double fuzzifier,
                        uint64_t seed, int max_iter, double tol,
                        double ridge_rel) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    if (k < 2)
        throw ParamError("fcm_fit: k must be >= 2");
    if (n < k)
        throw ParamError("fcm_fit: k exceeds sample count");
    if (!(fuzzifier > 1.0))
        throw ParamError("fcm_fit: fuzzifier m must be > 1");

    FuzzyClustering out;
    out.k = k;
    out.fuzzifier = fuzzifier;
    out.centroids.resize(k, d);
    auto seeds = kmeanspp_indices(samples, k, seed);
    for (int c = 0; c < k; ++c)
        out.centroids.row(c) = samples.row(static_cast<Eigen::Index>(seeds[static_cast<size_t>(c)]));

    out.memberships = Matrix::Zero(n, k);
    const double expo = 1.0 / (fuzzifier - 1.0);

    Matrix prev;
    for (int iter = 0; iter < max_iter; ++iter) {
        Matrix d2 = sq_dist_matrix(samples, out.centroids);
        for (Eigen::Index i = 0; i < n; ++i) {
            int zero_count = 0;
            for (int c = 0; c < k; ++c)
                if (d2(i, c) == 0.0) ++zero_count;
            if (zero_count > 0) {
                for (int c = 0; c < k; ++c)
                    out.memberships(i, c) =
                        d2(i, c) == 0.0 ? 1.0 / zero_count : 0.0;
                continue;
            }
            // u_ic proportional to d_ic^(-2/(m-1)), evaluated as a
            // log-space softmax so near-zero distances cannot overflow
            double lmax = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double lp = -expo * std::log(d2(i, c));
                out.memberships(i, c) = lp;
                lmax = std::max(lmax, lp);
            }
            double denom = 0.0;
            for (int c = 0; c < k; ++c) {
                double e = std::exp(out.memberships(i, c) - lmax);
                out.memberships(i, c) = e;
                denom += e;
            }
            for (int c = 0; c < k; ++c) out.memberships(i, c) /= denom;
        }

        Matrix um = out.memberships.array().pow(fuzzifier).matrix(); // n x k
        for (int c = 0; c < k; ++c) {
            double w = um.col(c).sum();
            if (w > 0.0)
                out.centroids.row(c) = (um.col(c).transpose() * samples) / w;
        }

        double objective = (um.array() * sq_dist_matrix(samples, out.centroids).array()).sum();
        out.objective_trace.push_back(objective);

        if (prev.size() > 0) {
            double delta = (out.memberships - prev).cwiseAbs().maxCoeff();
            if (delta < tol) break;
        }
        prev = out.memberships;
    }

    out.per_cluster_chol.resize(static_cast<size_t>(k));
    Matrix um = out.memberships.array().pow(fuzzifier).matrix();
    for (int c = 0; c < k; ++c) {
        double w = um.col(c).sum();
        Matrix cov = Matrix::Zero(d, d);
        if (w > 0.0) {
            Matrix centered = samples.rowwise() - out.centroids.row(c);
            cov = centered.transpose() * um.col(c).asDiagonal() * centered / w;
        }
        out.per_cluster_chol[static_cast<size_t>(c)] =
            ridged_cholesky(cov, ridge_rel);
    }
    return out;
}

} // namespace hsad
