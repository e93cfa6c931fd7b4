#include "faceforge/model_learning.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace faceforge {

IdentityFit fit_identity_basis(const ScanCorpus& corpus, int k, const Points& template_vertices) {
    const int m = corpus.scan_count();
    const int n = static_cast<int>(template_vertices.rows());
    require(m >= 2, ErrorCode::InsufficientData,
            "corpus has " + std::to_string(m) + " scans, need at least 2");
    require(corpus.vertex_count() == n, ErrorCode::InvalidParameter,
            "corpus vertex count " + std::to_string(corpus.vertex_count()) +
                " does not match template N=" + std::to_string(n));
    require(k >= 1 && k <= std::min(m - 1, 3 * n), ErrorCode::InvalidParameter,
            "component count " + std::to_string(k) + " not in [1, min(M-1, 3N)] = [1, " +
                std::to_string(std::min(m - 1, 3 * n)) + "]");

    // Center by the fixed artist template, not the corpus mean.
    const Eigen::Map<const Vector> t_flat(template_vertices.data(), 3 * n);
    Matrix centered(m, 3 * n);
    for (int i = 0; i < m; ++i) {
        require(corpus.scans[i].rows() == n, ErrorCode::InvalidParameter,
                "scan " + std::to_string(i) + " has a different vertex count");
        centered.row(i) =
            (Eigen::Map<const Vector>(corpus.scans[i].data(), 3 * n) - t_flat).transpose();
    }

    IdentityFit fit;
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();

    const double scale = std::max(1.0, t_flat.norm());
    fit.report.degenerate = sigma.size() == 0 || sigma(0) <= 1e-12 * scale;

    if (fit.report.degenerate) {
        // No variation: zero coefficients against an arbitrary orthonormal basis.
        fit.basis = Matrix::Zero(k, 3 * n);
        for (int i = 0; i < k; ++i) fit.basis(i, i) = 1.0;
        fit.betas = Matrix::Zero(m, k);
    } else {
        fit.basis = svd.matrixV().leftCols(k).transpose();
        fit.betas = svd.matrixU().leftCols(k) * sigma.head(k).asDiagonal();
        // Sign convention: largest-magnitude entry of each component positive.
        for (int i = 0; i < k; ++i) {
            int j = 0;
            fit.basis.row(i).cwiseAbs().maxCoeff(&j);
            if (fit.basis(i, j) < 0.0) {
                fit.basis.row(i) = -fit.basis.row(i);
                fit.betas.col(i) = -fit.betas.col(i);
            }
        }
    }

    const Matrix residual = centered - fit.betas * fit.basis;
    fit.report.per_scan_residual_rms.resize(m);
    for (int i = 0; i < m; ++i) {
        fit.report.per_scan_residual_rms[i] = residual.row(i).norm() / std::sqrt(3.0 * n);
    }

    const double total = sigma.squaredNorm();
    fit.report.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
    fit.report.explained_variance.resize(sigma.size());
    for (int i = 0; i < sigma.size(); ++i) {
        fit.report.explained_variance[i] = total > 0.0 ? sigma(i) * sigma(i) / total : 0.0;
    }
    return fit;
}

IdentityDistribution fit_identity_distribution(const Matrix& betas) {
    const int m = static_cast<int>(betas.rows());
    const int k = static_cast<int>(betas.cols());
    require(m >= 2, ErrorCode::InsufficientData,
            "need at least 2 parameter vectors to fit a distribution, got " + std::to_string(m));
    require(betas.allFinite(), ErrorCode::InvalidParameter, "identity parameters must be finite");

    IdentityDistribution dist;
    dist.mean = betas.colwise().mean();
    const Matrix centered = betas.rowwise() - dist.mean.transpose();
    dist.covariance = centered.transpose() * centered / static_cast<double>(m - 1);
    // exact symmetry, independent of summation order
    dist.covariance = ((dist.covariance + dist.covariance.transpose()) * 0.5).eval();

    const double trace = dist.covariance.trace();
    if (trace <= 0.0) {
        dist.covariance.setZero();
        dist.factor = Matrix::Zero(k, k);
        return dist;
    }

    double jitter = 1e-10 * trace / k;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::LLT<Matrix> llt(dist.covariance);
        if (llt.info() == Eigen::Success) {
            dist.factor = llt.matrixL();
            return dist;
        }
        dist.covariance.diagonal().array() += jitter;
        jitter *= 10.0;
    }
    fail(ErrorCode::Internal, "covariance factorization failed despite jitter");
}

IdentityParams sample_identity(const IdentityDistribution& dist, Rng& rng,
                               double truncation_sigma) {
    const int k = dist.dims();
    require(k >= 1 && dist.factor.rows() == k && dist.factor.cols() == k,
            ErrorCode::InvalidParameter, "identity distribution is not initialized");

    Vector z(k);
    for (int i = 0; i < k; ++i) {
        double v = rng.normal();
        if (truncation_sigma > 0.0) v = std::clamp(v, -truncation_sigma, truncation_sigma);
        z(i) = v;
    }
    IdentityParams params;
    params.coefficients = dist.mean + dist.factor * z;
    return params;
}

}  // namespace faceforge
