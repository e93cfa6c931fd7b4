#pragma once

#include <vector>

#include "faceforge/rig.hpp"
#include "faceforge/rng.hpp"

namespace faceforge {

// Registered scan corpus; every scan shares the rig topology.
struct ScanCorpus {
    std::vector<Points> scans;        // M entries, each N x 3
    std::uint64_t topology_hash = 0;  // of the registration target

    int scan_count() const { return static_cast<int>(scans.size()); }
    int vertex_count() const { return scans.empty() ? 0 : static_cast<int>(scans[0].rows()); }
};

struct FitReport {
    std::vector<double> per_scan_residual_rms;   // model units
    std::vector<double> explained_variance;      // ratio per component, non-increasing
    std::vector<double> singular_values;
    bool degenerate = false;                     // corpus had no variation
};

struct IdentityFit {
    Matrix basis;   // k x 3N, rows orthonormal
    Matrix betas;   // M x k
    FitReport report;
};

// Multivariate normal over identity parameters, with a cached lower
// triangular square root of the covariance.
struct IdentityDistribution {
    Vector mean;
    Matrix covariance;
    Matrix factor;  // lower triangular, factor * factor^T == covariance

    int dims() const { return static_cast<int>(mean.size()); }
};

// Closed-form joint fit of basis and coefficients: truncated SVD of the
// template-centered flattened corpus. Deterministic; component signs fixed
// so the largest-magnitude entry of each basis row is positive.
IdentityFit fit_identity_basis(const ScanCorpus& corpus, int k, const Points& template_vertices);

// Sample mean and unbiased sample covariance; diagonal jitter is added when
// the Cholesky factorization fails.
IdentityDistribution fit_identity_distribution(const Matrix& betas);

// mean + factor * z with z standard normal, optionally truncated per
// coordinate to |z_i| <= truncation_sigma (0 disables truncation).
IdentityParams sample_identity(const IdentityDistribution& dist, Rng& rng,
                               double truncation_sigma = 0.0);

}  // namespace faceforge
