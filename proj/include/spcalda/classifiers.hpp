#pragma once

#include "spcalda/core_linalg.hpp"

#include <string>
#include <vector>

namespace spcalda {

enum class Method { SPCALDA, PCALDA, SRRLDA, IR, LDA, ORACLE };

std::string to_string(Method m);
Method method_from_string(const std::string& name);  // case-insensitive

enum class PriorsMode { Empirical, Equal };

std::string to_string(PriorsMode m);
PriorsMode priors_from_string(const std::string& name);

/// A fitted linear classifier of the form
///   score_k(x) = -1/2 |L^{-1} (U^T (x - c) - m_k)|^2 + log pi_k
/// where U is the projection basis (identity for full-space methods) and
/// L the factor of the (ridged) reduced within-class covariance.
struct ReducedLDAModel {
    Method method = Method::SPCALDA;
    Vector centering;             // p
    bool identity_basis = false;  // full-space classifier, no projection
    ProjectionBasis basis;        // p x q when !identity_basis
    Matrix reduced_centroids;     // K x q
    Matrix within_factor;         // q x q lower triangular, or q x 1 std devs
    bool diagonal_within = false;
    Vector log_priors;            // K
    double ridge_used = 0.0;
    bool degenerate = false;      // empty basis, prediction falls back to priors
    std::vector<std::string> warnings;

    Index num_features() const { return centering.size(); }
    int num_classes() const { return static_cast<int>(log_priors.size()); }
    Index reduced_dim() const { return reduced_centroids.cols(); }
};

/// Standard LDA on already projected data Z (rows = observations).
///
/// S is the within-class covariance of Z (divisor n). When
/// lambda_min(S) <= 1e-10 lambda_max(S) a ridge 1e-8 trace(S) / q is added;
/// if S vanishes entirely the between-class trace sets the scale instead.
/// The returned model has zero centering and an identity basis of size q.
ReducedLDAModel fit_reduced_lda(const Matrix& z, const std::vector<int>& labels, int num_classes,
                                PriorsMode priors = PriorsMode::Empirical);

/// Supervised-PCA reduced-rank LDA: center, project onto the top-q
/// eigenvectors of W + gamma B, then LDA in the projected space.
ReducedLDAModel fit_spcalda(const LabeledDataset& ds, double gamma, Index q,
                            PriorsMode priors = PriorsMode::Empirical);

/// Reduced LDA on a precomputed basis. `sm` must come from the same dataset
/// the basis was computed on; used to share one eigendecomposition across q.
ReducedLDAModel fit_on_basis(const ScatterModel& sm, ProjectionBasis basis, Method tag,
                             PriorsMode priors);

/// fit_spcalda with gamma fixed to 1 (ordinary PCA).
ReducedLDAModel fit_pcalda(const LabeledDataset& ds, Index q,
                           PriorsMode priors = PriorsMode::Empirical);

enum class SrrldaMetric { Euclidean, Within };

std::string to_string(SrrldaMetric m);
SrrldaMetric srrlda_metric_from_string(const std::string& name);

/// Simple reduced-rank LDA: nearest centroid in the centroid span. The
/// default metric is Euclidean; Within uses the pooled within-class
/// covariance of the projected data instead, which makes it the same
/// classifier as fit_spcalda(ds, kGammaInfinity, K - 1).
ReducedLDAModel fit_srrlda(const LabeledDataset& ds, PriorsMode priors = PriorsMode::Empirical,
                           SrrldaMetric metric = SrrldaMetric::Euclidean);

/// Independence rule: LDA with diag(W) in place of W.
ReducedLDAModel fit_diagonal_lda(const LabeledDataset& ds,
                                 PriorsMode priors = PriorsMode::Empirical);

/// Full-space LDA with pooled W (ridged by the fit_reduced_lda rule).
ReducedLDAModel fit_full_lda(const LabeledDataset& ds, PriorsMode priors = PriorsMode::Empirical);

struct Prediction {
    std::vector<int> labels;  // 1..K
    Matrix scores;            // m x K
};

/// Argmax of the class scores, ties to the smallest class index.
Prediction predict(const ReducedLDAModel& model, const Matrix& x);

/// Scores rows that are already centered and projected onto model.basis.
Prediction predict_reduced(const ReducedLDAModel& model, const Matrix& z);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

enum class WithinEstimate { PooledW, DiagonalW, Custom };

std::string to_string(WithinEstimate w);

struct FisherDirections {
    Matrix directions;  // p x r, W-orthonormal
    Vector eigenvalues; // generalized eigenvalues, nonincreasing
    WithinEstimate within = WithinEstimate::PooledW;
    Index rank = 0;     // numerical rank of B
};

/// Solves B v = lambda W v by whitening with the Cholesky factor of the
/// within estimate. Throws SingularWithinEstimate when it is not positive
/// definite (pooled W needs n - K >= p). Intended for small p.
FisherDirections fisher_directions(const LabeledDataset& ds, WithinEstimate within);
FisherDirections fisher_directions(const LabeledDataset& ds, const Matrix& custom_within);

/// diag(W) with nonpositive entries lifted to 1e-12 * max entry.
Vector ridged_diagonal_within(const Matrix& within, std::vector<std::string>* warnings = nullptr);

/// Known population parameters for the Bayes rule under a common covariance.
struct OracleSpec {
    enum class Structure { Dense, Identity, CompoundSymmetry, Spiked };

    Matrix centroids;  // K x p
    Structure structure = Structure::Identity;
    Matrix dense_within;       // Dense
    double rho = 0.0;          // CompoundSymmetry: unit diagonal, off-diagonal rho
    double base = 1.0;         // Spiked: trailing eigenvalue
    Vector spike_values;       // Spiked: leading eigenvalues (> base)
    Matrix spike_directions;   // Spiked: p x s orthonormal

    static OracleSpec identity(Matrix centroids);
    static OracleSpec compound_symmetry(Matrix centroids, double rho);
    static OracleSpec spiked(Matrix centroids, double base, Vector spike_values,
                             Matrix spike_directions);
    static OracleSpec dense(Matrix centroids, Matrix within);

    Index p() const { return centroids.cols(); }
    int num_classes() const { return static_cast<int>(centroids.rows()); }

    /// Sigma_w as a dense matrix.
    Matrix within_matrix() const;
};

/// argmin_k (x - mu_k)^T Sigma_w^{-1} (x - mu_k), ties to the smallest k.
/// Structured covariances use closed-form inverses.
std::vector<int> bayes_oracle_predict(const OracleSpec& spec, const Matrix& x);

}  // namespace spcalda
