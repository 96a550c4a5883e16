#pragma once

#include "spcalda/classifiers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spcalda {

/// Default tolerance for algebraic identities at p <= 200.
inline constexpr double kIdentityTolerance = 1e-8;
inline constexpr double kAngleTolerance = 1e-6;
/// Negative controls must exceed this to show a check has power.
inline constexpr double kPowerThreshold = 1e-3;

/// Population model with a spiked within-class covariance
///   Sigma_w = base I + sum_i (spike_i - base) xi_i xi_i^T
/// and centroids whose prior-weighted sum is zero. Optionally each class is
/// a mixture of prototypes sharing Sigma_w.
struct SpikedModel {
    Vector spike_values;     // s, each > base
    double base = 1.0;
    Matrix spike_directions; // p x s, orthonormal
    Matrix centroids;        // K x p
    Vector priors;           // K, sums to 1
    std::vector<Matrix> prototypes;         // per class R_k x p (mixture layout)
    std::vector<Vector> prototype_weights;  // per class, sums to 1
    Matrix perturbation;     // p x p added to Sigma_w when nonempty (negative controls)

    Index p() const { return spike_directions.rows(); }
    Index s() const { return spike_values.size(); }
    int num_classes() const { return static_cast<int>(centroids.rows()); }
    int total_prototypes() const;
    bool has_mixture() const { return !prototypes.empty(); }

    Matrix within() const;   // Sigma_w (+ perturbation)
    Matrix between() const;  // sum_k pi_k mu_k mu_k^T
    void validate() const;
};

/// Random orthonormal spike directions and Gaussian centroids (weighted mean
/// removed). Priors are random positive weights unless equal_priors.
SpikedModel random_spiked_model(Index p, const Vector& spike_values, double base, int num_classes,
                                std::uint64_t seed, bool equal_priors = false);

/// Mixture variant: class k has prototypes_per_class[k] prototypes, class
/// means are the weighted prototype means.
SpikedModel random_mixture_model(Index p, const Vector& spike_values, double base,
                                 const std::vector<int>& prototypes_per_class, std::uint64_t seed);

/// max_{k<l} |U_2^T beta_kl|_inf / |beta_kl|_2 with beta_kl = Sigma_w^{-1}(mu_k - mu_l)
/// and U_2 the trailing p - s - K + 1 eigenvectors of Sigma_w + gamma Sigma_b.
/// Normalizing by |beta| makes the value invariant to rescaling the data.
/// Throws GapTooSmall when the eigen-gap at the split is below 1e-10
/// relative to the top eigenvalue.
double verify_theorem1(const SpikedModel& model, double gamma);

/// Same check for Sigma_w + sum_k rho_k mu_k mu_k^T.
double verify_theorem1_rho(const SpikedModel& model, const Vector& rho);

/// Mixture version: the target matrix is the mixture within-class covariance
/// plus gamma Sigma_b, differences run over all prototype pairs and the split
/// defaults to s + R - 1.
double verify_theorem2(const SpikedModel& model, double gamma,
                       std::optional<Index> split = std::nullopt);

struct Lemma1Check {
    double eig_gap = 0.0;         // max relative eigenvalue discrepancy
    double subspace_angle = 0.0;  // largest principal angle, top-rank subspaces
    Index rank = 0;
};

/// Direct p x p eigendecomposition of T_gamma against the Gram-matrix path.
Lemma1Check verify_lemma1(const LabeledDataset& ds, double gamma);

/// max_{k<l} |(H^T S H)^{-1} H^T (mu_k - mu_l) - H^T beta_kl|_inf for an
/// orthonormal p x q basis H whose span contains every beta_kl. Throws
/// PreconditionViolated when some beta_kl leaves span(H) (relative residual
/// above 1e-8).
double verify_lemma2(const Matrix& within, const Matrix& centroids, const Matrix& h);
double verify_lemma2(const SpikedModel& model, const Matrix& h);

/// Orthonormal basis of span{Sigma_w^{-1}(mu_k - mu_l)}.
Matrix discriminant_span(const Matrix& within, const Matrix& centroids);

struct Proposition1Check {
    Vector angles;            // principal angles span{v_k} vs W^{-1} C
    Index fisher_dim = 0;
    Index target_dim = 0;
    Index between_rank = 0;
    std::optional<double> label_agreement;  // full-space vs projected, when test rows given

    double max_angle() const { return angles.size() ? angles.maxCoeff() : 0.0; }
    bool dimensions_match() const {
        return fisher_dim == target_dim && target_dim == between_rank;
    }
};

/// Compares the Fisher subspace with W^{-1} C (or D_w^{-1} C). With test rows
/// it also compares full-space LDA (or the independence rule) against LDA
/// restricted to the Fisher subspace under the same within estimate.
Proposition1Check verify_proposition1(const LabeledDataset& ds, WithinEstimate within,
                                      const Matrix* test_rows = nullptr);

/// Gaussian classes: centroids N(0, separation^2), identity noise.
LabeledDataset random_gaussian_dataset(Index n, Index p, int num_classes, std::uint64_t seed,
                                       double separation = 1.0);

struct VerifierResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool expect_below = true;  // false for negative controls
    bool passed = false;
};

/// Built-in instances covering every verifier and its negative control.
std::vector<VerifierResult> run_verification_battery();

}  // namespace spcalda
