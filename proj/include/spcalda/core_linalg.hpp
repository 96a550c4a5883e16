#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace spcalda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Sentinel for the gamma -> infinity limit of T_gamma = W + gamma * B.
inline constexpr double kGammaInfinity = std::numeric_limits<double>::infinity();

inline bool is_gamma_infinity(double gamma) { return std::isinf(gamma) && gamma > 0; }

/// Largest p for which the direct p x p scatter paths will materialize.
inline constexpr Index kMaterializationGuard = 2000;

/// Observations (rows) with integer class labels in 1..K.
///
/// Every class must have at least one member; the constructor enforces it.
class LabeledDataset {
public:
    /// num_classes = 0 means "use the largest label".
    LabeledDataset(Matrix data, std::vector<int> labels, int num_classes = 0);

    const Matrix& data() const { return data_; }
    const std::vector<int>& labels() const { return labels_; }
    Index n() const { return data_.rows(); }
    Index p() const { return data_.cols(); }
    int num_classes() const { return num_classes_; }
    const std::vector<Index>& class_counts() const { return counts_; }
    /// Row indices per class, class k at position k - 1.
    const std::vector<std::vector<Index>>& class_index() const { return index_; }

    /// Rows in the given order. Throws InvalidInput if a class ends up empty.
    LabeledDataset subset(std::span<const Index> rows) const;

private:
    Matrix data_;
    std::vector<int> labels_;
    int num_classes_ = 0;
    std::vector<Index> counts_;
    std::vector<std::vector<Index>> index_;
};

struct CenteredColumns {
    Matrix centered;
    Vector mean;
};

CenteredColumns center_columns(const Matrix& raw);

struct ClassStatistics {
    Matrix centroids;  // K x p
    std::vector<Index> counts;
};

/// Per-class row means of ds.data(). Callers pass centered data so that the
/// count-weighted centroid sum vanishes.
ClassStatistics class_statistics(const LabeledDataset& ds);

/// Centered summary of a dataset: the common input to every scatter path.
struct ScatterModel {
    Vector overall_mean;
    Matrix centered_data;  // n x p, zero column means
    Matrix centroids;      // K x p, centroids of centered_data
    std::vector<Index> counts;
    std::vector<int> labels;

    Index n() const { return centered_data.rows(); }
    Index p() const { return centered_data.cols(); }
    int num_classes() const { return static_cast<int>(centroids.rows()); }

    static ScatterModel from(const LabeledDataset& ds);
};

struct ScatterMatrices {
    Matrix within;   // W
    Matrix between;  // B
    Matrix total;    // T_gamma = W + gamma B
};

/// Dense p x p scatter matrices. Throws DimensionGuard above `guard`.
ScatterMatrices scatter_matrices(const ScatterModel& sm, double gamma,
                                 Index guard = kMaterializationGuard);
ScatterMatrices scatter_matrices(const LabeledDataset& ds, double gamma,
                                 Index guard = kMaterializationGuard);

/// The (n + K) x p factor with T_gamma = A^T A / n: within-class deviations
/// stacked over sqrt(gamma n_k) scaled centroids.
Matrix build_a_gamma(const ScatterModel& sm, double gamma);
Matrix build_a_gamma(const LabeledDataset& ds, double gamma);

/// Leading eigenvectors of T_gamma (or of the centroid span at gamma = inf).
struct ProjectionBasis {
    Matrix directions;  // p x q, orthonormal columns
    Vector eigenvalues; // nonincreasing
    double gamma = 1.0;
    Index requested_q = 0;
    Index numerical_rank = 0;
    bool rank_deficient = false;  // requested_q exceeded the numerical rank

    Index q() const { return directions.cols(); }
};

/// Top-q principal directions of T_gamma through the small-side Gram matrix
/// A A^T, O(n^2 p). For gamma = kGammaInfinity the basis spans the centroids,
/// ordered by between-class variance. Directions past the numerical rank are
/// never fabricated: the basis is truncated and rank_deficient is set.
ProjectionBasis top_principal_directions(const ScatterModel& sm, double gamma, Index q);
ProjectionBasis top_principal_directions(const LabeledDataset& ds, double gamma, Index q);

/// Z = X * U, evaluated one column at a time so a prefix of the columns is
/// bit-identical to projecting onto a prefix of the basis.
Matrix project_columns(const Matrix& x, const Matrix& directions);

/// Orthonormal basis of the column space (column-pivoted QR, relative
/// tolerance on |R_ii|).
Matrix orthonormal_column_basis(const Matrix& columns, double rel_tol = 1e-10);

/// Principal angles (radians, ascending) between the column spaces of two
/// orthonormal bases. Uses sines for small angles and cosines for large.
Vector principal_angles(const Matrix& basis_a, const Matrix& basis_b);
double largest_principal_angle(const Matrix& basis_a, const Matrix& basis_b);

/// Flip the sign so the entry of largest magnitude is positive.
void normalize_sign(Eigen::Ref<Vector> v);

}  // namespace spcalda
