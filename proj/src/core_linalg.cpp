#include "spcalda/core_linalg.hpp"

#include "spcalda/errors.hpp"

#include <algorithm>
#include <string>

namespace spcalda {

LabeledDataset::LabeledDataset(Matrix data, std::vector<int> labels, int num_classes)
    : data_(std::move(data)), labels_(std::move(labels)), num_classes_(num_classes) {
    if (data_.rows() == 0 || data_.cols() == 0) {
        throw InvalidInput("dataset has no rows or no columns");
    }
    if (static_cast<Index>(labels_.size()) != data_.rows()) {
        throw InvalidInput("label count " + std::to_string(labels_.size()) +
                           " does not match row count " + std::to_string(data_.rows()));
    }
    if (!data_.allFinite()) {
        throw InvalidInput("dataset contains non-finite values");
    }
    const int max_label = *std::max_element(labels_.begin(), labels_.end());
    if (num_classes_ == 0) num_classes_ = max_label;
    if (num_classes_ < 1) throw InvalidInput("labels must be in 1..K");

    counts_.assign(num_classes_, 0);
    index_.assign(num_classes_, {});
    for (Index i = 0; i < data_.rows(); ++i) {
        const int y = labels_[i];
        if (y < 1 || y > num_classes_) {
            throw InvalidInput("label " + std::to_string(y) + " at row " + std::to_string(i) +
                               " outside 1.." + std::to_string(num_classes_));
        }
        ++counts_[y - 1];
        index_[y - 1].push_back(i);
    }
    for (int k = 0; k < num_classes_; ++k) {
        if (counts_[k] == 0) {
            throw InvalidInput("class " + std::to_string(k + 1) + " has no members");
        }
    }
}

LabeledDataset LabeledDataset::subset(std::span<const Index> rows) const {
    Matrix sub(static_cast<Index>(rows.size()), p());
    std::vector<int> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sub.row(static_cast<Index>(i)) = data_.row(rows[i]);
        y[i] = labels_[rows[i]];
    }
    return LabeledDataset(std::move(sub), std::move(y), num_classes_);
}

CenteredColumns center_columns(const Matrix& raw) {
    if (raw.rows() == 0 || raw.cols() == 0) throw InvalidInput("cannot center an empty matrix");
    CenteredColumns out;
    out.mean = raw.colwise().mean().transpose();
    out.centered = raw.rowwise() - out.mean.transpose();
    return out;
}

ClassStatistics class_statistics(const LabeledDataset& ds) {
    const int K = ds.num_classes();
    ClassStatistics out;
    out.centroids = Matrix::Zero(K, ds.p());
    out.counts = ds.class_counts();
    for (int k = 0; k < K; ++k) {
        if (out.counts[k] == 0) throw InvalidInput("class " + std::to_string(k + 1) + " is empty");
        for (Index i : ds.class_index()[k]) out.centroids.row(k) += ds.data().row(i);
        out.centroids.row(k) /= static_cast<double>(out.counts[k]);
    }
    return out;
}

ScatterModel ScatterModel::from(const LabeledDataset& ds) {
    ScatterModel sm;
    auto cc = center_columns(ds.data());
    sm.overall_mean = std::move(cc.mean);
    LabeledDataset centered(std::move(cc.centered), ds.labels(), ds.num_classes());
    auto stats = class_statistics(centered);
    sm.centroids = std::move(stats.centroids);
    sm.counts = std::move(stats.counts);
    sm.labels = centered.labels();
    sm.centered_data = centered.data();
    return sm;
}

namespace {

void check_finite_gamma(double gamma) {
    if (!(gamma > 0) || !std::isfinite(gamma)) {
        throw InvalidInput("gamma must be positive and finite, got " + std::to_string(gamma));
    }
}

Matrix within_deviations(const ScatterModel& sm) {
    Matrix dev = sm.centered_data;
    for (Index i = 0; i < dev.rows(); ++i) dev.row(i) -= sm.centroids.row(sm.labels[i] - 1);
    return dev;
}

}  // namespace

ScatterMatrices scatter_matrices(const ScatterModel& sm, double gamma, Index guard) {
    check_finite_gamma(gamma);
    if (sm.p() > guard) {
        throw DimensionGuard("p = " + std::to_string(sm.p()) + " exceeds guard " +
                             std::to_string(guard) + "; use the Gram path");
    }
    const double n = static_cast<double>(sm.n());
    const Matrix dev = within_deviations(sm);
    ScatterMatrices out;
    out.within = dev.transpose() * dev / n;
    out.between = Matrix::Zero(sm.p(), sm.p());
    for (int k = 0; k < sm.num_classes(); ++k) {
        const Vector mu = sm.centroids.row(k).transpose();
        out.between.noalias() += (static_cast<double>(sm.counts[k]) / n) * mu * mu.transpose();
    }
    out.total = out.within + gamma * out.between;
    return out;
}

ScatterMatrices scatter_matrices(const LabeledDataset& ds, double gamma, Index guard) {
    check_finite_gamma(gamma);
    if (ds.p() > guard) {
        throw DimensionGuard("p = " + std::to_string(ds.p()) + " exceeds guard " +
                             std::to_string(guard) + "; use the Gram path");
    }
    return scatter_matrices(ScatterModel::from(ds), gamma, guard);
}

Matrix build_a_gamma(const ScatterModel& sm, double gamma) {
    check_finite_gamma(gamma);
    const Index n = sm.n();
    const int K = sm.num_classes();
    Matrix a(n + K, sm.p());
    a.topRows(n) = within_deviations(sm);
    for (int k = 0; k < K; ++k) {
        a.row(n + k) = std::sqrt(gamma * static_cast<double>(sm.counts[k])) * sm.centroids.row(k);
    }
    return a;
}

Matrix build_a_gamma(const LabeledDataset& ds, double gamma) {
    check_finite_gamma(gamma);
    return build_a_gamma(ScatterModel::from(ds), gamma);
}

namespace {

// Eigenpairs of the small Gram matrix factor * factor^T mapped back to
// unit directions factor^T v / |factor^T v|. Eigenvalues are divided by n.
ProjectionBasis directions_from_gram(const Matrix& factor, double n, Index q, double gamma) {
    const Index m = factor.rows();
    const Index p = factor.cols();
    Matrix gram = Matrix::Zero(m, m);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(factor);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const Vector& ascending = eig.eigenvalues();
    const double lambda_max = std::max(ascending(m - 1), 0.0);
    const double tol = static_cast<double>(std::max(m, p)) *
                       std::numeric_limits<double>::epsilon() * lambda_max;

    Index rank = 0;
    for (Index j = m - 1; j >= 0; --j) {
        if (lambda_max > 0 && ascending(j) > tol) ++rank;
        else break;
    }

    ProjectionBasis basis;
    basis.gamma = gamma;
    basis.requested_q = q;
    basis.numerical_rank = rank;
    const Index kept = std::min(q, rank);
    basis.rank_deficient = kept < q;
    basis.directions.resize(p, kept);
    basis.eigenvalues.resize(kept);
    for (Index j = 0; j < kept; ++j) {
        const Vector v = eig.eigenvectors().col(m - 1 - j);
        Vector u = factor.transpose() * v;
        u /= u.norm();
        normalize_sign(u);
        basis.directions.col(j) = u;
        basis.eigenvalues(j) = ascending(m - 1 - j) / n;
    }
    return basis;
}

}  // namespace

ProjectionBasis top_principal_directions(const ScatterModel& sm, double gamma, Index q) {
    if (q < 1) throw InvalidInput("q must be at least 1");
    const Index cap = std::min(sm.p(), sm.n() + sm.num_classes());
    if (q > cap) {
        throw InvalidInput("q = " + std::to_string(q) + " exceeds min(p, n + K) = " +
                           std::to_string(cap));
    }
    const double n = static_cast<double>(sm.n());
    if (is_gamma_infinity(gamma)) {
        // Limit of T_gamma / gamma: B = C^T C / n with C rows sqrt(n_k) mu_k.
        Matrix c(sm.num_classes(), sm.p());
        for (int k = 0; k < sm.num_classes(); ++k) {
            c.row(k) = std::sqrt(static_cast<double>(sm.counts[k])) * sm.centroids.row(k);
        }
        return directions_from_gram(c, n, q, gamma);
    }
    check_finite_gamma(gamma);
    return directions_from_gram(build_a_gamma(sm, gamma), n, q, gamma);
}

ProjectionBasis top_principal_directions(const LabeledDataset& ds, double gamma, Index q) {
    return top_principal_directions(ScatterModel::from(ds), gamma, q);
}

Matrix project_columns(const Matrix& x, const Matrix& directions) {
    if (x.cols() != directions.rows()) {
        throw DimensionMismatch("data has " + std::to_string(x.cols()) +
                                " columns, basis expects " + std::to_string(directions.rows()));
    }
    Matrix z(x.rows(), directions.cols());
    for (Index j = 0; j < directions.cols(); ++j) {
        const Vector u = directions.col(j);
        z.col(j).noalias() = x * u;
    }
    return z;
}

Matrix orthonormal_column_basis(const Matrix& columns, double rel_tol) {
    if (columns.cols() == 0 || columns.rows() == 0) return Matrix(columns.rows(), 0);
    Eigen::ColPivHouseholderQR<Matrix> qr(columns);
    const double r00 = qr.matrixR().cols() > 0 ? std::abs(qr.matrixR()(0, 0)) : 0.0;
    qr.setThreshold(rel_tol);
    Index rank = r00 > 0 ? qr.rank() : 0;
    Matrix q = qr.householderQ() * Matrix::Identity(columns.rows(), rank);
    for (Index j = 0; j < q.cols(); ++j) normalize_sign(q.col(j));
    return q;
}

Vector principal_angles(const Matrix& basis_a, const Matrix& basis_b) {
    if (basis_a.rows() != basis_b.rows()) {
        throw DimensionMismatch("bases live in different ambient dimensions");
    }
    const Matrix& big = basis_a.cols() >= basis_b.cols() ? basis_a : basis_b;
    const Matrix& small = basis_a.cols() >= basis_b.cols() ? basis_b : basis_a;
    const Index m = small.cols();
    if (m == 0) return Vector(0);

    const Matrix cross = big.transpose() * small;
    Eigen::JacobiSVD<Matrix> cos_svd(cross);
    const Matrix residual = small - big * cross;
    Eigen::JacobiSVD<Matrix> sin_svd(residual);

    // cosines descending <-> angles ascending; sines descending <-> angles descending
    const Vector& cosines = cos_svd.singularValues();
    Vector sines = Vector::Zero(m);
    sines.head(sin_svd.singularValues().size()) = sin_svd.singularValues();

    Vector angles(m);
    for (Index i = 0; i < m; ++i) {
        const double c = std::clamp(i < cosines.size() ? cosines(i) : 0.0, 0.0, 1.0);
        const double s = std::clamp(sines(m - 1 - i), 0.0, 1.0);
        angles(i) = c * c >= 0.5 ? std::asin(s) : std::acos(c);
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

double largest_principal_angle(const Matrix& basis_a, const Matrix& basis_b) {
    if (basis_a.cols() != basis_b.cols()) return std::acos(0.0);
    const Vector angles = principal_angles(basis_a, basis_b);
    return angles.size() ? angles.maxCoeff() : 0.0;
}

void normalize_sign(Eigen::Ref<Vector> v) {
    if (v.size() == 0) return;
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
}

}  // namespace spcalda
