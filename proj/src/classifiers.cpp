#include "spcalda/classifiers.hpp"

#include "spcalda/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace spcalda {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

Vector log_priors_for(const std::vector<Index>& counts, PriorsMode mode) {
    const Index K = static_cast<Index>(counts.size());
    Vector lp(K);
    double n = 0;
    for (Index c : counts) n += static_cast<double>(c);
    for (Index k = 0; k < K; ++k) {
        lp(k) = mode == PriorsMode::Equal ? -std::log(static_cast<double>(K))
                                          : std::log(static_cast<double>(counts[k]) / n);
    }
    return lp;
}

std::vector<Index> count_labels(const std::vector<int>& labels, int num_classes) {
    std::vector<Index> counts(num_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 1 || y > num_classes) {
            throw InvalidInput("label " + std::to_string(y) + " outside 1.." +
                               std::to_string(num_classes));
        }
        ++counts[y - 1];
    }
    for (int k = 0; k < num_classes; ++k) {
        if (counts[k] == 0) {
            throw InvalidInput("class " + std::to_string(k + 1) + " absent from training labels");
        }
    }
    return counts;
}

Matrix class_means(const Matrix& z, const std::vector<int>& labels,
                   const std::vector<Index>& counts) {
    Matrix m = Matrix::Zero(static_cast<Index>(counts.size()), z.cols());
    for (Index i = 0; i < z.rows(); ++i) m.row(labels[i] - 1) += z.row(i);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        m.row(static_cast<Index>(k)) /= static_cast<double>(counts[k]);
    }
    return m;
}

Vector pooled_feature_variances(const ScatterModel& sm) {
    const double n = static_cast<double>(sm.n());
    Vector d = Vector::Zero(sm.p());
    for (Index i = 0; i < sm.n(); ++i) {
        d += (sm.centered_data.row(i) - sm.centroids.row(sm.labels[i] - 1))
                 .transpose()
                 .cwiseAbs2();
    }
    return d / n;
}

Vector ridge_diagonal(Vector d, std::vector<std::string>* warnings) {
    const double top = d.size() ? d.maxCoeff() : 0.0;
    const double floor_value = top > 0 ? 1e-12 * top : 1e-12;
    Index lifted = 0;
    for (Index j = 0; j < d.size(); ++j) {
        if (!(d(j) > 0)) {
            d(j) = floor_value;
            ++lifted;
        }
    }
    if (lifted > 0 && warnings) {
        warnings->push_back("diagonal ridge applied to " + std::to_string(lifted) +
                            " constant feature(s)");
    }
    return d;
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::SPCALDA: return "SPCALDA";
        case Method::PCALDA: return "PCALDA";
        case Method::SRRLDA: return "SRRLDA";
        case Method::IR: return "IR";
        case Method::LDA: return "LDA";
        case Method::ORACLE: return "ORACLE";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    const std::string s = lower(name);
    if (s == "spcalda") return Method::SPCALDA;
    if (s == "pcalda") return Method::PCALDA;
    if (s == "srrlda") return Method::SRRLDA;
    if (s == "ir" || s == "dlda") return Method::IR;
    if (s == "lda") return Method::LDA;
    if (s == "oracle") return Method::ORACLE;
    throw ConfigError("unknown method '" + name + "'");
}

std::string to_string(PriorsMode m) { return m == PriorsMode::Equal ? "equal" : "empirical"; }

PriorsMode priors_from_string(const std::string& name) {
    const std::string s = lower(name);
    if (s == "equal") return PriorsMode::Equal;
    if (s == "empirical") return PriorsMode::Empirical;
    throw ConfigError("unknown priors mode '" + name + "'");
}

std::string to_string(WithinEstimate w) {
    switch (w) {
        case WithinEstimate::PooledW: return "pooled-W";
        case WithinEstimate::DiagonalW: return "diagonal-Dw";
        case WithinEstimate::Custom: return "custom";
    }
    return "?";
}

ReducedLDAModel fit_reduced_lda(const Matrix& z, const std::vector<int>& labels, int num_classes,
                                PriorsMode priors) {
    if (num_classes < 2) throw InvalidInput("at least two classes are required");
    if (static_cast<Index>(labels.size()) != z.rows()) {
        throw DimensionMismatch("label count does not match projected rows");
    }
    const auto counts = count_labels(labels, num_classes);
    const Index q = z.cols();
    const double n = static_cast<double>(z.rows());

    ReducedLDAModel model;
    model.identity_basis = true;
    model.centering = Vector::Zero(q);
    model.log_priors = log_priors_for(counts, priors);
    model.reduced_centroids = class_means(z, labels, counts);
    if (q == 0) {
        model.degenerate = true;
        model.within_factor = Matrix(0, 0);
        model.warnings.push_back("DegenerateModel: empty projection, predicting by priors");
        return model;
    }

    Matrix dev = z;
    for (Index i = 0; i < dev.rows(); ++i) dev.row(i) -= model.reduced_centroids.row(labels[i] - 1);
    Matrix s = dev.transpose() * dev / n;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues()(0);
    const double lambda_max = eig.eigenvalues()(q - 1);
    if (lambda_min <= 1e-10 * lambda_max) {
        double scale = s.trace() / static_cast<double>(q);
        if (!(scale > 0)) {
            // Zero within-class spread: borrow the scale of the centroid spread.
            Vector pi = model.log_priors.array().exp();
            double between = 0;
            for (int k = 0; k < num_classes; ++k) {
                between += pi(k) * model.reduced_centroids.row(k).squaredNorm();
            }
            scale = between > 0 ? between / static_cast<double>(q) : 1.0;
        }
        model.ridge_used = 1e-8 * scale;
        s.diagonal().array() += model.ridge_used;
        model.warnings.push_back("ridge " + std::to_string(model.ridge_used) +
                                 " added to singular reduced within-class covariance");
    }
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) {
        throw SingularWithinEstimate("reduced within-class covariance is not positive definite");
    }
    model.within_factor = llt.matrixL();
    return model;
}

ReducedLDAModel fit_on_basis(const ScatterModel& sm, ProjectionBasis basis, Method tag,
                             PriorsMode priors) {
    const Matrix z = project_columns(sm.centered_data, basis.directions);
    ReducedLDAModel model = fit_reduced_lda(z, sm.labels, sm.num_classes(), priors);
    model.method = tag;
    model.centering = sm.overall_mean;
    model.identity_basis = false;
    if (basis.rank_deficient) {
        model.warnings.push_back("RankDeficiency: q reduced from " +
                                 std::to_string(basis.requested_q) + " to " +
                                 std::to_string(basis.q()));
    }
    model.basis = std::move(basis);
    return model;
}

ReducedLDAModel fit_spcalda(const LabeledDataset& ds, double gamma, Index q, PriorsMode priors) {
    const ScatterModel sm = ScatterModel::from(ds);
    return fit_on_basis(sm, top_principal_directions(sm, gamma, q), Method::SPCALDA, priors);
}

ReducedLDAModel fit_pcalda(const LabeledDataset& ds, Index q, PriorsMode priors) {
    ReducedLDAModel model = fit_spcalda(ds, 1.0, q, priors);
    model.method = Method::PCALDA;
    return model;
}

std::string to_string(SrrldaMetric m) {
    return m == SrrldaMetric::Euclidean ? "euclidean" : "within";
}

SrrldaMetric srrlda_metric_from_string(const std::string& name) {
    const std::string s = lower(name);
    if (s == "euclidean") return SrrldaMetric::Euclidean;
    if (s == "within") return SrrldaMetric::Within;
    throw ConfigError("unknown SRRLDA metric '" + name + "'");
}

ReducedLDAModel fit_srrlda(const LabeledDataset& ds, PriorsMode priors, SrrldaMetric metric) {
    if (ds.num_classes() < 2) throw InvalidInput("SRRLDA needs at least two classes");
    const ScatterModel sm = ScatterModel::from(ds);
    const int K = sm.num_classes();

    Matrix diffs(sm.p(), K - 1);
    for (int k = 0; k < K - 1; ++k) {
        diffs.col(k) = (sm.centroids.row(k) - sm.centroids.row(K - 1)).transpose();
    }
    const double data_scale = 1.0 + sm.centered_data.cwiseAbs().maxCoeff();
    ProjectionBasis basis;
    basis.gamma = kGammaInfinity;
    basis.requested_q = K - 1;
    if (diffs.cwiseAbs().maxCoeff() > 1e-12 * data_scale) {
        basis.directions = orthonormal_column_basis(diffs);
    } else {
        basis.directions = Matrix(sm.p(), 0);
    }
    basis.numerical_rank = basis.directions.cols();
    basis.rank_deficient = basis.numerical_rank < K - 1;
    basis.eigenvalues.resize(basis.q());
    for (Index j = 0; j < basis.q(); ++j) {
        double rayleigh = 0;
        for (int k = 0; k < K; ++k) {
            const double proj = sm.centroids.row(k).dot(basis.directions.col(j));
            rayleigh += static_cast<double>(sm.counts[k]) * proj * proj;
        }
        basis.eigenvalues(j) = rayleigh / static_cast<double>(sm.n());
    }
    if (metric == SrrldaMetric::Within && basis.q() > 0) {
        return fit_on_basis(sm, std::move(basis), Method::SRRLDA, priors);
    }

    ReducedLDAModel model;
    model.method = Method::SRRLDA;
    model.centering = sm.overall_mean;
    model.log_priors = log_priors_for(sm.counts, priors);
    const Matrix z = project_columns(sm.centered_data, basis.directions);
    model.reduced_centroids = class_means(z, sm.labels, sm.counts);
    model.within_factor = Matrix::Identity(basis.q(), basis.q());
    if (basis.q() == 0) {
        model.degenerate = true;
        model.warnings.push_back("DegenerateModel: all centroids coincide, predicting by priors");
    }
    model.basis = std::move(basis);
    return model;
}

Vector ridged_diagonal_within(const Matrix& within, std::vector<std::string>* warnings) {
    return ridge_diagonal(within.diagonal(), warnings);
}

ReducedLDAModel fit_diagonal_lda(const LabeledDataset& ds, PriorsMode priors) {
    if (ds.num_classes() < 2) throw InvalidInput("diagonal LDA needs at least two classes");
    const ScatterModel sm = ScatterModel::from(ds);
    ReducedLDAModel model;
    model.method = Method::IR;
    model.centering = sm.overall_mean;
    model.identity_basis = true;
    model.reduced_centroids = sm.centroids;
    model.diagonal_within = true;
    model.within_factor = ridge_diagonal(pooled_feature_variances(sm), &model.warnings).cwiseSqrt();
    model.log_priors = log_priors_for(sm.counts, priors);
    return model;
}

ReducedLDAModel fit_full_lda(const LabeledDataset& ds, PriorsMode priors) {
    const ScatterModel sm = ScatterModel::from(ds);
    ReducedLDAModel model = fit_reduced_lda(sm.centered_data, sm.labels, sm.num_classes(), priors);
    model.method = Method::LDA;
    model.centering = sm.overall_mean;
    model.identity_basis = true;
    return model;
}

Prediction predict_reduced(const ReducedLDAModel& model, const Matrix& z) {
    const Index m = z.rows();
    const int K = model.num_classes();
    if (z.cols() != model.reduced_dim()) {
        throw DimensionMismatch("projected data has " + std::to_string(z.cols()) +
                                " columns, model expects " + std::to_string(model.reduced_dim()));
    }
    Prediction out;
    out.scores.resize(m, K);
    out.labels.assign(m, 1);
    const Matrix zt = z.transpose();
    for (int k = 0; k < K; ++k) {
        Matrix diff = zt.colwise() - model.reduced_centroids.row(k).transpose();
        if (model.reduced_dim() > 0) {
            if (model.diagonal_within) {
                diff.array().colwise() /= model.within_factor.col(0).array();
            } else {
                model.within_factor.triangularView<Eigen::Lower>().solveInPlace(diff);
            }
        }
        for (Index i = 0; i < m; ++i) {
            out.scores(i, k) = -0.5 * diff.col(i).squaredNorm() + model.log_priors(k);
        }
    }
    for (Index i = 0; i < m; ++i) {
        int best = 0;
        for (int k = 1; k < K; ++k) {
            if (out.scores(i, k) > out.scores(i, best)) best = k;
        }
        out.labels[i] = best + 1;
    }
    return out;
}

Prediction predict(const ReducedLDAModel& model, const Matrix& x) {
    if (x.cols() != model.num_features()) {
        throw DimensionMismatch("input has " + std::to_string(x.cols()) + " columns, model expects " +
                                std::to_string(model.num_features()));
    }
    if (x.rows() == 0) return Prediction{{}, Matrix(0, model.num_classes())};
    const Matrix centered = x.rowwise() - model.centering.transpose();
    if (model.identity_basis) return predict_reduced(model, centered);
    return predict_reduced(model, project_columns(centered, model.basis.directions));
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw DimensionMismatch("label vectors differ in length");
    if (truth.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

namespace {

Index between_rank(const ScatterModel& sm) {
    Matrix weighted(sm.p(), sm.num_classes());
    for (int k = 0; k < sm.num_classes(); ++k) {
        weighted.col(k) = std::sqrt(static_cast<double>(sm.counts[k])) * sm.centroids.row(k).transpose();
    }
    if (weighted.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + sm.centered_data.cwiseAbs().maxCoeff())) {
        return 0;
    }
    return orthonormal_column_basis(weighted).cols();
}

FisherDirections solve_fisher(const ScatterModel& sm, const Matrix& between, const Matrix& within,
                              WithinEstimate tag) {
    const Index p = within.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> check(within, Eigen::EigenvaluesOnly);
    const double lmax = check.eigenvalues()(p - 1);
    const double lmin = check.eigenvalues()(0);
    if (!(lmax > 0) ||
        lmin <= static_cast<double>(p) * std::numeric_limits<double>::epsilon() * lmax) {
        throw SingularWithinEstimate("within-class estimate is singular (lambda_min = " +
                                     std::to_string(lmin) + ")");
    }
    Eigen::LLT<Matrix> llt(within);
    if (llt.info() != Eigen::Success) {
        throw SingularWithinEstimate("Cholesky factorization of the within estimate failed");
    }
    const Matrix lower_factor = llt.matrixL();
    const Matrix half = lower_factor.triangularView<Eigen::Lower>().solve(between);
    Matrix whitened = lower_factor.triangularView<Eigen::Lower>().solve(half.transpose());
    whitened = 0.5 * (whitened + whitened.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened);
    FisherDirections out;
    out.within = tag;
    out.rank = between_rank(sm);
    out.directions.resize(p, out.rank);
    out.eigenvalues.resize(out.rank);
    for (Index j = 0; j < out.rank; ++j) {
        const Vector u = eig.eigenvectors().col(p - 1 - j);
        Vector v = lower_factor.transpose().triangularView<Eigen::Upper>().solve(u);
        normalize_sign(v);
        out.directions.col(j) = v;
        out.eigenvalues(j) = eig.eigenvalues()(p - 1 - j);
    }
    return out;
}

}  // namespace

FisherDirections fisher_directions(const LabeledDataset& ds, WithinEstimate within) {
    if (within == WithinEstimate::Custom) {
        throw InvalidInput("custom within estimate requires an explicit matrix");
    }
    const ScatterModel sm = ScatterModel::from(ds);
    const ScatterMatrices sc = scatter_matrices(sm, 1.0);
    const Matrix w = within == WithinEstimate::PooledW
                         ? sc.within
                         : Matrix(ridged_diagonal_within(sc.within).asDiagonal());
    return solve_fisher(sm, sc.between, w, within);
}

FisherDirections fisher_directions(const LabeledDataset& ds, const Matrix& custom_within) {
    if (custom_within.rows() != ds.p() || custom_within.cols() != ds.p()) {
        throw DimensionMismatch("custom within estimate must be p x p");
    }
    const ScatterModel sm = ScatterModel::from(ds);
    const ScatterMatrices sc = scatter_matrices(sm, 1.0);
    return solve_fisher(sm, sc.between, custom_within, WithinEstimate::Custom);
}

OracleSpec OracleSpec::identity(Matrix centroids) {
    OracleSpec s;
    s.centroids = std::move(centroids);
    s.structure = Structure::Identity;
    return s;
}

OracleSpec OracleSpec::compound_symmetry(Matrix centroids, double rho) {
    OracleSpec s;
    s.centroids = std::move(centroids);
    s.structure = Structure::CompoundSymmetry;
    s.rho = rho;
    return s;
}

OracleSpec OracleSpec::spiked(Matrix centroids, double base, Vector spike_values,
                              Matrix spike_directions) {
    OracleSpec s;
    s.centroids = std::move(centroids);
    s.structure = Structure::Spiked;
    s.base = base;
    s.spike_values = std::move(spike_values);
    s.spike_directions = std::move(spike_directions);
    return s;
}

OracleSpec OracleSpec::dense(Matrix centroids, Matrix within) {
    OracleSpec s;
    s.centroids = std::move(centroids);
    s.structure = Structure::Dense;
    s.dense_within = std::move(within);
    return s;
}

Matrix OracleSpec::within_matrix() const {
    const Index pp = p();
    switch (structure) {
        case Structure::Identity: return Matrix::Identity(pp, pp);
        case Structure::CompoundSymmetry:
            return (1.0 - rho) * Matrix::Identity(pp, pp) + rho * Matrix::Ones(pp, pp);
        case Structure::Spiked: {
            Matrix s = base * Matrix::Identity(pp, pp);
            for (Index i = 0; i < spike_values.size(); ++i) {
                s += (spike_values(i) - base) * spike_directions.col(i) *
                     spike_directions.col(i).transpose();
            }
            return s;
        }
        case Structure::Dense: return dense_within;
    }
    return {};
}

std::vector<int> bayes_oracle_predict(const OracleSpec& spec, const Matrix& x) {
    const Index p = spec.p();
    const int K = spec.num_classes();
    if (K < 2) throw InvalidInput("oracle needs at least two classes");
    if (x.cols() != p) throw DimensionMismatch("oracle input has wrong number of columns");
    if (!x.allFinite()) throw InvalidInput("oracle input contains non-finite values");

    Eigen::LLT<Matrix> llt;
    double cs_shrink = 0;
    switch (spec.structure) {
        case OracleSpec::Structure::Dense:
            llt.compute(spec.dense_within);
            if (llt.info() != Eigen::Success) {
                throw InvalidInput("oracle covariance is not positive definite");
            }
            break;
        case OracleSpec::Structure::CompoundSymmetry:
            if (!(spec.rho < 1.0) || !(spec.rho > -1.0 / static_cast<double>(std::max<Index>(p - 1, 1)))) {
                throw InvalidInput("compound-symmetry rho gives a singular covariance");
            }
            cs_shrink = spec.rho / (1.0 - spec.rho + static_cast<double>(p) * spec.rho);
            break;
        case OracleSpec::Structure::Spiked:
            if (!(spec.base > 0) || (spec.spike_values.size() && !(spec.spike_values.minCoeff() > 0))) {
                throw InvalidInput("spiked covariance must have positive eigenvalues");
            }
            break;
        case OracleSpec::Structure::Identity: break;
    }

    auto quadratic = [&](const Vector& d) -> double {
        switch (spec.structure) {
            case OracleSpec::Structure::Identity: return d.squaredNorm();
            case OracleSpec::Structure::CompoundSymmetry: {
                const double s = d.sum();
                return (d.squaredNorm() - cs_shrink * s * s) / (1.0 - spec.rho);
            }
            case OracleSpec::Structure::Spiked: {
                double q = d.squaredNorm() / spec.base;
                for (Index i = 0; i < spec.spike_values.size(); ++i) {
                    const double lam = spec.spike_values(i);
                    const double c = spec.spike_directions.col(i).dot(d);
                    q -= (lam - spec.base) / (spec.base * lam) * c * c;
                }
                return q;
            }
            case OracleSpec::Structure::Dense: {
                const Vector y = llt.matrixL().solve(d);
                return y.squaredNorm();
            }
        }
        return 0.0;
    };

    std::vector<int> labels(x.rows(), 1);
    for (Index i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            const Vector d = (x.row(i) - spec.centroids.row(k)).transpose();
            const double dist = quadratic(d);
            if (dist < best) {
                best = dist;
                labels[i] = k + 1;
            }
        }
    }
    return labels;
}

}  // namespace spcalda
