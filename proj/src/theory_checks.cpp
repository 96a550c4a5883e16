#include "spcalda/theory_checks.hpp"

#include "spcalda/errors.hpp"
#include "spcalda/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spcalda {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Philox4x32& rng, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

Matrix random_orthonormal(Index p, Index s, Philox4x32& rng) {
    if (s == 0) return Matrix(p, 0);
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(p, s, rng));
    return qr.householderQ() * Matrix::Identity(p, s);
}

Vector random_weights(Index k, Philox4x32& rng) {
    std::uniform_real_distribution<double> uniform(0.5, 1.5);
    Vector w(k);
    for (Index i = 0; i < k; ++i) w(i) = uniform(rng);
    return w / w.sum();
}

std::vector<Vector> pairwise_differences(const Matrix& rows) {
    std::vector<Vector> out;
    for (Index k = 0; k < rows.rows(); ++k) {
        for (Index l = k + 1; l < rows.rows(); ++l) {
            out.push_back((rows.row(k) - rows.row(l)).transpose());
        }
    }
    return out;
}

double trailing_violation(const Matrix& within, const Matrix& target,
                          const std::vector<Vector>& diffs, Index split) {
    const Index p = target.rows();
    if (split < 0 || split >= p) {
        throw InvalidInput("split index " + std::to_string(split) + " leaves no trailing subspace (p = " +
                           std::to_string(p) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(target);
    const Vector& ev = eig.eigenvalues();  // ascending
    const Index trailing = p - split;
    if (split > 0) {
        const double gap = ev(trailing) - ev(trailing - 1);
        const double scale = std::max(std::abs(ev(p - 1)), std::numeric_limits<double>::min());
        if (gap < 1e-10 * scale) {
            throw GapTooSmall("eigen-gap " + std::to_string(gap) + " at split " +
                              std::to_string(split));
        }
    }
    const Matrix u2 = eig.eigenvectors().leftCols(trailing);
    Eigen::LLT<Matrix> llt(within);
    if (llt.info() != Eigen::Success) throw InvalidInput("Sigma_w is not positive definite");
    double worst = 0;
    for (const Vector& d : diffs) {
        const Vector beta = llt.solve(d);
        const double norm = beta.norm();
        if (norm == 0) continue;
        worst = std::max(worst, (u2.transpose() * beta).cwiseAbs().maxCoeff() / norm);
    }
    return worst;
}

}  // namespace

int SpikedModel::total_prototypes() const {
    if (!has_mixture()) return num_classes();
    int r = 0;
    for (const auto& m : prototypes) r += static_cast<int>(m.rows());
    return r;
}

Matrix SpikedModel::within() const {
    Matrix s = base * Matrix::Identity(p(), p());
    for (Index i = 0; i < this->s(); ++i) {
        s += (spike_values(i) - base) * spike_directions.col(i) * spike_directions.col(i).transpose();
    }
    if (perturbation.size()) s += perturbation;
    return s;
}

Matrix SpikedModel::between() const {
    Matrix b = Matrix::Zero(p(), p());
    for (int k = 0; k < num_classes(); ++k) {
        b += priors(k) * centroids.row(k).transpose() * centroids.row(k);
    }
    return b;
}

void SpikedModel::validate() const {
    if (!(base > 0)) throw InvalidInput("base eigenvalue must be positive");
    for (Index i = 0; i < s(); ++i) {
        if (!(spike_values(i) > base)) throw InvalidInput("spike values must exceed the base value");
        if (i > 0 && spike_values(i) > spike_values(i - 1)) {
            throw InvalidInput("spike values must be nonincreasing");
        }
    }
    if (s() > 0) {
        const Matrix gram = spike_directions.transpose() * spike_directions;
        if ((gram - Matrix::Identity(s(), s())).cwiseAbs().maxCoeff() > 1e-10) {
            throw InvalidInput("spike directions are not orthonormal");
        }
    }
    if (centroids.cols() != p() || priors.size() != num_classes()) {
        throw DimensionMismatch("centroids or priors inconsistent with p / K");
    }
    if (std::abs(priors.sum() - 1.0) > 1e-10) throw InvalidInput("priors must sum to 1");
    const Vector weighted = centroids.transpose() * priors;
    if (weighted.cwiseAbs().maxCoeff() > 1e-10) {
        throw InvalidInput("prior-weighted centroid sum must vanish");
    }
}

SpikedModel random_spiked_model(Index p, const Vector& spike_values, double base, int num_classes,
                                std::uint64_t seed, bool equal_priors) {
    Philox4x32 rng(seed, 0);
    SpikedModel m;
    m.spike_values = spike_values;
    m.base = base;
    m.spike_directions = random_orthonormal(p, spike_values.size(), rng);
    m.priors = equal_priors ? Vector::Constant(num_classes, 1.0 / num_classes)
                            : random_weights(num_classes, rng);
    m.centroids = gaussian_matrix(num_classes, p, rng);
    const Vector mean = m.centroids.transpose() * m.priors;
    m.centroids.rowwise() -= mean.transpose();
    m.validate();
    return m;
}

SpikedModel random_mixture_model(Index p, const Vector& spike_values, double base,
                                 const std::vector<int>& prototypes_per_class, std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    const int K = static_cast<int>(prototypes_per_class.size());
    SpikedModel m;
    m.spike_values = spike_values;
    m.base = base;
    m.spike_directions = random_orthonormal(p, spike_values.size(), rng);
    m.priors = random_weights(K, rng);
    Vector overall = Vector::Zero(p);
    for (int k = 0; k < K; ++k) {
        if (prototypes_per_class[k] < 1) throw InvalidInput("each class needs a prototype");
        m.prototypes.push_back(gaussian_matrix(prototypes_per_class[k], p, rng));
        m.prototype_weights.push_back(random_weights(prototypes_per_class[k], rng));
        overall += m.priors(k) * (m.prototypes[k].transpose() * m.prototype_weights[k]);
    }
    m.centroids.resize(K, p);
    for (int k = 0; k < K; ++k) {
        m.prototypes[k].rowwise() -= overall.transpose();
        m.centroids.row(k) = (m.prototypes[k].transpose() * m.prototype_weights[k]).transpose();
    }
    m.validate();
    return m;
}

double verify_theorem1(const SpikedModel& model, double gamma) {
    model.validate();
    if (!(gamma > 0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive and finite");
    const Index split = model.s() + model.num_classes() - 1;
    if (model.p() <= split) throw InvalidInput("theorem needs p > s + K - 1");
    const Matrix within = model.within();
    return trailing_violation(within, within + gamma * model.between(),
                              pairwise_differences(model.centroids), split);
}

double verify_theorem1_rho(const SpikedModel& model, const Vector& rho) {
    model.validate();
    if (rho.size() != model.num_classes() || !(rho.minCoeff() > 0)) {
        throw InvalidInput("rho needs one positive weight per class");
    }
    const Index split = model.s() + model.num_classes() - 1;
    if (model.p() <= split) throw InvalidInput("theorem needs p > s + K - 1");
    const Matrix within = model.within();
    Matrix target = within;
    for (int k = 0; k < model.num_classes(); ++k) {
        target += rho(k) * model.centroids.row(k).transpose() * model.centroids.row(k);
    }
    return trailing_violation(within, target, pairwise_differences(model.centroids), split);
}

double verify_theorem2(const SpikedModel& model, double gamma, std::optional<Index> split) {
    model.validate();
    if (!(gamma > 0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive and finite");
    const int K = model.num_classes();
    const Index p = model.p();

    Matrix protos;
    Matrix within = model.within();
    const Matrix sigma_w = within;
    if (model.has_mixture()) {
        protos.resize(model.total_prototypes(), p);
        Index row = 0;
        for (int k = 0; k < K; ++k) {
            for (Index t = 0; t < model.prototypes[k].rows(); ++t, ++row) {
                protos.row(row) = model.prototypes[k].row(t);
                const Vector dev = (model.prototypes[k].row(t) - model.centroids.row(k)).transpose();
                within += model.priors(k) * model.prototype_weights[k](t) * dev * dev.transpose();
            }
        }
    } else {
        protos = model.centroids;
    }
    const Index at = split.value_or(model.s() + model.total_prototypes() - 1);
    if (p <= at) throw InvalidInput("theorem needs p > s + R - 1");
    return trailing_violation(sigma_w, within + gamma * model.between(), pairwise_differences(protos),
                              at);
}

Lemma1Check verify_lemma1(const LabeledDataset& ds, double gamma) {
    if (ds.p() > kMaterializationGuard) {
        throw InvalidInput("p = " + std::to_string(ds.p()) + " exceeds the materialization guard");
    }
    const ScatterModel sm = ScatterModel::from(ds);
    const ScatterMatrices sc = scatter_matrices(sm, gamma);
    Eigen::SelfAdjointEigenSolver<Matrix> direct(sc.total);
    const Index p = sm.p();

    const ProjectionBasis gram =
        top_principal_directions(sm, gamma, std::min(p, sm.n() + sm.num_classes()));
    Lemma1Check out;
    out.rank = gram.q();
    Matrix direct_top(p, out.rank);
    for (Index j = 0; j < out.rank; ++j) {
        const double reference = direct.eigenvalues()(p - 1 - j);
        out.eig_gap = std::max(out.eig_gap, std::abs(gram.eigenvalues(j) - reference) /
                                                std::abs(reference));
        direct_top.col(j) = direct.eigenvectors().col(p - 1 - j);
    }
    out.subspace_angle = out.rank ? largest_principal_angle(direct_top, gram.directions) : 0.0;
    return out;
}

double verify_lemma2(const Matrix& within, const Matrix& centroids, const Matrix& h) {
    if (within.rows() != h.rows() || centroids.cols() != h.rows()) {
        throw DimensionMismatch("H, Sigma_w and centroids disagree on p");
    }
    Eigen::LLT<Matrix> llt(within);
    if (llt.info() != Eigen::Success) throw InvalidInput("Sigma_w is not positive definite");
    const Matrix reduced = h.transpose() * within * h;
    Eigen::LLT<Matrix> reduced_llt(reduced);
    double worst = 0;
    for (const Vector& d : pairwise_differences(centroids)) {
        const Vector beta = llt.solve(d);
        const Vector coords = h.transpose() * beta;
        const double residual = (beta - h * coords).norm();
        if (residual > 1e-8 * std::max(beta.norm(), std::numeric_limits<double>::min())) {
            throw PreconditionViolated("beta leaves span(H): relative residual " +
                                       std::to_string(residual / beta.norm()));
        }
        const Vector via_projection = reduced_llt.solve(h.transpose() * d);
        worst = std::max(worst, (via_projection - coords).cwiseAbs().maxCoeff());
    }
    return worst;
}

double verify_lemma2(const SpikedModel& model, const Matrix& h) {
    return verify_lemma2(model.within(), model.centroids, h);
}

Matrix discriminant_span(const Matrix& within, const Matrix& centroids) {
    const Index K = centroids.rows();
    Matrix diffs(centroids.cols(), K - 1);
    for (Index k = 0; k + 1 < K; ++k) {
        diffs.col(k) = (centroids.row(k) - centroids.row(K - 1)).transpose();
    }
    return orthonormal_column_basis(within.llt().solve(diffs));
}

Proposition1Check verify_proposition1(const LabeledDataset& ds, WithinEstimate within,
                                      const Matrix* test_rows) {
    const FisherDirections fisher = fisher_directions(ds, within);
    const ScatterModel sm = ScatterModel::from(ds);
    const ScatterMatrices sc = scatter_matrices(sm, 1.0);
    const Matrix w_hat = within == WithinEstimate::PooledW
                             ? sc.within
                             : Matrix(ridged_diagonal_within(sc.within).asDiagonal());

    Proposition1Check out;
    out.between_rank = fisher.rank;
    const Matrix target = discriminant_span(w_hat, sm.centroids);
    const Matrix fisher_span = orthonormal_column_basis(fisher.directions);
    out.fisher_dim = fisher_span.cols();
    out.target_dim = target.cols();
    out.angles = principal_angles(fisher_span, target);

    if (test_rows) {
        ReducedLDAModel full;
        ReducedLDAModel projected;
        ProjectionBasis basis;
        basis.directions = fisher_span;
        basis.requested_q = basis.numerical_rank = fisher_span.cols();
        if (within == WithinEstimate::PooledW) {
            full = fit_full_lda(ds);
            projected = fit_on_basis(sm, basis, Method::LDA, PriorsMode::Empirical);
        } else {
            full = fit_diagonal_lda(ds);
            projected.method = Method::IR;
            projected.centering = sm.overall_mean;
            projected.reduced_centroids = project_columns(sm.centroids, fisher_span);
            const Matrix s = fisher_span.transpose() * w_hat * fisher_span;
            projected.within_factor = Matrix(s.llt().matrixL());
            projected.log_priors = full.log_priors;
            projected.basis = basis;
        }
        const auto a = predict(full, *test_rows).labels;
        const auto b = predict(projected, *test_rows).labels;
        out.label_agreement = 1.0 - error_rate(a, b);
    }
    return out;
}

LabeledDataset random_gaussian_dataset(Index n, Index p, int num_classes, std::uint64_t seed,
                                       double separation) {
    if (n < num_classes) throw InvalidInput("need at least one row per class");
    Philox4x32 rng(seed, 0);
    const Matrix centroids = gaussian_matrix(num_classes, p, rng, separation);
    Matrix x = gaussian_matrix(n, p, rng);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % num_classes) + 1;
        x.row(i) += centroids.row(y[i] - 1);
    }
    return LabeledDataset(std::move(x), std::move(y), num_classes);
}

namespace {

LabeledDataset d0() {
    Matrix x(4, 2);
    x << 0, 0, 2, 0, 0, 2, 2, 2;
    return LabeledDataset(x, {1, 1, 2, 2});
}

// Unit vector mixing the first centroid difference with a direction
// orthogonal to span{xi, mu}: adding a multiple of its outer product breaks
// the spiked structure.
Vector off_structure_direction(const SpikedModel& m, std::uint64_t seed) {
    Philox4x32 rng(seed, 7);
    Matrix span(m.p(), m.s() + m.num_classes());
    span << m.spike_directions, m.centroids.transpose();
    const Matrix q = orthonormal_column_basis(span);
    Vector w = gaussian_matrix(m.p(), 1, rng).col(0);
    w -= q * (q.transpose() * w);
    w.normalize();
    Vector d = (m.centroids.row(0) - m.centroids.row(1)).transpose();
    d.normalize();
    return (d + w).normalized();
}

}  // namespace

std::vector<VerifierResult> run_verification_battery() {
    std::vector<VerifierResult> out;
    auto below = [&](std::string name, double v, double thr) {
        out.push_back({std::move(name), v, thr, true, v < thr});
    };
    auto above = [&](std::string name, double v, double thr) {
        out.push_back({std::move(name), v, thr, false, v > thr});
    };

    {
        const Lemma1Check c = verify_lemma1(d0(), 4.0);
        below("lemma1 D0 gamma=4 eigenvalues", c.eig_gap, kIdentityTolerance);
        const Lemma1Check r = verify_lemma1(random_gaussian_dataset(30, 100, 3, 11), 0.5);
        below("lemma1 n=30 p=100 K=3 eigenvalues", r.eig_gap, kIdentityTolerance);
        below("lemma1 n=30 p=100 K=3 subspace angle", r.subspace_angle, kAngleTolerance);
    }
    {
        const LabeledDataset ds = random_gaussian_dataset(80, 6, 4, 12);
        const LabeledDataset held = random_gaussian_dataset(200, 6, 4, 13);
        const auto pooled = verify_proposition1(ds, WithinEstimate::PooledW, &held.data());
        below("proposition1 pooled W angle", pooled.max_angle(), kAngleTolerance);
        below("proposition1 pooled W label disagreement", 1.0 - *pooled.label_agreement,
              kIdentityTolerance);
        const auto diag = verify_proposition1(ds, WithinEstimate::DiagonalW, &held.data());
        below("corollary2 diagonal Dw angle", diag.max_angle(), kAngleTolerance);
        below("corollary2 diagonal Dw label disagreement", 1.0 - *diag.label_agreement,
              kIdentityTolerance);
    }
    {
        Vector spikes(3);
        spikes << 9, 7, 5;
        const SpikedModel m = random_spiked_model(20, spikes, 1.0, 4, 21);
        below("theorem1 p=20 s=3 K=4 gamma=2", verify_theorem1(m, 2.0), kIdentityTolerance);
        Vector rho(4);
        rho << 0.5, 1.5, 3.0, 0.25;
        below("theorem1 rho family", verify_theorem1_rho(m, rho), kIdentityTolerance);
        const SpikedModel scalar = random_spiked_model(20, Vector(0), 2.0, 4, 22);
        below("theorem1 s=0 scalar covariance", verify_theorem1(scalar, 3.0), kIdentityTolerance);
        SpikedModel bent = m;
        const Vector e = off_structure_direction(m, 23);
        bent.perturbation = 0.5 * e * e.transpose();
        above("theorem1 negative control (non-spiked)", verify_theorem1(bent, 2.0),
              kPowerThreshold);
    }
    {
        Vector spikes(2);
        spikes << 6, 3;
        const SpikedModel m = random_mixture_model(15, spikes, 1.0, {2, 1}, 31);
        below("theorem2 K=2 R=(2,1) p=15 s=2", verify_theorem2(m, 2.0), kIdentityTolerance);
        above("theorem2 negative control (split s+K-1)",
              verify_theorem2(m, 2.0, m.s() + m.num_classes() - 1), kPowerThreshold);
    }
    {
        Vector spikes(2);
        spikes << 8, 4;
        const SpikedModel m = random_spiked_model(25, spikes, 1.0, 3, 41);
        const Matrix h = discriminant_span(m.within(), m.centroids);
        below("lemma2 minimal H", verify_lemma2(m, h), kIdentityTolerance);
        Philox4x32 rng(41, 3);
        Matrix enlarged(m.p(), h.cols() + 3);
        enlarged << h, gaussian_matrix(m.p(), 3, rng);
        below("lemma2 enlarged H", verify_lemma2(m, orthonormal_column_basis(enlarged)),
              kIdentityTolerance);
    }
    return out;
}

}  // namespace spcalda
