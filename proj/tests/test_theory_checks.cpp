#include "spcalda/errors.hpp"
#include "spcalda/random.hpp"
#include "spcalda/theory_checks.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <random>

using namespace spcalda;

namespace {

Vector values(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Direction mixing a centroid difference with a vector orthogonal to the
// spikes and the centroids.
Vector off_structure(const SpikedModel& m, std::uint64_t seed) {
    Philox4x32 rng(seed);
    std::normal_distribution<double> normal;
    Matrix span(m.p(), m.s() + m.num_classes());
    span << m.spike_directions, m.centroids.transpose();
    const Matrix q = orthonormal_column_basis(span);
    Vector w(m.p());
    for (Index i = 0; i < m.p(); ++i) w(i) = normal(rng);
    w -= q * (q.transpose() * w);
    w.normalize();
    Vector d = (m.centroids.row(0) - m.centroids.row(1)).transpose();
    d.normalize();
    return (d + w).normalized();
}

Matrix random_orthonormal(Index p, Index q, std::uint64_t seed) {
    Philox4x32 rng(seed);
    std::normal_distribution<double> normal;
    Matrix g(p, q);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < q; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(p, q);
}

}  // namespace

TEST_CASE("spiked model construction") {
    const auto m = random_spiked_model(20, values({9, 7, 5}), 1.0, 4, 3);
    CHECK_NOTHROW(m.validate());
    CHECK((m.spike_directions.transpose() * m.spike_directions - Matrix::Identity(3, 3)).norm() < 1e-10);
    CHECK((m.priors.transpose() * m.centroids).norm() < 1e-10);
    const Matrix w = m.within();
    for (Index i = 0; i < 3; ++i) {
        const Vector xi = m.spike_directions.col(i);
        CHECK((w * xi - m.spike_values(i) * xi).norm() < 1e-10);
    }
}

TEST_CASE("theorem 1 on spiked models") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = random_spiked_model(20, values({9, 7, 5}), 1.0, 4, seed);
        CHECK(verify_theorem1(m, 2.0) < 1e-8);
        CHECK(verify_theorem1(m, 0.25) < 1e-8);
    }
}

TEST_CASE("theorem 1 with scalar covariance") {
    const auto m = random_spiked_model(12, Vector(0), 2.0, 3, 9);
    CHECK(verify_theorem1(m, 5.0) < 1e-8);
}

TEST_CASE("theorem 1 for the rho family") {
    const auto m = random_spiked_model(25, values({10, 4}), 0.5, 3, 4);
    CHECK(verify_theorem1_rho(m, values({0.3, 2.0, 7.0})) < 1e-8);
}

TEST_CASE("theorem 1 violation is scale invariant") {
    auto m = random_spiked_model(18, values({8, 3}), 1.0, 3, 6);
    const double base = verify_theorem1(m, 2.0);
    auto scaled = m;
    const double c = 3.0;
    scaled.spike_values *= c * c;
    scaled.base *= c * c;
    scaled.centroids *= c;
    CHECK(std::abs(verify_theorem1(scaled, 2.0) - base) < 1e-10);

    m.perturbation = 0.5 * off_structure(m, 1) * off_structure(m, 1).transpose();
    auto scaled_bad = m;
    scaled_bad.spike_values *= c * c;
    scaled_bad.base *= c * c;
    scaled_bad.centroids *= c;
    scaled_bad.perturbation *= c * c;
    CHECK(std::abs(verify_theorem1(scaled_bad, 2.0) - verify_theorem1(m, 2.0)) < 1e-10);
}

TEST_CASE("theorem 1 negative control has power") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto m = random_spiked_model(20, values({9, 7, 5}), 1.0, 4, seed);
        const Vector e = off_structure(m, seed + 50);
        m.perturbation = 0.5 * e * e.transpose();
        CHECK(verify_theorem1(m, 2.0) > 1e-3);
    }
}

TEST_CASE("a perturbation orthogonal to spikes and centroids is invisible") {
    auto m = random_spiked_model(20, values({9, 7, 5}), 1.0, 4, 2);
    Matrix span(20, 7);
    span << m.spike_directions, m.centroids.transpose();
    const Matrix q = orthonormal_column_basis(span);
    Vector w = Vector::Ones(20);
    w -= q * (q.transpose() * w);
    w.normalize();
    m.perturbation = 0.5 * w * w.transpose();
    CHECK(verify_theorem1(m, 2.0) < 1e-8);
}

TEST_CASE("degenerate split raises GapTooSmall") {
    // with s = 0 and all centroids zero the spectrum is flat
    SpikedModel m = random_spiked_model(8, Vector(0), 1.0, 2, 1);
    m.centroids.setZero();
    CHECK_THROWS_AS(verify_theorem1(m, 1.0), GapTooSmall);
}

TEST_CASE("theorem 2 on mixtures") {
    const auto m = random_mixture_model(15, values({6, 3}), 1.0, {2, 1}, 5);
    CHECK(m.total_prototypes() == 3);
    CHECK(verify_theorem2(m, 2.0) < 1e-8);
    CHECK(verify_theorem2(m, 2.0, m.s() + 1) > 1e-3);
    const auto wide = random_mixture_model(30, values({8, 5, 2}), 0.7, {3, 2, 2}, 6);
    CHECK(verify_theorem2(wide, 0.5) < 1e-8);
    CHECK(verify_theorem2(wide, 0.5, wide.s() + 2) > 1e-3);
}

TEST_CASE("theorem 2 with one prototype per class matches theorem 1") {
    const auto m = random_mixture_model(16, values({5, 2}), 1.0, {1, 1, 1}, 8);
    CHECK(std::abs(verify_theorem2(m, 2.0) - verify_theorem1(m, 2.0)) < 1e-12);
}

TEST_CASE("lemma 1") {
    Matrix x(4, 2);
    x << 0, 0, 2, 0, 0, 2, 2, 2;
    const LabeledDataset d0(x, {1, 1, 2, 2}, 2);
    const auto exact = verify_lemma1(d0, 4.0);
    CHECK(exact.eig_gap < 1e-14);
    CHECK(exact.rank == 2);

    const auto ds = random_gaussian_dataset(30, 100, 3, 12);
    for (double gamma : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        const auto check = verify_lemma1(ds, gamma);
        CHECK(check.eig_gap < 1e-8);
        CHECK(check.subspace_angle < 1e-6);
        CHECK(check.rank == 29);
    }
    CHECK_THROWS_AS(verify_lemma1(random_gaussian_dataset(5, 2100, 2, 1), 1.0), InvalidInput);
}

TEST_CASE("lemma 2") {
    const auto m = random_spiked_model(20, values({9, 4}), 1.0, 4, 13);
    const Matrix h = discriminant_span(m.within(), m.centroids);
    CHECK(h.cols() == 3);
    CHECK(verify_lemma2(m, h) < 1e-8);
    Matrix extra = random_orthonormal(20, 3, 99);
    extra -= h * (h.transpose() * extra);
    Matrix bigger(20, 6);
    bigger << h, orthonormal_column_basis(extra);
    CHECK(verify_lemma2(m, bigger) < 1e-8);
    CHECK_THROWS_AS(verify_lemma2(m, random_orthonormal(20, 3, 7)), PreconditionViolated);
}

TEST_CASE("proposition 1 and its diagonal corollary") {
    const auto ds = random_gaussian_dataset(80, 6, 4, 21);
    const auto test = random_gaussian_dataset(50, 6, 4, 22).data();
    const auto pooled = verify_proposition1(ds, WithinEstimate::PooledW, &test);
    CHECK(pooled.max_angle() < 1e-6);
    CHECK(pooled.dimensions_match());
    REQUIRE(pooled.label_agreement.has_value());
    CHECK(*pooled.label_agreement == 1.0);
    const auto diag = verify_proposition1(ds, WithinEstimate::DiagonalW, &test);
    CHECK(diag.max_angle() < 1e-6);
    CHECK(diag.dimensions_match());
    CHECK(*diag.label_agreement == 1.0);

    const auto two = random_gaussian_dataset(40, 4, 2, 3);
    const auto single = verify_proposition1(two, WithinEstimate::PooledW);
    CHECK(single.fisher_dim == 1);
    CHECK(single.max_angle() < 1e-6);

    CHECK_THROWS_AS(verify_proposition1(random_gaussian_dataset(8, 10, 2, 1), WithinEstimate::PooledW),
                    SingularWithinEstimate);
}

TEST_CASE("verifiers are deterministic") {
    const auto m = random_spiked_model(20, values({9, 7}), 1.0, 3, 77);
    CHECK(verify_theorem1(m, 2.0) == verify_theorem1(m, 2.0));
    const auto a = run_verification_battery();
    const auto b = run_verification_battery();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].measured == b[i].measured);
        CHECK(a[i].passed);
    }
}
