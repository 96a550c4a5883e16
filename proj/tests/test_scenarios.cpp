#include "spcalda/errors.hpp"
#include "spcalda/scenarios.hpp"

#include <doctest.h>

#include <cmath>

using namespace spcalda;

namespace {

Matrix pooled_within(const LabeledDataset& ds, const Matrix& means) {
    Matrix dev = ds.data();
    for (Index i = 0; i < ds.n(); ++i) dev.row(i) -= means.row(ds.labels()[static_cast<std::size_t>(i)] - 1);
    return dev.transpose() * dev;
}

}  // namespace

TEST_CASE("block means for constant designs") {
    Philox4x32 rng(1);
    const auto m1 = scenario_means(ScenarioSpec::make(1, 8), rng);
    REQUIRE(m1.rows() == 4);
    REQUIRE(m1.cols() == 8);
    for (int k = 0; k < 4; ++k)
        for (Index j = 0; j < 8; ++j) CHECK(m1(k, j) == (j / 2 == k ? 0.3 : 0.0));
    const auto m3 = scenario_means(ScenarioSpec::make(3, 500), rng);
    CHECK(m3(2, 250) == 0.21);
    CHECK(m3(2, 374) == 0.21);
    CHECK(m3(2, 249) == 0.0);
    CHECK(m3(2, 375) == 0.0);
    for (int id : {5, 6}) {
        const auto m = scenario_means(ScenarioSpec::make(id, 40), rng);
        CHECK(m(0, 0) == 0.21);
        CHECK(m(3, 39) == 0.21);
    }
}

TEST_CASE("random block means") {
    Philox4x32 rng(2);
    double sum = 0, sumsq = 0;
    int count = 0;
    for (int r = 0; r < 50; ++r) {
        const auto m = scenario_means(ScenarioSpec::make(2, 40), rng);
        for (int k = 0; k < 4; ++k)
            for (Index j = 0; j < 40; ++j) {
                if (j / 10 != k) {
                    REQUIRE(m(k, j) == 0.0);
                } else {
                    sum += m(k, j);
                    sumsq += m(k, j) * m(k, j);
                    ++count;
                }
            }
    }
    const double var = sumsq / count - (sum / count) * (sum / count);
    CHECK(var == doctest::Approx(0.09).epsilon(0.2));
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(ScenarioSpec::make(1, 10).validate(), InvalidInput);
    CHECK_THROWS_AS(ScenarioSpec::make(7, 8).validate(), InvalidInput);
    CHECK_THROWS_AS(ScenarioSpec::make(1, 8, 0).validate(), InvalidInput);
    CHECK_NOTHROW(ScenarioSpec::make(6, 8).validate());
    const auto s = ScenarioSpec::make(4);
    CHECK(s.rho == 0.5);
    CHECK(s.mean_scale == 0.21);
    CHECK(s.random_means());
    CHECK(s.has_oracle());
    CHECK_FALSE(ScenarioSpec::make(5).has_oracle());
}

TEST_CASE("compound symmetry sampler") {
    SUBCASE("rho 0 is standard normal") {
        Philox4x32 rng(3);
        const Matrix x = sample_compound_symmetry(20000, 3, 0.0, rng);
        const Matrix c = x.transpose() * x / 20000.0;
        CHECK((c - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
    }
    SUBCASE("rho 0.5 covariance") {
        Philox4x32 rng(4);
        const Index n = 200000;
        const Matrix x = sample_compound_symmetry(n, 3, 0.5, rng);
        const Vector mean = x.colwise().mean();
        const Matrix c = (x.rowwise() - mean.transpose()).transpose() * (x.rowwise() - mean.transpose()) / double(n);
        Matrix expect = Matrix::Constant(3, 3, 0.5);
        expect.diagonal().setOnes();
        CHECK((c - expect).cwiseAbs().maxCoeff() < 0.02);
    }
    SUBCASE("row sums have variance p(1 - rho) + p^2 rho") {
        Philox4x32 rng(5);
        const Index n = 50000, p = 6;
        const double rho = 0.3;
        const Vector s = sample_compound_symmetry(n, p, rho, rng).rowwise().sum();
        const double var = (s.array() - s.mean()).square().sum() / double(n - 1);
        CHECK(var == doctest::Approx(p * (1 - rho) + p * p * rho).epsilon(0.03));
    }
    SUBCASE("invalid rho") {
        Philox4x32 rng(6);
        CHECK_THROWS_AS(sample_compound_symmetry(2, 2, 1.0, rng), InvalidInput);
        CHECK_THROWS_AS(sample_compound_symmetry(2, 2, -0.1, rng), InvalidInput);
    }
}

TEST_CASE("generated splits are balanced and deterministic") {
    for (int id = 1; id <= 6; ++id) {
        const auto spec = ScenarioSpec::make(id, 40, 7, 5, 100 + static_cast<std::uint64_t>(id));
        const auto a = generate_scenario(spec);
        const auto b = generate_scenario(spec);
        CHECK(a.train.n() == 28);
        CHECK(a.test.n() == 20);
        for (Index c : a.train.class_counts()) CHECK(c == 7);
        for (Index c : a.test.class_counts()) CHECK(c == 5);
        CHECK((a.train.data() - b.train.data()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.test.data() - b.test.data()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.oracle.has_value() == (id <= 4));
        const auto c = generate_scenario(ScenarioSpec::make(id, 40, 7, 5, 999));
        CHECK((a.train.data() - c.train.data()).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("pooled within covariance matches the design") {
    for (int id = 1; id <= 4; ++id) {
        Matrix acc = Matrix::Zero(40, 40);
        Index total = 0;
        for (int r = 0; r < 200; ++r) {
            const auto d = generate_scenario(ScenarioSpec::make(id, 40, 25, 25, replicate_seed(3, id, r)));
            acc += pooled_within(d.train, d.means) + pooled_within(d.test, d.means);
            total += d.train.n() + d.test.n();
        }
        acc /= double(total);
        const Matrix truth = generate_scenario(ScenarioSpec::make(id, 40)).oracle->within_matrix();
        CHECK((acc - truth).cwiseAbs().maxCoeff() < 0.05);
    }
}

TEST_CASE("scenario 6 inflates feature variances") {
    double excess = 0;
    for (int r = 0; r < 20; ++r) {
        const auto d = generate_scenario(ScenarioSpec::make(6, 40, 25, 25, replicate_seed(1, 6, r)));
        excess += (pooled_within(d.train, d.means).diagonal() / double(d.train.n())).mean() - 1.0;
    }
    // E[d^2] = 1/3 for d ~ U(0, 1)
    CHECK(excess / 20 == doctest::Approx(1.0 / 3.0).epsilon(0.25));
}

TEST_CASE("scenario 5 adds heavy-tailed noise") {
    double v3 = 0, v5 = 0;
    for (int r = 0; r < 20; ++r) {
        const auto a = generate_scenario(ScenarioSpec::make(3, 40, 25, 25, replicate_seed(1, 5, r)));
        const auto b = generate_scenario(ScenarioSpec::make(5, 40, 25, 25, replicate_seed(1, 5, r)));
        v3 += pooled_within(a.train, a.means).trace();
        v5 += pooled_within(b.train, b.means).trace();
    }
    // var(0.2 t_3) = 0.04 * 3
    CHECK(v5 / v3 == doctest::Approx(1.12).epsilon(0.05));
}

TEST_CASE("benchmark report") {
    BenchmarkConfig cfg;
    cfg.scenarios = {1, 5};
    cfg.replicates = 2;
    cfg.p = 20;
    cfg.train_per_class = 6;
    cfg.test_per_class = 4;
    cfg.folds = 3;
    cfg.q_cap = 5;
    cfg.master_seed = 17;
    const auto a = run_benchmark(cfg);
    CHECK(a.results.size() == 2 * 2 * 5 - 2);
    const auto oracle5 = a.find(5, Method::ORACLE);
    CHECK((!oracle5 || oracle5->count == 0));
    CHECK(a.text_table().find("NA") != std::string::npos);
    CHECK(a.text_table().find("Philox4x32-10") != std::string::npos);
    for (const auto& r : a.results) {
        CHECK(r.error >= 0.0);
        CHECK(r.error <= 1.0);
        CHECK(r.seed == replicate_seed(17, r.scenario, r.replicate));
    }
    const auto b = run_benchmark(cfg);
    CHECK(a.csv() == b.csv());
    CHECK(a.text_table() == b.text_table());
    cfg.workers = 3;
    const auto c = run_benchmark(cfg);
    CHECK(a.csv() == c.csv());
    CHECK(a.csv().rfind("scenario,method,replicate,error,seed\n", 0) == 0);
}

TEST_CASE("single replicate reports zero sd with a flag") {
    BenchmarkConfig cfg;
    cfg.scenarios = {1};
    cfg.methods = {Method::IR, Method::SRRLDA};
    cfg.replicates = 1;
    cfg.p = 8;
    cfg.train_per_class = 5;
    cfg.test_per_class = 5;
    const auto report = run_benchmark(cfg);
    const auto s = report.find(1, Method::IR);
    REQUIRE(s.has_value());
    CHECK(s->sd == 0.0);
    CHECK(s->single_replicate);
    CHECK(report.text_table().find('*') != std::string::npos);
}

TEST_CASE("summary statistics use the sample standard deviation") {
    BenchmarkReport report;
    report.config.scenarios = {1};
    report.config.methods = {Method::IR};
    report.config.replicates = 3;
    for (int r = 0; r < 3; ++r) report.results.push_back({1, r, 0, Method::IR, 0.1 * (r + 1), ""});
    const auto s = report.find(1, Method::IR);
    REQUIRE(s.has_value());
    CHECK(s->mean == doctest::Approx(0.2));
    CHECK(s->sd == doctest::Approx(0.1));
}

TEST_CASE("oracle error in scenario 1 at full dimension") {
    double total = 0;
    for (int r = 0; r < 10; ++r) {
        const auto d = generate_scenario(ScenarioSpec::make(1, 500, 25, 25, replicate_seed(2, 1, r)));
        total += error_rate(bayes_oracle_predict(*d.oracle, d.test.data()), d.test.labels());
    }
    CHECK(total / 10 < 0.06);
}
