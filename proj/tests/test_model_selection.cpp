#include "spcalda/errors.hpp"
#include "spcalda/model_selection.hpp"
#include "spcalda/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace spcalda;

namespace {

LabeledDataset noisy_dataset(Index n, Index p, int K, std::uint64_t seed, double shift) {
    Philox4x32 rng(seed);
    std::normal_distribution<double> normal;
    Matrix x(n, p);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = static_cast<int>(i % K) + 1;
        for (Index j = 0; j < p; ++j) x(i, j) = normal(rng) + (j % K == i % K ? shift : 0.0);
    }
    return LabeledDataset(x, y, K);
}

bool same_report(const CVReport& a, const CVReport& b) {
    return a.fold_assignments == b.fold_assignments && a.selected_gamma == b.selected_gamma &&
           a.selected_q == b.selected_q && a.selected_error == b.selected_error &&
           (a.error_table - b.error_table).cwiseAbs().maxCoeff() == 0.0 &&
           a.tie_trace == b.tie_trace;
}

}  // namespace

TEST_CASE("default grids") {
    const auto g = default_gamma_grid();
    REQUIRE(g.size() == 10);
    CHECK(g.front() == 0.25);
    CHECK(g[8] == 64.0);
    CHECK(is_gamma_infinity(g.back()));
    const auto q = default_q_grid(100, 4);
    CHECK(q.size() == 40);
    CHECK(q.front() == 1);
    CHECK(default_q_grid(10, 3).back() == 12);
}

TEST_CASE("stratified folds") {
    SUBCASE("divisible classes fill folds exactly") {
        const std::vector<int> y = {1, 1, 1, 1, 2, 2, 2, 2};
        const auto f = stratified_kfold(y, 2, 7);
        for (int fold = 0; fold < 2; ++fold)
            for (int k = 1; k <= 2; ++k) {
                int c = 0;
                for (std::size_t i = 0; i < y.size(); ++i) c += f[i] == fold && y[i] == k;
                CHECK(c == 2);
            }
    }
    SUBCASE("k equal to the smallest class puts one member in each fold") {
        const std::vector<int> y = {1, 1, 1, 2, 2, 2, 2, 2, 2, 2};
        const auto f = stratified_kfold(y, 3, 1);
        for (int fold = 0; fold < 3; ++fold) {
            int c = 0;
            for (std::size_t i = 0; i < 3; ++i) c += f[i] == fold;
            CHECK(c == 1);
        }
    }
    SUBCASE("per-class counts differ by at most one") {
        std::vector<int> y;
        for (int i = 0; i < 37; ++i) y.push_back(1 + i % 3);
        const auto f = stratified_kfold(y, 5, 99);
        for (int k = 1; k <= 3; ++k) {
            std::vector<int> counts(5, 0);
            for (std::size_t i = 0; i < y.size(); ++i)
                if (y[i] == k) ++counts[static_cast<std::size_t>(f[i])];
            CHECK(*std::max_element(counts.begin(), counts.end()) -
                      *std::min_element(counts.begin(), counts.end()) <=
                  1);
        }
    }
    SUBCASE("deterministic, seed dependent") {
        std::vector<int> y;
        for (int i = 0; i < 40; ++i) y.push_back(1 + i % 2);
        CHECK(stratified_kfold(y, 5, 3) == stratified_kfold(y, 5, 3));
        CHECK(stratified_kfold(y, 5, 3) != stratified_kfold(y, 5, 4));
    }
    SUBCASE("too many folds") {
        CHECK_THROWS_AS(stratified_kfold({1, 1, 2, 2, 2}, 3, 0), InvalidInput);
        CHECK_THROWS_AS(stratified_kfold({1, 1, 2, 2}, 1, 0), InvalidInput);
    }
}

TEST_CASE("tie order") {
    CHECK(cell_precedes(8.0, 1, 0.5, 2));
    CHECK(cell_precedes(0.5, 2, 8.0, 2));
    CHECK(cell_precedes(64.0, 2, kGammaInfinity, 2));
    CHECK_FALSE(cell_precedes(kGammaInfinity, 2, 64.0, 2));
    CHECK_FALSE(cell_precedes(1.0, 3, 1.0, 3));
}

TEST_CASE("well separated classes select q = 1") {
    Philox4x32 rng(5);
    std::normal_distribution<double> normal;
    Matrix x(40, 6);
    std::vector<int> y(40);
    for (Index i = 0; i < 40; ++i) {
        y[static_cast<std::size_t>(i)] = i < 20 ? 1 : 2;
        for (Index j = 0; j < 6; ++j) x(i, j) = normal(rng);
        x(i, 0) += i < 20 ? -5.0 : 5.0;
    }
    const LabeledDataset ds(x, y, 2);
    CVGrid grid;
    grid.gammas = {0.5, 1.0, 4.0, kGammaInfinity};
    grid.qs = {1, 2, 3, 4};
    grid.seed = 11;
    const auto report = cv_select(ds, grid, Method::SPCALDA);
    CHECK(report.selected_q == 1);
    CHECK(report.selected_gamma == 0.5);
    CHECK(report.selected_error == 0.0);
    for (std::size_t g = 0; g < 4; ++g) CHECK(report.error_table(static_cast<Index>(g), 0) == 0.0);
    CHECK(report.tie_trace.front() == std::make_pair(0.5, Index{1}));
    CHECK(predict(report.model, x).labels == y);
}

TEST_CASE("single cell grid") {
    const auto ds = noisy_dataset(30, 20, 3, 2, 1.0);
    CVGrid grid;
    grid.gammas = {2.0};
    grid.qs = {3};
    const auto report = cv_select(ds, grid, Method::SPCALDA);
    CHECK(report.selected_gamma == 2.0);
    CHECK(report.selected_q == 3);
    CHECK(report.error_table.rows() == 1);
    CHECK(report.error_table.cols() == 1);
}

TEST_CASE("selection does not depend on grid order") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto ds = noisy_dataset(36, 30, 3, seed, 0.7);
        CVGrid a;
        a.gammas = {0.25, 1.0, 4.0, 64.0, kGammaInfinity};
        a.qs = {1, 2, 3, 5, 8};
        a.seed = seed;
        CVGrid b = a;
        std::reverse(b.gammas.begin(), b.gammas.end());
        std::rotate(b.qs.begin(), b.qs.begin() + 2, b.qs.end());
        const auto ra = cv_select(ds, a, Method::SPCALDA);
        const auto rb = cv_select(ds, b, Method::SPCALDA);
        CHECK(ra.selected_gamma == rb.selected_gamma);
        CHECK(ra.selected_q == rb.selected_q);
        CHECK(ra.selected_error == rb.selected_error);
    }
}

TEST_CASE("selected error is reproducible from the stored folds") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto ds = noisy_dataset(40, 50, 4, seed, 0.6);
        CVGrid grid = CVGrid::defaults(ds, seed);
        grid.qs = {1, 2, 3, 4, 6, 10, 20, 40};
        const auto report = cv_select(ds, grid, Method::SPCALDA);
        CHECK(report.error_table.minCoeff() == report.selected_error);
        CHECK(recompute_cv_error(ds, report.fold_assignments, report.folds, report.selected_gamma,
                                 report.selected_q) == report.selected_error);
        for (std::size_t g = 0; g < grid.gammas.size(); g += 3)
            for (std::size_t c = 0; c < grid.qs.size(); c += 2) {
                CHECK(recompute_cv_error(ds, report.fold_assignments, report.folds, grid.gammas[g],
                                         grid.qs[c]) ==
                      report.error_table(static_cast<Index>(g), static_cast<Index>(c)));
            }
    }
}

TEST_CASE("cv is deterministic and independent of workers") {
    const auto ds = noisy_dataset(48, 60, 4, 21, 0.5);
    const CVGrid grid = CVGrid::defaults(ds, 5);
    const auto a = cv_select(ds, grid, Method::SPCALDA, PriorsMode::Empirical, 1);
    const auto b = cv_select(ds, grid, Method::SPCALDA, PriorsMode::Empirical, 1);
    const auto c = cv_select(ds, grid, Method::SPCALDA, PriorsMode::Empirical, 4);
    CHECK(same_report(a, b));
    CHECK(same_report(a, c));
}

TEST_CASE("PCALDA fixes gamma to 1") {
    const auto ds = noisy_dataset(30, 20, 3, 8, 1.0);
    CVGrid grid = CVGrid::defaults(ds, 1);
    const auto report = cv_select(ds, grid, Method::PCALDA);
    REQUIRE(report.gammas.size() == 1);
    CHECK(report.gammas[0] == 1.0);
    CHECK(report.selected_gamma == 1.0);
    CHECK(report.model.method == Method::PCALDA);
    CHECK_THROWS_AS(cv_select(ds, grid, Method::IR), ConfigError);
}

TEST_CASE("grid validation") {
    const auto ds = noisy_dataset(20, 10, 2, 1, 1.0);
    CVGrid grid = CVGrid::defaults(ds, 0);
    grid.gammas = {};
    CHECK_THROWS(grid.validate(ds));
    grid = CVGrid::defaults(ds, 0);
    grid.gammas = {-1.0};
    CHECK_THROWS(grid.validate(ds));
    grid = CVGrid::defaults(ds, 0);
    grid.qs = {0};
    CHECK_THROWS(grid.validate(ds));
    grid = CVGrid::defaults(ds, 0);
    grid.folds = 11;
    CHECK_THROWS(grid.validate(ds));
}

TEST_CASE("error entries are proportions and the minimum is selected") {
    const auto ds = noisy_dataset(40, 80, 4, 3, 0.4);
    const auto report = cv_select(ds, CVGrid::defaults(ds, 9), Method::SPCALDA);
    CHECK(report.error_table.minCoeff() >= 0.0);
    CHECK(report.error_table.maxCoeff() <= 1.0);
    CHECK(report.selected_error == report.error_table.minCoeff());
    for (const auto& [g, q] : report.tie_trace) {
        const auto gi = std::find(report.gammas.begin(), report.gammas.end(), g) - report.gammas.begin();
        const auto qi = std::find(report.qs.begin(), report.qs.end(), q) - report.qs.begin();
        CHECK(report.error_table(gi, qi) == report.selected_error);
    }
}

TEST_CASE("smallest class equal to the fold count keeps every class in training") {
    Philox4x32 rng(4);
    std::normal_distribution<double> normal;
    Matrix x(25, 5);
    std::vector<int> y;
    for (Index i = 0; i < 25; ++i) {
        y.push_back(i < 10 ? 1 : (i < 20 ? 2 : 3));
        for (Index j = 0; j < 5; ++j) x(i, j) = normal(rng) + y.back();
    }
    const LabeledDataset ds(x, y, 3);
    CVGrid grid;
    grid.gammas = {1.0, 4.0};
    grid.qs = {1, 2};
    grid.folds = 5;
    const auto report = cv_select(ds, grid, Method::SPCALDA);
    CHECK_FALSE(report.class_dropout);
    CHECK(report.error_table.allFinite());
    grid.folds = 6;
    CHECK_THROWS(cv_select(ds, grid, Method::SPCALDA));
}
