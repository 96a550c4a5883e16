#pragma once

#include "spcalda/classifiers.hpp"
#include "spcalda/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spcalda {

enum class Contamination { None, StudentT3Scaled, PerClassUniformDiag };

/// One of the six four-class simulation designs.
///
///   1: Sigma_w = I,        constant block means 0.3
///   2: Sigma_w = I,        N(0, 0.3^2) block means
///   3: compound symmetry 0.5, constant block means 0.21
///   4: compound symmetry 0.5, N(0, 0.21^2) block means
///   5: scenario 3 plus 0.2 * t_3 noise on every entry
///   6: scenario 3 plus per-class N(0, diag(d_k^2)), d_k ~ U(0, 1)^p
///
/// Class k's mean is supported on the k-th quarter of the coordinates.
struct ScenarioSpec {
    int id = 1;
    Index p = 500;
    int num_classes = 4;
    Index train_per_class = 25;
    Index test_per_class = 25;
    double mean_scale = 0.3;
    double rho = 0.0;
    Contamination contamination = Contamination::None;
    std::uint64_t seed = 0;

    static ScenarioSpec make(int id, Index p = 500, Index train_per_class = 25,
                             Index test_per_class = 25, std::uint64_t seed = 0);
    void validate() const;
    bool random_means() const { return id == 2 || id == 4; }
    bool has_oracle() const { return id >= 1 && id <= 4; }
};

/// K x p class means. Draws from rng only for the random-mean designs.
Matrix scenario_means(const ScenarioSpec& spec, Philox4x32& rng);

/// n x p rows with covariance (1 - rho) I + rho 1 1^T, in O(n p):
/// sqrt(1 - rho) z + sqrt(rho) u 1 with z ~ N(0, I_p), u ~ N(0, 1).
Matrix sample_compound_symmetry(Index n, Index p, double rho, Philox4x32& rng);

struct ScenarioDraw {
    LabeledDataset train;
    LabeledDataset test;
    Matrix means;                      // true class means
    std::optional<OracleSpec> oracle;  // none for the contaminated designs
};

/// Draws one replicate from Philox stream 0 of spec.seed.
ScenarioDraw generate_scenario(const ScenarioSpec& spec);

struct BenchmarkConfig {
    std::vector<int> scenarios = {1, 2, 3, 4, 5, 6};
    std::vector<Method> methods = {Method::SPCALDA, Method::PCALDA, Method::SRRLDA, Method::IR,
                                   Method::ORACLE};
    int replicates = 10;
    std::uint64_t master_seed = 0;
    Index p = 100;
    Index train_per_class = 25;
    Index test_per_class = 25;
    int folds = 5;
    std::vector<double> gammas;  // empty = default grid
    Index q_cap = 40;
    PriorsMode priors = PriorsMode::Empirical;
    SrrldaMetric srrlda_metric = SrrldaMetric::Euclidean;
    int workers = 1;
};

struct ReplicateResult {
    int scenario = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    Method method = Method::SPCALDA;
    double error = 0.0;  // fraction; NaN when the method failed
    std::string note;
};

struct MethodSummary {
    int scenario = 0;
    Method method = Method::SPCALDA;
    double mean = 0.0;  // fraction
    double sd = 0.0;    // sample standard deviation
    int count = 0;      // finite replicates
    int failures = 0;
    bool single_replicate = false;  // sd reported as 0
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::vector<ReplicateResult> results;  // scenario, replicate, method order

    std::vector<MethodSummary> summary() const;
    std::optional<MethodSummary> find(int scenario, Method method) const;
    std::string header() const;
    /// Aligned "mean(sd)" table in percent, one row per scenario.
    std::string text_table() const;
    /// scenario,method,replicate,error,seed
    std::string csv() const;
};

/// Seed of replicate r of a scenario: mix_seed(master, scenario << 32 | r).
std::uint64_t replicate_seed(std::uint64_t master_seed, int scenario, int replicate);

/// Runs every (scenario, replicate) pair, tuning SPCALDA and PCALDA by CV on
/// the training split. Replicates run in parallel; results are identical
/// for any worker count.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

}  // namespace spcalda
