#include "spcalda/scenarios.hpp"

#include "spcalda/errors.hpp"
#include "spcalda/model_selection.hpp"
#include "spcalda/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace spcalda {

ScenarioSpec ScenarioSpec::make(int id, Index p, Index train_per_class, Index test_per_class,
                                std::uint64_t seed) {
    ScenarioSpec s;
    s.id = id;
    s.p = p;
    s.train_per_class = train_per_class;
    s.test_per_class = test_per_class;
    s.seed = seed;
    s.mean_scale = id <= 2 ? 0.3 : 0.21;
    s.rho = id <= 2 ? 0.0 : 0.5;
    s.contamination = id == 5   ? Contamination::StudentT3Scaled
                      : id == 6 ? Contamination::PerClassUniformDiag
                                : Contamination::None;
    s.validate();
    return s;
}

void ScenarioSpec::validate() const {
    if (id < 1 || id > 6) throw InvalidInput("scenario id must be 1..6, got " + std::to_string(id));
    if (num_classes != 4) throw InvalidInput("scenarios are defined for four classes");
    if (p < 4 || p % 4 != 0) {
        throw InvalidInput("p = " + std::to_string(p) + " must be a positive multiple of 4");
    }
    if (train_per_class < 1 || test_per_class < 1) {
        throw InvalidInput("per-class train/test counts must be at least 1");
    }
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in [0, 1)");
}

Matrix scenario_means(const ScenarioSpec& spec, Philox4x32& rng) {
    spec.validate();
    const Index block = spec.p / spec.num_classes;
    Matrix means = Matrix::Zero(spec.num_classes, spec.p);
    std::normal_distribution<double> normal(0.0, spec.mean_scale);
    for (int k = 0; k < spec.num_classes; ++k) {
        for (Index j = k * block; j < (k + 1) * block; ++j) {
            means(k, j) = spec.random_means() ? normal(rng) : spec.mean_scale;
        }
    }
    return means;
}

Matrix sample_compound_symmetry(Index n, Index p, double rho, Philox4x32& rng) {
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in [0, 1)");
    const double a = std::sqrt(1.0 - rho);
    const double b = std::sqrt(rho);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i) {
        const double shared = rho > 0 ? b * normal(rng) : 0.0;
        for (Index j = 0; j < p; ++j) x(i, j) = a * normal(rng) + shared;
    }
    return x;
}

ScenarioDraw generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Philox4x32 rng(spec.seed, 0);
    Matrix means = scenario_means(spec, rng);

    const int K = spec.num_classes;
    const Index per_class = spec.train_per_class + spec.test_per_class;
    Matrix train_x(K * spec.train_per_class, spec.p);
    Matrix test_x(K * spec.test_per_class, spec.p);
    std::vector<int> train_y, test_y;
    train_y.reserve(static_cast<std::size_t>(train_x.rows()));
    test_y.reserve(static_cast<std::size_t>(test_x.rows()));

    std::student_t_distribution<double> t3(3.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < K; ++k) {
        Matrix x = sample_compound_symmetry(per_class, spec.p, spec.rho, rng);
        x.rowwise() += means.row(k);
        if (spec.contamination == Contamination::StudentT3Scaled) {
            for (Index i = 0; i < x.rows(); ++i) {
                for (Index j = 0; j < x.cols(); ++j) x(i, j) += 0.2 * t3(rng);
            }
        } else if (spec.contamination == Contamination::PerClassUniformDiag) {
            Vector d(spec.p);
            for (Index j = 0; j < spec.p; ++j) d(j) = uniform(rng);
            for (Index i = 0; i < x.rows(); ++i) {
                for (Index j = 0; j < x.cols(); ++j) x(i, j) += d(j) * normal(rng);
            }
        }
        train_x.middleRows(k * spec.train_per_class, spec.train_per_class) =
            x.topRows(spec.train_per_class);
        test_x.middleRows(k * spec.test_per_class, spec.test_per_class) =
            x.bottomRows(spec.test_per_class);
        train_y.insert(train_y.end(), static_cast<std::size_t>(spec.train_per_class), k + 1);
        test_y.insert(test_y.end(), static_cast<std::size_t>(spec.test_per_class), k + 1);
    }

    std::optional<OracleSpec> oracle;
    if (spec.has_oracle()) {
        oracle = spec.rho > 0 ? OracleSpec::compound_symmetry(means, spec.rho)
                              : OracleSpec::identity(means);
    }
    return ScenarioDraw{LabeledDataset(std::move(train_x), std::move(train_y), K),
                        LabeledDataset(std::move(test_x), std::move(test_y), K), std::move(means),
                        std::move(oracle)};
}

std::uint64_t replicate_seed(std::uint64_t master_seed, int scenario, int replicate) {
    const std::uint64_t counter = (static_cast<std::uint64_t>(scenario) << 32) |
                                  static_cast<std::uint32_t>(replicate);
    return mix_seed(master_seed, counter);
}

namespace {

double evaluate_method(Method method, const ScenarioDraw& draw, const BenchmarkConfig& cfg,
                       std::uint64_t seed) {
    const LabeledDataset& train = draw.train;
    const LabeledDataset& test = draw.test;
    switch (method) {
        case Method::SPCALDA:
        case Method::PCALDA: {
            CVGrid grid;
            grid.gammas = cfg.gammas.empty() ? default_gamma_grid() : cfg.gammas;
            grid.qs = default_q_grid(train.n(), train.num_classes(), cfg.q_cap);
            grid.folds = cfg.folds;
            grid.seed = seed;
            const CVReport report = cv_select(train, grid, method, cfg.priors);
            return error_rate(predict(report.model, test.data()).labels, test.labels());
        }
        case Method::SRRLDA:
            return error_rate(predict(fit_srrlda(train, cfg.priors, cfg.srrlda_metric), test.data()).labels,
                              test.labels());
        case Method::IR:
            return error_rate(predict(fit_diagonal_lda(train, cfg.priors), test.data()).labels,
                              test.labels());
        case Method::LDA:
            return error_rate(predict(fit_full_lda(train, cfg.priors), test.data()).labels,
                              test.labels());
        case Method::ORACLE:
            return error_rate(bayes_oracle_predict(*draw.oracle, test.data()), test.labels());
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    if (config.replicates < 1) throw InvalidInput("replicates must be at least 1");
    if (config.scenarios.empty() || config.methods.empty()) {
        throw InvalidInput("benchmark needs at least one scenario and one method");
    }
    for (int s : config.scenarios) ScenarioSpec::make(s, config.p, config.train_per_class,
                                                      config.test_per_class);

    struct Task {
        int scenario;
        int replicate;
    };
    std::vector<Task> tasks;
    for (int s : config.scenarios) {
        for (int r = 0; r < config.replicates; ++r) tasks.push_back({s, r});
    }

    std::vector<std::vector<ReplicateResult>> slots(tasks.size());
    parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
        const Task task = tasks[t];
        const std::uint64_t seed = replicate_seed(config.master_seed, task.scenario, task.replicate);
        const ScenarioDraw draw = generate_scenario(ScenarioSpec::make(
            task.scenario, config.p, config.train_per_class, config.test_per_class, seed));
        for (Method m : config.methods) {
            if (m == Method::ORACLE && !draw.oracle) continue;  // reported as NA
            ReplicateResult res{task.scenario, task.replicate, seed, m, 0.0, {}};
            try {
                res.error = evaluate_method(m, draw, config, seed);
            } catch (const std::exception& e) {
                res.error = std::numeric_limits<double>::quiet_NaN();
                res.note = e.what();
            }
            slots[t].push_back(std::move(res));
        }
    });

    BenchmarkReport report;
    report.config = config;
    for (auto& slot : slots) {
        for (auto& r : slot) report.results.push_back(std::move(r));
    }
    return report;
}

std::vector<MethodSummary> BenchmarkReport::summary() const {
    std::vector<MethodSummary> out;
    for (int s : config.scenarios) {
        for (Method m : config.methods) {
            MethodSummary sum;
            sum.scenario = s;
            sum.method = m;
            double total = 0;
            std::vector<double> values;
            for (const auto& r : results) {
                if (r.scenario != s || r.method != m) continue;
                if (std::isnan(r.error)) {
                    ++sum.failures;
                    continue;
                }
                values.push_back(r.error);
                total += r.error;
            }
            if (values.empty() && sum.failures == 0) continue;
            sum.count = static_cast<int>(values.size());
            if (sum.count == 0) {
                sum.mean = sum.sd = std::numeric_limits<double>::quiet_NaN();
            } else {
                sum.mean = total / sum.count;
                double ss = 0;
                for (double v : values) ss += (v - sum.mean) * (v - sum.mean);
                sum.single_replicate = sum.count == 1;
                sum.sd = sum.count > 1 ? std::sqrt(ss / (sum.count - 1)) : 0.0;
            }
            out.push_back(sum);
        }
    }
    return out;
}

std::optional<MethodSummary> BenchmarkReport::find(int scenario, Method method) const {
    for (const auto& s : summary()) {
        if (s.scenario == scenario && s.method == method) return s;
    }
    return std::nullopt;
}

std::string BenchmarkReport::header() const {
    std::ostringstream os;
    os << "# generator: " << Philox4x32::name() << ", stream 0 = data, stream 1 = CV folds\n"
       << "# master_seed: " << config.master_seed
       << ", replicate seed = splitmix64(master_seed, scenario << 32 | replicate)\n"
       << "# p: " << config.p << ", per-class train/test: " << config.train_per_class << "/"
       << config.test_per_class << ", replicates: " << config.replicates
       << ", folds: " << config.folds << ", q cap: " << config.q_cap << "\n"
       << "# random means (scenarios 2, 4) redrawn every replicate\n"
       << "# priors: " << to_string(config.priors)
       << ", SRRLDA metric: " << to_string(config.srrlda_metric) << "\n";
    return os.str();
}

std::string BenchmarkReport::text_table() const {
    std::ostringstream os;
    os << header();
    os << "# classification error rates (%), mean(sd)\n";
    os << std::left << std::setw(12) << "";
    for (Method m : config.methods) os << std::setw(16) << to_string(m);
    os << "\n";
    for (int s : config.scenarios) {
        os << std::setw(12) << ("Scenario " + std::to_string(s));
        for (Method m : config.methods) {
            const auto sum = find(s, m);
            std::string cell = "NA";
            if (sum && sum->count > 0) {
                std::ostringstream c;
                c << std::fixed << std::setprecision(2) << 100.0 * sum->mean << "("
                  << 100.0 * sum->sd << ")";
                if (sum->single_replicate) c << "*";
                if (sum->failures) c << "!" << sum->failures;
                cell = c.str();
            }
            os << std::setw(16) << cell;
        }
        os << "\n";
    }
    if (config.replicates == 1) os << "# * single replicate: sd reported as 0\n";
    return os.str();
}

std::string BenchmarkReport::csv() const {
    std::ostringstream os;
    os << "scenario,method,replicate,error,seed\n";
    os << std::setprecision(17);
    for (const auto& r : results) {
        os << r.scenario << "," << to_string(r.method) << "," << r.replicate << ",";
        if (std::isnan(r.error)) os << "NaN";
        else os << r.error;
        os << "," << r.seed << "\n";
    }
    return os.str();
}

}  // namespace spcalda
