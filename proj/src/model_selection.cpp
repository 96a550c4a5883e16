#include "spcalda/model_selection.hpp"

#include "spcalda/errors.hpp"
#include "spcalda/parallel.hpp"
#include "spcalda/random.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

namespace spcalda {

namespace {

constexpr std::uint64_t kFoldStream = 1;

struct FoldSplit {
    std::optional<LabeledDataset> train;
    Matrix test_x;
    std::vector<int> test_y;             // original labels
    std::vector<int> to_original;        // compact label - 1 -> original label
    bool dropped_class = false;
};

FoldSplit make_fold(const LabeledDataset& ds, const std::vector<int>& assignment, int fold) {
    std::vector<Index> train_rows, test_rows;
    for (Index i = 0; i < ds.n(); ++i) {
        (assignment[i] == fold ? test_rows : train_rows).push_back(i);
    }
    if (train_rows.empty()) throw InvalidInput("fold " + std::to_string(fold) + " leaves no training rows");

    FoldSplit split;
    std::vector<int> compact(ds.num_classes() + 1, 0);
    for (Index i : train_rows) compact[ds.labels()[i]] = 1;
    int next = 0;
    for (int k = 1; k <= ds.num_classes(); ++k) {
        if (compact[k]) {
            compact[k] = ++next;
            split.to_original.push_back(k);
        }
    }
    split.dropped_class = next < ds.num_classes();

    Matrix train_x(static_cast<Index>(train_rows.size()), ds.p());
    std::vector<int> train_y(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        train_x.row(static_cast<Index>(i)) = ds.data().row(train_rows[i]);
        train_y[i] = compact[ds.labels()[train_rows[i]]];
    }
    split.train.emplace(std::move(train_x), std::move(train_y), next);

    split.test_x.resize(static_cast<Index>(test_rows.size()), ds.p());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        split.test_x.row(static_cast<Index>(i)) = ds.data().row(test_rows[i]);
        split.test_y.push_back(ds.labels()[test_rows[i]]);
    }
    return split;
}

double fold_error(const FoldSplit& split, const std::vector<int>& compact_predictions) {
    if (split.test_y.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < split.test_y.size(); ++i) {
        wrong += split.to_original[compact_predictions[i] - 1] != split.test_y[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(split.test_y.size());
}

Index fold_q_cap(const LabeledDataset& train) {
    return std::min(train.p(), train.n() + train.num_classes());
}

int gamma_rank(double gamma) { return is_gamma_infinity(gamma) ? 1 : 0; }

}  // namespace

std::vector<double> default_gamma_grid() {
    return {0.25, 0.5, 1, 2, 4, 8, 16, 32, 64, kGammaInfinity};
}

std::vector<Index> default_q_grid(Index n, int num_classes, Index cap) {
    const Index top = std::max<Index>(1, std::min<Index>(n + num_classes - 1, cap));
    std::vector<Index> qs(static_cast<std::size_t>(top));
    std::iota(qs.begin(), qs.end(), Index{1});
    return qs;
}

CVGrid CVGrid::defaults(const LabeledDataset& ds, std::uint64_t seed, int folds) {
    CVGrid g;
    g.gammas = default_gamma_grid();
    g.qs = default_q_grid(ds.n(), ds.num_classes());
    g.folds = folds;
    g.seed = seed;
    return g;
}

void CVGrid::validate(const LabeledDataset& ds) const {
    if (gammas.empty()) throw InvalidInput("gamma grid is empty");
    if (qs.empty()) throw InvalidInput("q grid is empty");
    for (double g : gammas) {
        if (!(g > 0) || std::isnan(g)) throw InvalidInput("gamma grid values must be positive");
    }
    for (Index q : qs) {
        if (q < 1 || q > ds.n() + ds.num_classes()) {
            throw InvalidInput("q grid value " + std::to_string(q) + " outside 1..n+K");
        }
    }
    const Index smallest = *std::min_element(ds.class_counts().begin(), ds.class_counts().end());
    if (folds < 2 || folds > smallest) {
        throw InvalidInput("folds = " + std::to_string(folds) + " must lie in 2.." +
                           std::to_string(smallest) + " (smallest class size)");
    }
}

std::vector<int> stratified_kfold(const std::vector<int>& labels, int folds, std::uint64_t seed) {
    if (labels.empty()) throw InvalidInput("no labels to split");
    if (folds < 2) throw InvalidInput("need at least two folds");
    const int K = *std::max_element(labels.begin(), labels.end());
    std::vector<std::vector<std::size_t>> members(K);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1) throw InvalidInput("labels must be positive");
        members[labels[i] - 1].push_back(i);
    }
    for (int k = 0; k < K; ++k) {
        if (!members[k].empty() && static_cast<int>(members[k].size()) < folds) {
            throw InvalidInput("class " + std::to_string(k + 1) + " has " +
                               std::to_string(members[k].size()) + " members, fewer than " +
                               std::to_string(folds) + " folds");
        }
    }
    Philox4x32 rng(seed, kFoldStream);
    std::vector<int> assignment(labels.size(), 0);
    for (auto& rows : members) {
        for (std::size_t i = rows.size(); i > 1; --i) {
            std::swap(rows[i - 1], rows[rng.bounded(i)]);
        }
        for (std::size_t j = 0; j < rows.size(); ++j) {
            assignment[rows[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
        }
    }
    return assignment;
}

bool cell_precedes(double gamma_a, Index q_a, double gamma_b, Index q_b) {
    if (q_a != q_b) return q_a < q_b;
    if (gamma_rank(gamma_a) != gamma_rank(gamma_b)) return gamma_rank(gamma_a) < gamma_rank(gamma_b);
    return gamma_a < gamma_b;
}

CVReport cv_select(const LabeledDataset& ds, const CVGrid& grid, Method method, PriorsMode priors,
                   int workers) {
    if (method != Method::SPCALDA && method != Method::PCALDA) {
        throw ConfigError("cross-validation supports SPCALDA and PCALDA only");
    }
    CVGrid g = grid;
    if (method == Method::PCALDA) g.gammas = {1.0};
    g.validate(ds);

    CVReport report;
    report.method = method;
    report.priors = priors;
    report.gammas = g.gammas;
    report.qs = g.qs;
    report.folds = g.folds;
    report.seed = g.seed;
    report.fold_assignments = stratified_kfold(ds.labels(), g.folds, g.seed);

    const Index G = static_cast<Index>(g.gammas.size());
    const Index Q = static_cast<Index>(g.qs.size());
    const Index q_max = *std::max_element(g.qs.begin(), g.qs.end());

    std::vector<FoldSplit> splits;
    splits.reserve(g.folds);
    for (int f = 0; f < g.folds; ++f) splits.push_back(make_fold(ds, report.fold_assignments, f));
    for (int f = 0; f < g.folds; ++f) {
        if (splits[f].dropped_class) {
            report.class_dropout = true;
            report.notes.push_back("fold " + std::to_string(f) + " training set misses a class");
        }
    }

    report.fold_errors.assign(g.folds, Matrix::Zero(G, Q));
    std::vector<std::vector<std::string>> task_notes(static_cast<std::size_t>(g.folds * G));
    parallel_for(static_cast<std::size_t>(g.folds * G), workers, [&](std::size_t task) {
        const int f = static_cast<int>(task / static_cast<std::size_t>(G));
        const Index gi = static_cast<Index>(task % static_cast<std::size_t>(G));
        const FoldSplit& split = splits[f];
        const LabeledDataset& train = *split.train;
        if (train.num_classes() < 2) {
            // A single training class predicts itself everywhere.
            std::vector<int> ones(split.test_y.size(), 1);
            report.fold_errors[f].row(gi).setConstant(fold_error(split, ones));
            return;
        }
        const ScatterModel sm = ScatterModel::from(train);
        const ProjectionBasis basis =
            top_principal_directions(sm, g.gammas[gi], std::min(q_max, fold_q_cap(train)));
        const Matrix z_train = project_columns(sm.centered_data, basis.directions);
        const Matrix centered_test = split.test_x.rowwise() - sm.overall_mean.transpose();
        const Matrix z_test = project_columns(centered_test, basis.directions);
        for (Index qi = 0; qi < Q; ++qi) {
            const Index q = std::min(g.qs[qi], basis.q());
            if (q < g.qs[qi] && qi + 1 == Q) {
                task_notes[task].push_back("fold " + std::to_string(f) + ", gamma index " +
                                           std::to_string(gi) + ": q capped at " +
                                           std::to_string(q));
            }
            const Matrix zq_train = z_train.leftCols(q);
            const ReducedLDAModel model =
                fit_reduced_lda(zq_train, train.labels(), train.num_classes(), priors);
            const Matrix zq_test = z_test.leftCols(q);
            const Prediction pred = predict_reduced(model, zq_test);
            report.fold_errors[f](gi, qi) = fold_error(split, pred.labels);
        }
    });
    for (auto& notes : task_notes) {
        for (auto& note : notes) report.notes.push_back(std::move(note));
    }

    report.error_table = Matrix::Zero(G, Q);
    for (int f = 0; f < g.folds; ++f) report.error_table += report.fold_errors[f];
    report.error_table /= static_cast<double>(g.folds);

    const double best = report.error_table.minCoeff();
    for (Index gi = 0; gi < G; ++gi) {
        for (Index qi = 0; qi < Q; ++qi) {
            if (report.error_table(gi, qi) == best) {
                report.tie_trace.emplace_back(g.gammas[gi], g.qs[qi]);
            }
        }
    }
    std::sort(report.tie_trace.begin(), report.tie_trace.end(), [](const auto& a, const auto& b) {
        return cell_precedes(a.first, a.second, b.first, b.second);
    });
    report.tie_trace.erase(std::unique(report.tie_trace.begin(), report.tie_trace.end()),
                           report.tie_trace.end());
    report.selected_gamma = report.tie_trace.front().first;
    report.selected_q = report.tie_trace.front().second;
    report.selected_error = best;

    const Index q_refit = std::min(report.selected_q, std::min(ds.p(), ds.n() + ds.num_classes()));
    report.model = method == Method::PCALDA
                       ? fit_pcalda(ds, q_refit, priors)
                       : fit_spcalda(ds, report.selected_gamma, q_refit, priors);
    return report;
}

double recompute_cv_error(const LabeledDataset& ds, const std::vector<int>& fold_assignments,
                          int folds, double gamma, Index q, PriorsMode priors) {
    double total = 0;
    for (int f = 0; f < folds; ++f) {
        const FoldSplit split = make_fold(ds, fold_assignments, f);
        const LabeledDataset& train = *split.train;
        if (train.num_classes() < 2) {
            total += fold_error(split, std::vector<int>(split.test_y.size(), 1));
            continue;
        }
        const ReducedLDAModel model =
            fit_spcalda(train, gamma, std::min(q, fold_q_cap(train)), priors);
        total += fold_error(split, predict(model, split.test_x).labels);
    }
    return total / static_cast<double>(folds);
}

}  // namespace spcalda
