#pragma once

#include "spcalda/classifiers.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spcalda {

/// {0.25, 0.5, 1, 2, ..., 64, inf}
std::vector<double> default_gamma_grid();

/// {1, ..., min(n + K - 1, cap)}
std::vector<Index> default_q_grid(Index n, int num_classes, Index cap = 40);

struct CVGrid {
    std::vector<double> gammas;  // positive, kGammaInfinity allowed
    std::vector<Index> qs;
    int folds = 5;
    std::uint64_t seed = 0;

    static CVGrid defaults(const LabeledDataset& ds, std::uint64_t seed, int folds = 5);
    void validate(const LabeledDataset& ds) const;
};

/// Fold index in [0, k) per observation. Within each class the indices are
/// shuffled (Philox stream 1 of `seed`) and dealt round-robin.
std::vector<int> stratified_kfold(const std::vector<int>& labels, int folds, std::uint64_t seed);

/// Total order used to break ties between grid cells: smaller q first, then
/// smaller gamma, with infinity last.
bool cell_precedes(double gamma_a, Index q_a, double gamma_b, Index q_b);

struct CVReport {
    Method method = Method::SPCALDA;
    PriorsMode priors = PriorsMode::Empirical;
    std::vector<double> gammas;
    std::vector<Index> qs;
    int folds = 5;
    std::uint64_t seed = 0;
    Matrix error_table;               // |gammas| x |qs|, mean fold error
    std::vector<Matrix> fold_errors;  // per fold, same shape
    std::vector<int> fold_assignments;
    double selected_gamma = 1.0;
    Index selected_q = 1;
    double selected_error = 0.0;
    std::vector<std::pair<double, Index>> tie_trace;  // cells tied at the minimum, in tie order
    bool class_dropout = false;  // some training fold missed a class
    std::vector<std::string> notes;
    ReducedLDAModel model;  // refit on all data at the selected cell
};

/// Grid search over (gamma, q) by stratified k-fold CV with 0/1 loss. For
/// PCALDA the gamma grid is forced to {1}. Results do not depend on
/// `workers`.
CVReport cv_select(const LabeledDataset& ds, const CVGrid& grid, Method method,
                   PriorsMode priors = PriorsMode::Empirical, int workers = 1);

/// Mean fold error of one cell recomputed from scratch with fit_spcalda on
/// each training fold.
double recompute_cv_error(const LabeledDataset& ds, const std::vector<int>& fold_assignments,
                          int folds, double gamma, Index q,
                          PriorsMode priors = PriorsMode::Empirical);

}  // namespace spcalda
